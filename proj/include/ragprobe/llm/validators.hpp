#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ragprobe/common/jsonl.hpp"

namespace ragprobe::llm {

/// A named structural check over raw model output.
struct Validator {
    std::string name;
    std::function<bool(std::string_view)> check;
};

/// "Yes" / "No" with surrounding whitespace, quotes or a trailing period tolerated.
std::optional<bool> parse_yes_no(std::string_view output);

/// "Distinctive" -> true, "Non-distinctive" -> false; anything else -> nullopt.
std::optional<bool> parse_distinctive(std::string_view output);

/// A JSON array of strings, optionally inside a ``` fence or surrounded by prose.
std::optional<std::vector<std::string>> parse_string_list(std::string_view output);

/// The first JSON object in the output (fences and leading prose tolerated).
std::optional<Json> parse_json_object(std::string_view output);

namespace validators {

Validator non_empty();
Validator yes_no();
Validator distinctive_verdict();
/// Non-empty JSON list of non-empty strings.
Validator string_list();
/// JSON list of exactly `n` strings, each one of `allowed` (case-insensitive).
Validator label_list(std::size_t n, std::vector<std::string> allowed);

} // namespace validators

} // namespace ragprobe::llm
