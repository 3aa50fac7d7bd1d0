#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace ragprobe::pipeline {

enum class ExtractionRule { final_answer, answer_line, letter_token, option_text, unparsed };

std::string_view to_string(ExtractionRule r);

struct ExtractedOption {
    std::optional<std::string> letter; // nullopt when unparsed
    ExtractionRule rule = ExtractionRule::unparsed;
};

/// Extraction cascade over the response with its reference section removed:
///  1. "final answer" followed by an option letter or the text of an option
///  2. a last line of the form "Answer: X"
///  3. the last standalone option letter such as "(C)", "C.", "C)" or "C:"
///  4. the text of exactly one option appearing in the response
/// Anything else is unparsed; the function never guesses.
ExtractedOption extract_option(std::string_view answer_text, const std::map<std::string, std::string>& options);

} // namespace ragprobe::pipeline
