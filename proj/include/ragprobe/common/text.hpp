#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ragprobe::text {

std::string to_lower_ascii(std::string_view s);

std::string_view trim(std::string_view s);

bool starts_with_icase(std::string_view s, std::string_view prefix);

std::vector<std::string> split_lines(std::string_view s);

/// Lowercases, replaces every non-alphanumeric ASCII byte with a space and
/// collapses runs of spaces. Bytes >= 0x80 are kept so UTF-8 words survive.
std::string normalize_for_match(std::string_view s);

/// Whitespace tokens of normalize_for_match(s).
std::vector<std::string> match_tokens(std::string_view s);

/// Largest index <= pos that does not fall inside a UTF-8 multi-byte sequence.
std::size_t utf8_floor(std::string_view s, std::size_t pos);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

} // namespace ragprobe::text
