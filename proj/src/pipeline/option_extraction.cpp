#include "ragprobe/pipeline/option_extraction.hpp"

#include <regex>
#include <vector>

#include "ragprobe/citation/reference_section.hpp"
#include "ragprobe/common/text.hpp"

namespace ragprobe::pipeline {
namespace {

using Options = std::map<std::string, std::string>;

bool is_option(const Options& options, const std::string& letter) { return options.contains(letter); }

// Padded with spaces so a substring test on it is a whole-word test.
std::string padded(std::string_view s) { return " " + text::normalize_for_match(s) + " "; }

std::optional<std::string> unique_option_text(std::string_view span, const Options& options)
{
    const std::string hay = padded(span);
    std::optional<std::string> found;
    for (const auto& [letter, option] : options) {
        const std::string needle = padded(option);
        if (needle.size() <= 2) continue;
        if (hay.find(needle) == std::string::npos) continue;
        if (found) return std::nullopt;
        found = letter;
    }
    return found;
}

std::optional<std::string> final_answer_rule(const std::vector<std::string>& lines, const Options& options)
{
    static const std::regex letter_after(
        R"(^[\s:*_\-]*(?:(?:is|was|would be|will be|=)\b)?[\s:*_\-]*(?:option\s+|choice\s+)?[(\[*]*([A-Z])(?:[)\].:,*]|\s|$))");
    for (std::size_t i = lines.size(); i-- > 0;) {
        const std::string lower = text::to_lower_ascii(lines[i]);
        const auto pos = lower.rfind("final answer");
        if (pos == std::string::npos) continue;
        std::string rest = lines[i].substr(pos + std::string_view("final answer").size());
        // The phrase may end its line with the answer on the next one.
        if (text::trim(rest).find_first_not_of(":*_- ") == std::string_view::npos && i + 1 < lines.size())
            rest += " " + lines[i + 1];
        std::smatch m;
        if (std::regex_search(rest, m, letter_after) && is_option(options, m[1].str())) return m[1].str();
        if (auto by_text = unique_option_text(rest, options)) return by_text;
    }
    return std::nullopt;
}

std::optional<std::string> answer_line_rule(const std::vector<std::string>& lines, const Options& options)
{
    static const std::regex answer_line(R"(^[\s*_#>\-]*answer[\s*_]*[:\-][\s*_]*[(\[]?([A-Z])(?:[)\].:,*]|\s|$))",
                                        std::regex::icase);
    for (auto line = lines.rbegin(); line != lines.rend(); ++line) {
        if (text::trim(*line).empty()) continue;
        std::smatch m;
        if (!std::regex_search(*line, m, answer_line)) return std::nullopt;
        std::string letter = m[1].str();
        if (letter[0] >= 'a' && letter[0] <= 'z') letter[0] = static_cast<char>(letter[0] - 'a' + 'A');
        return is_option(options, letter) ? std::optional(letter) : std::nullopt;
    }
    return std::nullopt;
}

std::optional<std::string> letter_token_rule(const std::string& body, const Options& options)
{
    static const std::regex token(R"((?:\(([A-Z])\))|(?:(?:^|[\s*])([A-Z])[).:](?=\s|$|\*)))");
    std::optional<std::string> last;
    for (auto it = std::sregex_iterator(body.begin(), body.end(), token); it != std::sregex_iterator(); ++it) {
        const std::string letter = (*it)[1].matched ? (*it)[1].str() : (*it)[2].str();
        if (is_option(options, letter)) last = letter;
    }
    return last;
}

} // namespace

std::string_view to_string(ExtractionRule r)
{
    switch (r) {
    case ExtractionRule::final_answer: return "final_answer";
    case ExtractionRule::answer_line: return "answer_line";
    case ExtractionRule::letter_token: return "letter_token";
    case ExtractionRule::option_text: return "option_text";
    case ExtractionRule::unparsed: return "unparsed";
    }
    return "unparsed";
}

ExtractedOption extract_option(std::string_view answer_text, const std::map<std::string, std::string>& options)
{
    if (options.empty()) return {};
    const std::string body = citation::response_body(answer_text);
    const std::vector<std::string> lines = text::split_lines(body);
    if (auto l = final_answer_rule(lines, options)) return {l, ExtractionRule::final_answer};
    if (auto l = answer_line_rule(lines, options)) return {l, ExtractionRule::answer_line};
    if (auto l = letter_token_rule(body, options)) return {l, ExtractionRule::letter_token};
    if (auto l = unique_option_text(body, options)) return {l, ExtractionRule::option_text};
    return {};
}

} // namespace ragprobe::pipeline
