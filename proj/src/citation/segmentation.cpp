#include "ragprobe/citation/segmentation.hpp"

#include <array>
#include <cctype>

#include "ragprobe/citation/inline_citations.hpp"
#include "ragprobe/citation/reference_section.hpp"
#include "ragprobe/common/error.hpp"
#include "ragprobe/common/text.hpp"
#include "ragprobe/llm/templates.hpp"

namespace ragprobe::citation {
namespace {

constexpr std::array<std::string_view, 14> kAbbreviations{"e.g", "i.e", "dr", "vs", "etc", "mr", "mrs", "ms",
                                                         "st",  "fig", "no", "approx", "al", "cf"};

bool is_abbreviation(std::string_view before_dot)
{
    std::size_t start = before_dot.size();
    while (start > 0 && !std::isspace(static_cast<unsigned char>(before_dot[start - 1])) && before_dot[start - 1] != '(') {
        --start;
    }
    const std::string word = text::to_lower_ascii(before_dot.substr(start));
    if (word.size() == 1 && std::isalpha(static_cast<unsigned char>(word[0]))) return true;
    for (auto a : kAbbreviations) {
        if (word == a) return true;
    }
    return false;
}

/// Length of a citation marker run (with leading horizontal space) at `i`, or 0.
std::size_t marker_run(std::string_view s, std::size_t i)
{
    std::size_t j = i;
    std::size_t last_good = i;
    while (true) {
        std::size_t k = j;
        while (k < s.size() && (s[k] == ' ' || s[k] == '\t')) ++k;
        if (k >= s.size() || s[k] != '[') break;
        const auto close = s.find(']', k);
        if (close == std::string_view::npos) break;
        const auto parsed = parse_inline_citations(s.substr(k, close - k + 1));
        if (parsed.markers.size() != 1) break;
        j = close + 1;
        last_good = j;
    }
    return last_good - i;
}

bool starts_sentence(char c)
{
    const auto u = static_cast<unsigned char>(c);
    return std::isupper(u) || std::isdigit(u) || c == '(' || c == '"' || c == '[' || c == '*' || u >= 0x80;
}

void split_line(std::string_view line, std::vector<std::string>& out)
{
    std::size_t start = 0;
    std::size_t i = 0;
    auto emit = [&](std::size_t end) {
        const auto piece = text::trim(line.substr(start, end - start));
        if (!piece.empty()) out.emplace_back(piece);
        start = end;
    };
    while (i < line.size()) {
        const char c = line[i];
        if (c != '.' && c != '!' && c != '?') {
            ++i;
            continue;
        }
        if (c == '.' && is_abbreviation(line.substr(start, i - start))) {
            ++i;
            continue;
        }
        std::size_t j = i + 1;
        while (j < line.size() && (line[j] == '"' || line[j] == '\'' || line[j] == ')' || line[j] == '*')) ++j;
        j += marker_run(line, j);
        if (j >= line.size()) {
            i = j;
            break;
        }
        if (!std::isspace(static_cast<unsigned char>(line[j]))) {
            i = j;
            continue;
        }
        std::size_t k = j;
        while (k < line.size() && std::isspace(static_cast<unsigned char>(line[k]))) ++k;
        if (k < line.size() && starts_sentence(line[k])) {
            emit(j);
            i = k;
            continue;
        }
        i = j;
    }
    emit(line.size());
}

std::string_view strip_list_marker(std::string_view line)
{
    line = text::trim(line);
    if (line.size() >= 2 && (line[0] == '-' || line[0] == '*' || line[0] == '+') && line[1] == ' ') {
        return text::trim(line.substr(2));
    }
    std::size_t d = 0;
    while (d < line.size() && d < 3 && std::isdigit(static_cast<unsigned char>(line[d]))) ++d;
    if (d > 0 && d + 1 < line.size() && (line[d] == '.' || line[d] == ')') && line[d + 1] == ' ') {
        return text::trim(line.substr(d + 2));
    }
    return line;
}

std::vector<Statement> to_statements(const std::vector<std::string>& texts, Owner owner)
{
    std::vector<Statement> out;
    out.reserve(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
        Statement s;
        s.statement_id = "s" + std::to_string(i + 1);
        s.owner = owner;
        s.text = texts[i];
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace

std::vector<std::string> split_sentences(std::string_view text)
{
    std::vector<std::string> out;
    for (const auto& raw : text::split_lines(text)) {
        const auto line = text::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        split_line(strip_list_marker(line), out);
    }
    return out;
}

std::vector<Statement> segment_sentences(std::string_view text, Owner owner)
{
    auto statements = to_statements(split_sentences(text), owner);
    for (auto& s : statements) {
        auto inl = parse_inline_citations(s.text);
        s.text = std::string(text::trim(inl.clean_text));
        s.citations = std::move(inl.ordinals);
    }
    return statements;
}

std::vector<Statement> segment_statements(llm::Gateway& gateway, std::string_view text, Owner owner)
{
    if (text::trim(text).empty()) throw InvalidArgument("cannot segment empty text");
    std::string input = owner == Owner::model_response ? response_body(text) : std::string(text);
    input = parse_inline_citations(input).clean_text;
    const std::string prompt =
        llm::render_prompt(llm::TemplateKind::statement_extraction, {{"input", std::string(text::trim(input))}});
    const auto exchange = gateway.complete_validated(prompt, llm::sampling_profile("deterministic"),
                                                     llm::validators::string_list(),
                                                     {.kind = "statement_extraction"});
    auto items = *llm::parse_string_list(exchange.response_text);
    for (auto& item : items) item = std::string(text::trim(item));
    return to_statements(items, owner);
}

std::string render_statement_list(const std::vector<Statement>& statements)
{
    Json list = Json::array();
    for (const auto& s : statements) list.push_back(s.text);
    return list.dump();
}

std::vector<Necessity> classify_must_have(llm::Gateway& gateway, std::string_view question, std::string_view answer,
                                          const std::vector<Statement>& statements)
{
    if (statements.empty()) return {};
    const std::string prompt = llm::render_prompt(llm::TemplateKind::must_have,
                                                  {{"query", std::string(question)},
                                                   {"answer", std::string(answer)},
                                                   {"statements", render_statement_list(statements)}});
    const auto exchange = gateway.complete_validated(
        prompt, llm::sampling_profile("deterministic"),
        llm::validators::label_list(statements.size(), {"must-have", "nice-to-have"}), {.kind = "must_have"});
    const auto labels = *llm::parse_string_list(exchange.response_text);
    std::vector<Necessity> out;
    for (const auto& label : labels) {
        out.push_back(text::to_lower_ascii(text::trim(label)) == "must-have" ? Necessity::must_have
                                                                             : Necessity::nice_to_have);
    }
    return out;
}

std::vector<Statement> filter_distinctive(llm::Gateway& gateway, std::string_view question,
                                          std::vector<Statement>& statements)
{
    std::vector<Statement> kept;
    for (auto& s : statements) {
        if (s.owner != Owner::model_response) {
            throw InvalidArgument("distinctiveness applies to model-response statements only (" + s.statement_id + ")");
        }
        const std::string prompt = llm::render_prompt(llm::TemplateKind::distinctive_filter,
                                                      {{"question", std::string(question)}, {"sentence", s.text}});
        const auto exchange = gateway.complete_validated(prompt, llm::sampling_profile("deterministic"),
                                                         llm::validators::distinctive_verdict(),
                                                         {.kind = "distinctive_filter"});
        s.distinctive = *llm::parse_distinctive(exchange.response_text);
        if (*s.distinctive) kept.push_back(s);
    }
    return kept;
}

} // namespace ragprobe::citation
