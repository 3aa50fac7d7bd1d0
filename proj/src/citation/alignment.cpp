#include "ragprobe/citation/alignment.hpp"

#include <algorithm>
#include <set>

#include "ragprobe/citation/inline_citations.hpp"
#include "ragprobe/citation/reference_section.hpp"
#include "ragprobe/citation/segmentation.hpp"
#include "ragprobe/common/text.hpp"
#include "ragprobe/llm/templates.hpp"

namespace ragprobe::citation {
namespace {

void sort_unique(std::vector<int>& v)
{
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

bool is_trailing_gap_char(char c)
{
    return c == ' ' || c == '\t' || c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?' ||
           c == ')' || c == '"' || c == '\'' || c == '*';
}

struct Span {
    std::size_t begin;
    std::size_t end; // one past the statement plus trailing punctuation/space
};

std::string render_numbered_statements(const std::vector<Statement>& statements)
{
    std::string out;
    for (std::size_t i = 0; i < statements.size(); ++i) {
        out += "#" + std::to_string(i + 1) + ". " + statements[i].text + "\n";
    }
    return out;
}

std::string render_reference_lines(const std::vector<Reference>& refs)
{
    std::string out;
    for (const auto& r : refs) out += std::to_string(r.ordinal) + ". " + r.raw_text + "\n";
    return out;
}

void finish(ParsedResponse& out)
{
    std::set<int> known;
    for (const auto& r : out.references) known.insert(r.ordinal);
    std::set<int> unmatched;
    for (auto& s : out.body_statements) {
        sort_unique(s.citations);
        for (int c : s.citations) {
            if (!known.contains(c)) unmatched.insert(c);
        }
    }
    out.unmatched_citation_ordinals.assign(unmatched.begin(), unmatched.end());
}

} // namespace

std::optional<std::vector<std::vector<int>>> parse_alignment_output(std::string_view output, std::size_t n)
{
    auto j = llm::parse_json_object(output);
    if (!j) return std::nullopt;
    std::vector<std::vector<int>> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto it = j->find("#" + std::to_string(i + 1));
        if (it == j->end() || !it->is_object()) return std::nullopt;
        auto refs = it->find("refs");
        if (refs == it->end() || !refs->is_array()) return std::nullopt;
        for (const auto& r : *refs) {
            if (!r.is_number_integer() || r.get<long long>() < 1) return std::nullopt;
            out[i].push_back(r.get<int>());
        }
        sort_unique(out[i]);
    }
    return out;
}

llm::Validator alignment_structure(std::size_t n_statements)
{
    return {"alignment-structure",
            [n_statements](std::string_view s) { return parse_alignment_output(s, n_statements).has_value(); }};
}

ParsedResponse align_statements_to_refs(llm::Gateway* gateway, std::string_view response_text,
                                        std::vector<Statement> statements)
{
    ParsedResponse out;
    const auto section = parse_reference_section(response_text);
    out.references = section.references;
    out.missing_reference_section = section.missing_section;
    out.warnings = section.warnings;

    const auto body = parse_inline_citations(response_text.substr(0, section.heading_offset));
    const std::string_view clean = body.clean_text;

    std::vector<std::optional<Span>> spans(statements.size());
    std::vector<bool> resolved(statements.size(), false);
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < statements.size(); ++i) {
        auto& s = statements[i];
        auto own = parse_inline_citations(s.text);
        if (!own.markers.empty()) {
            s.text = std::string(text::trim(own.clean_text));
            s.citations.insert(s.citations.end(), own.ordinals.begin(), own.ordinals.end());
            resolved[i] = true;
            continue;
        }
        if (!s.citations.empty() || body.markers.empty()) {
            resolved[i] = true;
            continue;
        }
        const std::string needle(text::trim(s.text));
        if (needle.empty()) {
            resolved[i] = true;
            continue;
        }
        auto pos = clean.find(needle, cursor);
        if (pos == std::string_view::npos) pos = clean.find(needle);
        if (pos == std::string_view::npos) continue;
        std::size_t end = pos + needle.size();
        while (end < clean.size() && is_trailing_gap_char(clean[end])) ++end;
        spans[i] = Span{pos, end};
        cursor = pos + needle.size();
        resolved[i] = true;
    }

    std::vector<bool> claimed(body.markers.size(), false);
    for (std::size_t i = 0; i < statements.size(); ++i) {
        if (!spans[i]) continue;
        for (std::size_t m = 0; m < body.markers.size(); ++m) {
            const auto off = body.markers[m].clean_offset;
            if (claimed[m] || off < spans[i]->begin || off > spans[i]->end) continue;
            claimed[m] = true;
            const auto& ords = body.markers[m].ordinals;
            statements[i].citations.insert(statements[i].citations.end(), ords.begin(), ords.end());
        }
    }

    const bool all_resolved = std::all_of(resolved.begin(), resolved.end(), [](bool b) { return b; });
    if (!all_resolved) {
        if (gateway) {
            const std::string prompt =
                llm::render_prompt(llm::TemplateKind::citation_alignment,
                                   {{"model_response", std::string(response_text)},
                                    {"model_statements", render_numbered_statements(statements)},
                                    {"references", render_reference_lines(out.references)}});
            const auto exchange =
                gateway->complete_validated(prompt, llm::sampling_profile("deterministic"),
                                            alignment_structure(statements.size()), {.kind = "citation_alignment"});
            const auto aligned = *parse_alignment_output(exchange.response_text, statements.size());
            for (std::size_t i = 0; i < statements.size(); ++i) {
                if (!resolved[i]) statements[i].citations = aligned[i];
            }
        } else {
            for (std::size_t i = 0; i < statements.size(); ++i) {
                if (!resolved[i]) {
                    out.warnings.push_back("statement " + statements[i].statement_id +
                                           " could not be located in the response; no citations assigned");
                }
            }
        }
    }

    out.body_statements = std::move(statements);
    finish(out);
    return out;
}

ParsedResponse parse_response(std::string_view response_text)
{
    const auto section = parse_reference_section(response_text);
    ParsedResponse out;
    out.references = section.references;
    out.missing_reference_section = section.missing_section;
    out.warnings = section.warnings;
    out.body_statements = segment_sentences(response_text.substr(0, section.heading_offset), Owner::model_response);
    finish(out);
    return out;
}

} // namespace ragprobe::citation
