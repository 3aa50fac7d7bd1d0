#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace ragprobe::llm {

enum class TemplateKind {
    statement_extraction,
    must_have,
    response_nonrag,
    response_rag,
    distinctive_filter,
    citation_alignment,
    evidence_filter,
    rationale_reformulation,
};

std::string_view to_string(TemplateKind k);
/// Throws InvalidArgument naming the unknown kind.
TemplateKind parse_template_kind(std::string_view name);

using Bindings = std::map<std::string, std::string>;

/// Raw template text with `{name}` placeholders.
std::string_view template_body(TemplateKind kind);

/// Placeholders the caller must bind. For response_rag the numbered document
/// bindings (passage_1, metadata_1, ...) are required in addition.
std::vector<std::string> required_placeholders(TemplateKind kind);

/// Substitutes every placeholder verbatim (single pass, no escaping).
/// response_rag expands contiguous passage_i / metadata_i bindings, i = 1..n,
/// into "- Document -" blocks in order.
/// Throws InvalidArgument naming the first missing binding.
std::string render_prompt(TemplateKind kind, const Bindings& bindings);

enum class QueryStyle { patient, usmle };

/// Leading instruction of the response prompts for each query style.
std::string_view response_instruction(QueryStyle style);

} // namespace ragprobe::llm
