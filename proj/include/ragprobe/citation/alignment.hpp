#pragma once

#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "ragprobe/citation/types.hpp"
#include "ragprobe/llm/gateway.hpp"

namespace ragprobe::citation {

/// Parses the alignment JSON (`{"#1": {"refs": [..]}, ...}`) for `n` statements.
/// Returns nullopt unless keys #1..#n are all present with integer ref lists.
std::optional<std::vector<std::vector<int>>> parse_alignment_output(std::string_view output, std::size_t n);

llm::Validator alignment_structure(std::size_t n_statements);

/// Fills each statement's citations. Markers found in the statement text, or
/// located by position in the response body, are used directly; otherwise
/// the alignment prompt is sent through `gateway` (when null, unlocated
/// statements keep no citations and a warning is recorded).
ParsedResponse align_statements_to_refs(llm::Gateway* gateway, std::string_view response_text,
                                        std::vector<Statement> statements);

/// Sentence segmentation plus deterministic alignment; no model calls.
ParsedResponse parse_response(std::string_view response_text);

} // namespace ragprobe::citation
