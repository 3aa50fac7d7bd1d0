#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ragprobe/citation/types.hpp"
#include "ragprobe/llm/gateway.hpp"

namespace ragprobe::citation {

/// Rule-based sentence splitter. Citation markers after terminal punctuation
/// stay with the sentence they follow; list items and paragraphs always split.
std::vector<std::string> split_sentences(std::string_view text);

/// LLM statement extraction on citation-stripped text. Statement ids are
/// `s1`, `s2`, ... in document order.
std::vector<Statement> segment_statements(llm::Gateway& gateway, std::string_view text, Owner owner);

/// Deterministic variant: one statement per sentence, markers kept in the
/// text so that alignment can read them.
std::vector<Statement> segment_sentences(std::string_view text, Owner owner);

/// One label per statement, order preserved. A list of the wrong length or
/// with unknown labels is resampled.
std::vector<Necessity> classify_must_have(llm::Gateway& gateway, std::string_view question, std::string_view answer,
                                          const std::vector<Statement>& statements);

/// Sets `distinctive` on every statement and returns only the distinctive ones.
std::vector<Statement> filter_distinctive(llm::Gateway& gateway, std::string_view question,
                                          std::vector<Statement>& statements);

/// JSON list rendering used for the {statements} placeholder.
std::string render_statement_list(const std::vector<Statement>& statements);

} // namespace ragprobe::citation
