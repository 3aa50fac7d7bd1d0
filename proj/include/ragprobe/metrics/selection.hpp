#pragma once

#include <set>
#include <span>
#include <string>
#include <vector>

#include "ragprobe/metrics/report.hpp"

namespace ragprobe::metrics {

struct CitedReference {
    int ordinal = 0;
    std::vector<std::string> matched_passages; // empty: self-generated
    bool unresolved = false;
};

/// What one response cited, against the relevance of what it was shown.
struct ResponseSelection {
    std::string query_id;
    std::string model_id;
    std::vector<std::string> retrieved; // rank order
    std::set<std::string> relevant;     // relevant passages (need not be limited to retrieved)
    std::vector<CitedReference> references;
};

struct SelectionResult {
    MetricReport precision;
    MetricReport recall;
};

/// Micro-averaged over responses with distinct-passage accounting:
///   precision = |cited ∩ relevant| / |cited|
///   recall    = |cited ∩ relevant| / |retrieved ∩ relevant|
/// where cited is the union of the retrieval-based references' matched
/// passages within the retrieved list. Self-generated and unresolved
/// references are excluded.
SelectionResult selection_metrics(std::span<const ResponseSelection> responses);

/// Per-reference accounting: precision counts retrieval-based references
/// (relevant when any matched passage is); recall credits each reference with
/// at most its first relevant matched passage by rank.
SelectionResult selection_metrics_per_reference(std::span<const ResponseSelection> responses);

} // namespace ragprobe::metrics
