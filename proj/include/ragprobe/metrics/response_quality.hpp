#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ragprobe/metrics/report.hpp"
#include "ragprobe/metrics/retrieval_metrics.hpp"
#include "ragprobe/metrics/selection.hpp"

namespace ragprobe::metrics {

// ---- factuality -----------------------------------------------------------

struct ResponseFactuality {
    std::string query_id;
    std::string model_id;
    std::vector<std::string> statement_ids; // distinctive statements
    std::map<std::string, bool> verdicts;
    std::optional<bool> response_label; // directly annotated, used only when requested
};

struct QualityScores {
    MetricReport response_level;
    MetricReport statement_level;
};

/// Response level: mean over responses of the conjunction of statement
/// verdicts (or of response_label when `use_response_labels`).
/// Statement level: per-response proportion of true statements, averaged
/// over responses that have statements.
/// Throws InvalidArgument naming the first unlabeled statement.
QualityScores factuality_scores(std::span<const ResponseFactuality> responses, bool use_response_labels = false);

// ---- factuality by evidence ----------------------------------------------

enum class EvidenceBucket { true_positive, false_positive, self_generated, no_reference, unresolved };

std::string_view to_string(EvidenceBucket b);

struct EvidenceStatement {
    std::string statement_id;
    std::vector<int> citations;
    bool verdict = false;
};

struct EvidenceResponse {
    std::string query_id;
    std::string model_id;
    std::vector<EvidenceStatement> statements;
    std::vector<CitedReference> references;
    std::set<std::string> relevant;
};

/// Order in which the bucket of a statement with several citations is
/// decided. Must be a permutation of true_positive, false_positive and
/// self_generated. Statements without resolvable citations go to
/// no_reference. A statement that does not reach the first bucket of the
/// precedence but cites an unresolved reference goes to unresolved.
struct BucketPrecedence {
    std::vector<EvidenceBucket> order{EvidenceBucket::true_positive, EvidenceBucket::false_positive,
                                      EvidenceBucket::self_generated};
};

EvidenceBucket evidence_bucket(const EvidenceStatement& s, const EvidenceResponse& r,
                               const BucketPrecedence& precedence = {});

/// One report per bucket (pooled share of true statements), tagged
/// {"evidence": bucket, "precedence": "true_positive>false_positive>..."}.
std::vector<MetricReport> factuality_by_evidence(std::span<const EvidenceResponse> responses,
                                                 const BucketPrecedence& precedence = {});

// ---- completeness ---------------------------------------------------------

struct ResponseCompleteness {
    std::string query_id;
    std::string model_id;
    std::vector<std::string> must_have_ids;
    std::map<std::string, SupportLevel> levels;
};

/// Credit per statement: full 1, partial `partial_weight`, none 0.
/// Response level: 1 iff every must-have statement gets credit 1.
/// Statement level: per-response mean credit, averaged over responses.
/// Throws InvalidArgument naming the first missing label or a weight outside [0, 1].
QualityScores completeness_scores(std::span<const ResponseCompleteness> responses, double partial_weight = 1.0);

enum class SupportBucket { supported_referenced, supported_missed, unsupported };

std::string_view to_string(SupportBucket b);

struct SupportResponse {
    ResponseCompleteness completeness;
    /// Top-k passages fully or partially supporting each must-have statement.
    std::map<std::string, std::set<std::string>> supporting_passages;
    /// Passages the response cited through retrieval-based references.
    std::set<std::string> cited_passages;
};

SupportBucket support_bucket(const SupportResponse& r, const std::string& statement_id);

/// One report per bucket with the pooled mean credit of its statements.
std::vector<MetricReport> completeness_by_support(std::span<const SupportResponse> responses,
                                                  double partial_weight = 1.0);

} // namespace ragprobe::metrics
