#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ragprobe/common/jsonl.hpp"
#include "ragprobe/metrics/agreement.hpp"
#include "ragprobe/metrics/response_quality.hpp"
#include "ragprobe/metrics/retrieval_metrics.hpp"
#include "ragprobe/metrics/selection.hpp"

namespace ragprobe::metrics {

inline constexpr std::string_view kLabelSchema = "ragprobe.labels";
inline constexpr int kLabelSchemaVersion = 1;

enum class Stage { relevance, selection, factuality, completeness };
enum class AnnotatorRole { annotator, adjudicator };

std::string_view to_string(Stage s);
Stage parse_stage(std::string_view s);
std::string_view to_string(AnnotatorRole r);
AnnotatorRole parse_role(std::string_view s);

struct LabelProvenance {
    std::string annotator_id;
    AnnotatorRole role = AnnotatorRole::annotator;
    std::string task_id;
};

struct RelevanceLabel {
    std::string query_id;
    std::string query_type;
    std::string passage_id;
    std::size_t rank = 0; // 1-based position in the query's retrieved list
    std::string statement_id; // must-have statement
    SupportLevel level = SupportLevel::none;
    LabelProvenance by;
};

struct SelectionLabel {
    std::string query_id;
    std::string model_id;
    int ref_ordinal = 0;
    std::vector<std::string> matched_passage_ids; // empty: self-generated
    LabelProvenance by;
};

struct FactualityLabel {
    std::string query_id;
    std::string model_id;
    std::string statement_id;
    bool verdict = false;
    std::vector<int> citations;
    LabelProvenance by;
};

struct CompletenessLabel {
    std::string query_id;
    std::string model_id;
    std::string must_have_statement_id;
    SupportLevel level = SupportLevel::none;
    LabelProvenance by;
};

struct LabelSet {
    std::vector<RelevanceLabel> relevance;
    std::vector<SelectionLabel> selection;
    std::vector<FactualityLabel> factuality;
    std::vector<CompletenessLabel> completeness;

    bool empty() const
    {
        return relevance.empty() && selection.empty() && factuality.empty() && completeness.empty();
    }
    void append(const LabelSet& other);
};

Json header_record(std::optional<Stage> stage);
Json to_json(const RelevanceLabel& l);
Json to_json(const SelectionLabel& l);
Json to_json(const FactualityLabel& l);
Json to_json(const CompletenessLabel& l);

struct SchemaViolation {
    std::string location; // path:line
    std::string message;
};

/// Adds one record to `set`. Header records are accepted and skipped.
/// Throws SchemaError describing the first problem.
void add_label_record(const Json& record, LabelSet& set);

/// Reads a label file, collecting violations instead of throwing.
LabelSet read_label_file(const std::filesystem::path& path, std::vector<SchemaViolation>& violations);

/// Every *.jsonl file in `dir`, in file-name order.
LabelSet read_label_dir(const std::filesystem::path& dir, std::vector<SchemaViolation>& violations);

// ---- turning labels into metric inputs ------------------------------------
//
// Several annotators may label the same item. The label used for metrics is
// the adjudicator's when there is one, else that of the lexicographically
// first annotator id.

std::vector<QueryRelevance> build_query_relevance(const LabelSet& labels);
std::vector<ResponseSelection> build_selection(const LabelSet& labels);
std::vector<ResponseFactuality> build_factuality(const LabelSet& labels);
std::vector<EvidenceResponse> build_evidence(const LabelSet& labels);
std::vector<ResponseCompleteness> build_completeness(const LabelSet& labels);
std::vector<SupportResponse> build_support(const LabelSet& labels);

/// Reliability data for one stage, one row per doubly-labeled item and one
/// column per annotator (adjudications excluded). Relevance and completeness
/// merge full and partial into one category when `merge_partial`. Selection
/// items are (reference, passage) pairs over the query's retrieved passages,
/// coded matched / not matched.
ReliabilityData agreement_units(const LabelSet& labels, Stage stage, bool merge_partial = true);

} // namespace ragprobe::metrics
