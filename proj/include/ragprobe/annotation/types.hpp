#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ragprobe/common/jsonl.hpp"
#include "ragprobe/metrics/labels.hpp"

namespace ragprobe::annotation {

using metrics::Stage;

enum class TaskStatus { open, claimed, submitted, adjudication };

std::string_view to_string(TaskStatus s);
TaskStatus parse_task_status(std::string_view s);

enum class ClaimState { active, submitted, expired };

std::string_view to_string(ClaimState s);
ClaimState parse_claim_state(std::string_view s);

struct Claim {
    std::string annotator_id;
    std::int64_t claimed_at = 0; // unix seconds
    ClaimState state = ClaimState::active;
};

struct AnnotationTask {
    std::string task_id;
    Stage stage = Stage::relevance;
    Json payload;
    TaskStatus status = TaskStatus::open;
    int required_annotations = 1;
    std::size_t item_count = 0;
    std::vector<Claim> claims;
};

Json to_json(const AnnotationTask& t);

struct AnnotatorProfile {
    std::string annotator_id;
    std::string display_name;
    std::set<Stage> stages;
    bool adjudicator = false;
};

Json to_json(const AnnotatorProfile& p);
AnnotatorProfile annotator_from_json(const Json& j);

struct SubmissionReceipt {
    std::string task_id;
    std::string annotator_id;
    metrics::AnnotatorRole role = metrics::AnnotatorRole::annotator;
    std::size_t label_count = 0;
    TaskStatus task_status = TaskStatus::open;
    /// True when this submission completed a doubly annotated task.
    bool agreement_pair_complete = false;
};

Json to_json(const SubmissionReceipt& r);

// ---- upstream artifacts a task is built from -------------------------------

struct StatementView {
    std::string statement_id;
    std::string text;
    std::vector<int> citations;
};

struct PassageView {
    std::string passage_id;
    std::size_t rank = 0;
    std::string title;
    std::string text;
    std::string metadata;
};

struct ReferenceView {
    int ordinal = 0;
    std::string raw_text;
};

struct GoldQuery {
    std::string query_id;
    std::string query_type;
    std::string text;
    std::vector<StatementView> must_have;
};

struct ResponseView {
    std::string query_id;
    std::string model_id;
    std::string response_text;
    bool rag = true;
    std::vector<PassageView> retrieved;
    std::vector<ReferenceView> references;
    std::vector<StatementView> statements; // distinctive model statements
};

struct TaskSource {
    std::vector<GoldQuery> queries;
    std::map<std::string, std::vector<PassageView>> retrieved; // per query, for relevance tasks
    std::vector<ResponseView> responses;
};

struct TaskSpec {
    std::string task_id;
    Stage stage = Stage::relevance;
    Json payload;
    std::size_t item_count = 0;
};

/// Derives every task for the source, in a fixed order: relevance per query,
/// then per response selection (RAG responses with references), factuality
/// (responses with statements) and completeness (queries with must-haves).
/// Throws NotFound when a response names an unknown query or a query has
/// no retrieved list.
std::vector<TaskSpec> build_task_specs(const TaskSource& source);

std::string make_task_id(Stage stage, std::string_view query_id, std::string_view model_id);

/// Checks a submitted label list against the task's items and converts it to
/// label records of the export schema. Throws InvalidArgument naming the
/// first missing, duplicate, unknown or malformed item.
std::vector<Json> convert_submission(const AnnotationTask& task, const Json& labels,
                                     const metrics::LabelProvenance& by);

/// The value each record assigns to its item, keyed by item; used to detect
/// disagreement between two submissions.
std::map<std::string, std::string> label_values(Stage stage, const std::vector<Json>& records);

} // namespace ragprobe::annotation
