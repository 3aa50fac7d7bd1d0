#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ragprobe/annotation/types.hpp"
#include "ragprobe/app/runtime.hpp"
#include "ragprobe/citation/origin.hpp"
#include "ragprobe/metrics/evaluate.hpp"
#include "ragprobe/pipeline/benchmark.hpp"

namespace ragprobe::app {

// ---- corpus indexes and search -------------------------------------------

struct IndexSummary {
    std::string corpus;
    std::filesystem::path path;
    std::size_t passages = 0;
};

/// Builds and saves the chosen index inside `corpus_dir`, stamped with the
/// corpus checksum. Dense indexes embed "title\ntext" with the article encoder.
IndexSummary index_corpus(const std::filesystem::path& corpus_dir, retrieval::RetrieverKind kind,
                          const retrieval::EmbeddingClient* embeddings = nullptr);

struct SearchRequest {
    std::vector<std::filesystem::path> corpus_dirs; // declaration order matters for tie breaks
    std::string query;
    std::size_t k = 16;
    retrieval::RetrieverKind kind = retrieval::RetrieverKind::bm25;
    retrieval::MergeMode merge = retrieval::MergeMode::global;
    std::string api_key_env; // dense only; the query encoder URL comes from the index
};

struct SearchOutput {
    retrieval::SearchResult result;
    std::vector<corpus::Passage> passages; // in hit order
};

SearchOutput search_corpora(const SearchRequest& request, const RuntimeHooks& hooks = {});

// ---- run / replay ----------------------------------------------------------

struct RunRequest {
    std::filesystem::path config_path;
    std::optional<std::filesystem::path> dataset; // multiple-choice items
    std::optional<std::filesystem::path> queries; // free-text queries
    std::filesystem::path run_dir;
    bool use_grid = false;
    llm::TranscriptMode mode = llm::TranscriptMode::cache;
    std::optional<std::size_t> limit;
    std::optional<std::size_t> parallelism;
    bool retry_failed = false; // rerun stored records that carry a stage error
};

struct RunSummary {
    std::string snapshot_digest;
    std::size_t records = 0;
    std::size_t reused = 0; // found in runs.jsonl and not rerun
    std::size_t failed = 0;
    std::size_t network_calls = 0;
    std::optional<pipeline::BenchmarkTable> table;
};

/// Writes the snapshot, then runs every configuration over the inputs,
/// appending one record per (query, configuration) to runs.jsonl. Records
/// already present are reused, so a rerun of a finished directory makes no
/// model calls. Multiple-choice runs also write reports/accuracy.json.
RunSummary run_experiment(const RunRequest& request, const RuntimeHooks& hooks = {});

struct ReplaySummary {
    std::size_t records = 0;
    std::size_t identical = 0;
    std::vector<std::string> mismatched; // record ids
    std::size_t network_calls = 0;
};

/// Re-executes the snapshot against recorded transcripts only and compares
/// each record with the stored line byte for byte.
ReplaySummary replay_run(const std::filesystem::path& run_dir, const RuntimeHooks& hooks = {});

// ---- parse ----------------------------------------------------------------

struct ParseSummary {
    std::size_t responses = 0;
    std::size_t statements = 0;
    citation::OriginCounts origins;
    std::size_t missing_reference_sections = 0;
    std::size_t warnings = 0;
};

/// Parses every successful record of runs.jsonl into parsed.jsonl. With
/// `use_llm` statements come from the extraction prompt (through replayable
/// transcripts); otherwise one statement per sentence.
ParseSummary parse_run(const std::filesystem::path& run_dir, bool use_llm = false, const RuntimeHooks& hooks = {},
                       llm::TranscriptMode mode = llm::TranscriptMode::cache);

// ---- annotation tasks -----------------------------------------------------

struct TaskRequest {
    std::filesystem::path run_dir;
    std::filesystem::path gold; // JSONL: query_id, query_type, text, must_have
    std::optional<std::filesystem::path> store;
    double double_fraction = 0.1;
    std::uint64_t seed = 20240611;
    std::optional<std::string> relevance_config;
};

std::vector<annotation::GoldQuery> load_gold(const std::filesystem::path& path);

/// Builds relevance, selection, factuality and completeness tasks from the
/// run's parsed responses and the gold statements.
std::map<annotation::Stage, std::size_t> create_run_tasks(const TaskRequest& request);

// ---- evaluation and report ------------------------------------------------

struct EvalRequest {
    std::filesystem::path labels; // label file or directory of label files
    std::optional<std::filesystem::path> run_dir;
    std::optional<std::filesystem::path> out;
    metrics::EvalOptions options;
    bool lenient = false; // report schema violations instead of failing
};

struct EvalSummary {
    std::filesystem::path report_path;
    std::size_t metrics = 0;
    std::vector<metrics::SchemaViolation> violations;
    std::vector<std::string> missing;
};

/// Computes every metric the labels allow (plus filter P/R/F1 when the run
/// has filter verdicts) and writes the report JSON. Throws SchemaError on
/// label violations unless lenient.
EvalSummary evaluate_run(const EvalRequest& request);

struct ReportOutput {
    std::string text;
    Json summary;
};

/// Human-readable summary of reports/eval.json and reports/accuracy.json;
/// metric families without inputs appear as "missing". Also writes
/// reports/report.txt and reports/summary.json.
ReportOutput build_report(const std::filesystem::path& run_dir, bool color = false);

} // namespace ragprobe::app
