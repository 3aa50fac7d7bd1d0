#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ragprobe/common/jsonl.hpp"
#include "ragprobe/retrieval/types.hpp"

namespace ragprobe::pipeline {

struct FilterVerdict {
    std::string passage_id;
    bool kept = false;
    std::string exchange_id;
    bool operator==(const FilterVerdict&) const = default;
};

struct StageError {
    std::string stage; // reformulate | retrieve | filter | generate | extract
    std::string message;
    bool operator==(const StageError&) const = default;
};

/// Everything one query produced under one configuration. Holds no
/// timestamps, so replaying the same transcripts reproduces it byte for byte.
struct RunRecord {
    std::string record_id;
    std::string query_id;
    std::string config_name;
    std::string config_digest;
    std::string snapshot_digest; // run directory snapshot; empty outside a run directory
    std::optional<std::string> rationale;
    std::string retrieval_query;
    std::vector<retrieval::RetrievalHit> retrieved;
    std::vector<FilterVerdict> filter_verdicts;
    std::vector<std::string> kept_after_filter;
    bool all_filtered = false;
    std::string prompt_kind; // response_rag | response_nonrag
    std::size_t context_passages = 0;
    std::string answer_text;
    std::string references_raw;
    std::vector<std::string> exchange_ids;
    std::optional<std::string> extracted_option;
    std::string extraction_rule;
    std::optional<bool> correct;
    std::optional<StageError> error;

    bool ok() const { return !error.has_value(); }
    bool operator==(const RunRecord&) const = default;
};

std::string make_record_id(const std::string& query_id, const std::string& config_digest);

OrderedJson to_json(const RunRecord& r);
RunRecord run_record_from_json(const Json& j);

/// Canonical one-line serialisation used for persistence and byte comparison.
std::string serialize(const RunRecord& r);

/// runs.jsonl of a run directory; the last record per id wins on load.
class RunStore {
public:
    explicit RunStore(std::filesystem::path path);

    std::optional<RunRecord> find(const std::string& record_id) const;
    std::optional<std::string> find_serialized(const std::string& record_id) const;
    /// Appends one line (a single write) and indexes it.
    void append(const RunRecord& r);
    std::vector<RunRecord> all() const; // file order, last record per id
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    mutable std::mutex mu_;
    std::vector<std::string> order_;
    std::map<std::string, std::string> lines_;
};

} // namespace ragprobe::pipeline
