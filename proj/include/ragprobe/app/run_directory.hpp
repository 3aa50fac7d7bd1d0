#pragma once

#include <filesystem>
#include <string>

#include "ragprobe/app/experiment_config.hpp"
#include "ragprobe/common/jsonl.hpp"

namespace ragprobe::app {

inline constexpr int kSnapshotVersion = 1;

/// One experiment's artifacts, all addressed relative to the directory:
///   config.snapshot.json   written before anything else
///   items.jsonl / queries.jsonl, runs.jsonl, transcripts.jsonl, parsed.jsonl,
///   annotation.db, labels/, reports/
class RunDirectory {
public:
    /// Writes the snapshot, or verifies that an existing one is identical.
    /// Corpus paths are stored relative to the directory. Throws
    /// ConflictError when the directory belongs to a different experiment.
    static RunDirectory create(const std::filesystem::path& dir, const ExperimentConfig& config, const Json& inputs);
    /// Throws NotFound when there is no snapshot.
    static RunDirectory open(const std::filesystem::path& dir);

    const std::filesystem::path& path() const { return path_; }
    const std::string& digest() const { return digest_; }
    const ExperimentConfig& config() const { return config_; }
    const Json& inputs() const { return inputs_; }

    std::filesystem::path snapshot_file() const { return path_ / "config.snapshot.json"; }
    std::filesystem::path items_file() const { return path_ / "items.jsonl"; }
    std::filesystem::path queries_file() const { return path_ / "queries.jsonl"; }
    std::filesystem::path runs_file() const { return path_ / "runs.jsonl"; }
    std::filesystem::path transcripts_file() const { return path_ / "transcripts.jsonl"; }
    std::filesystem::path parsed_file() const { return path_ / "parsed.jsonl"; }
    std::filesystem::path annotation_db() const { return path_ / "annotation.db"; }
    std::filesystem::path labels_dir() const { return path_ / "labels"; }
    std::filesystem::path reports_dir() const { return path_ / "reports"; }

private:
    std::filesystem::path path_;
    std::string digest_;
    ExperimentConfig config_;
    Json inputs_;
};

} // namespace ragprobe::app
