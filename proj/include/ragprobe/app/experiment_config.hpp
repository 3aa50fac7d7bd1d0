#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ragprobe/common/jsonl.hpp"
#include "ragprobe/llm/chat_client.hpp"
#include "ragprobe/pipeline/config.hpp"
#include "ragprobe/retrieval/retriever.hpp"

namespace ragprobe::app {

inline constexpr int kConfigVersion = 1;

struct GatewaySettings {
    std::size_t max_attempts = 3;
    std::size_t transport_retry_cap = 5;
    std::size_t max_in_flight = 8;
    std::int64_t backoff_base_ms = 500;
    std::int64_t backoff_max_ms = 30000;
};

struct EmbeddingSettings {
    retrieval::EncoderEndpoints endpoints;
    std::string api_key_env;
};

struct CorpusRef {
    std::string name;
    std::string path; // relative paths resolve against ExperimentConfig::base_dir
};

struct GridSettings {
    std::vector<std::size_t> ks{1, 2, 4, 8, 16, 32};
    retrieval::RetrieverKind retriever = retrieval::RetrieverKind::bm25;
    std::string response_profile = "primary";
    std::optional<std::int64_t> seed;
    std::vector<std::string> corpora; // empty: every configured corpus
};

struct BenchmarkSettings {
    std::size_t limit = 500;
    std::uint64_t seed = 20240611;
    std::size_t bootstrap_replicates = 10000;
    std::size_t parallelism = 1;
};

/// The versioned experiment file (see schemas/config.schema.json).
struct ExperimentConfig {
    int version = kConfigVersion;
    llm::ChatEndpoint response;
    std::optional<llm::ChatEndpoint> filter;
    std::optional<EmbeddingSettings> embedding;
    std::vector<CorpusRef> corpora;
    retrieval::MergeMode merge = retrieval::MergeMode::global;
    GatewaySettings gateway;
    std::optional<GridSettings> grid;
    std::vector<pipeline::PipelineConfig> pipelines;
    BenchmarkSettings benchmark;
    std::filesystem::path base_dir;

    std::filesystem::path corpus_path(const CorpusRef& c) const;
};

/// Throws ConfigError naming the offending field; unknown fields are errors.
ExperimentConfig parse_experiment_config(const Json& j, std::filesystem::path base_dir);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Canonical form; base_dir is not part of it.
Json to_json(const ExperimentConfig& c);

/// The grid section expanded (baseline first), or the explicit pipelines list.
/// Throws ConfigError when the requested section is absent.
std::vector<pipeline::PipelineConfig> experiment_pipelines(const ExperimentConfig& c, bool use_grid);

} // namespace ragprobe::app
