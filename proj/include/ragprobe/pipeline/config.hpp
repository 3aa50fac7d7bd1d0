#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ragprobe/common/jsonl.hpp"
#include "ragprobe/retrieval/retriever.hpp"

namespace ragprobe::pipeline {

inline constexpr std::size_t kGridKs[] = {1, 2, 4, 8, 16, 32};

struct PipelineConfig {
    std::string name;
    bool use_retrieval = true;
    bool use_filtering = false;
    bool use_reformulation = false;
    std::size_t k = 16;
    retrieval::RetrieverKind retriever = retrieval::RetrieverKind::bm25;
    std::string response_profile = "primary";
    std::vector<std::string> corpora;
    /// Filter against the rationale instead of the original question.
    bool filter_on_rationale = false;
    std::optional<std::int64_t> seed;

    bool operator==(const PipelineConfig&) const = default;
};

/// Throws ConfigError naming the violated rule.
void validate(const PipelineConfig& c);

Json to_json(const PipelineConfig& c);
PipelineConfig config_from_json(const Json& j);

/// SHA-256 of the canonical JSON form; the name is not part of the digest.
std::string config_digest(const PipelineConfig& c);

/// "standard", "filter", "reformulate", "combined" or "no_rag", with "@k" appended when retrieving.
std::string default_name(const PipelineConfig& c);

/// The four retrieval configurations at every k, preceded by the non-RAG baseline.
std::vector<PipelineConfig> standard_grid(const std::vector<std::size_t>& ks, retrieval::RetrieverKind retriever,
                                          const std::string& response_profile = "primary",
                                          std::vector<std::string> corpora = {});

} // namespace ragprobe::pipeline
