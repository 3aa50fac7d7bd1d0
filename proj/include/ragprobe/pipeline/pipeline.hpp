#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ragprobe/corpus/types.hpp"
#include "ragprobe/llm/gateway.hpp"
#include "ragprobe/llm/templates.hpp"
#include "ragprobe/pipeline/benchmark_item.hpp"
#include "ragprobe/pipeline/config.hpp"
#include "ragprobe/pipeline/option_extraction.hpp"
#include "ragprobe/pipeline/run_record.hpp"
#include "ragprobe/retrieval/retriever.hpp"

namespace ragprobe::pipeline {

/// Resolves passage ids to passages, in request order. Throws NotFound for unknown ids.
using PassageResolver = std::function<std::vector<corpus::Passage>(const std::vector<std::string>&)>;

struct PipelineDeps {
    llm::Gateway& gateway;                       // reformulation and generation
    llm::Gateway* filter_gateway = nullptr;      // evidence filter; defaults to `gateway`
    const retrieval::Retriever* retriever = nullptr;
    PassageResolver passages;
    std::string snapshot_digest; // copied into every record
};

struct FilterOutcome {
    std::vector<FilterVerdict> verdicts;
    std::vector<std::string> kept; // order-preserving subset of the hits
    bool all_filtered = false;
};

struct GeneratedAnswer {
    std::string answer_text;
    std::string references_raw;
    std::string prompt;
    llm::TemplateKind prompt_kind = llm::TemplateKind::response_nonrag;
    std::vector<std::string> exchange_ids;
    std::size_t last_attempt = 1;
};

class Pipeline {
public:
    /// Validates the config; retrieval configs need a retriever and a resolver.
    Pipeline(PipelineConfig config, PipelineDeps deps);

    const PipelineConfig& config() const { return config_; }

    /// The model's step-by-step rationale, used verbatim as the retrieval query.
    std::string reformulate_query(const std::string& question, std::string* exchange_id = nullptr);

    /// One yes/no verdict per hit. Throws InvalidArgument for an empty hit list.
    FilterOutcome filter_passages(const std::string& question, const std::vector<retrieval::RetrievalHit>& hits);

    /// Renders the RAG prompt when `context` is non-empty, else the non-RAG prompt.
    GeneratedAnswer generate_answer(const Query& query, const std::vector<corpus::Passage>& context);

    /// reformulate -> retrieve -> filter -> generate (-> extract). Stage
    /// failures are recorded in the returned record rather than thrown.
    RunRecord run(const Query& query);

private:
    llm::SamplingParams response_params() const;

    PipelineConfig config_;
    PipelineDeps deps_;
    std::string digest_;
};

} // namespace ragprobe::pipeline
