#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>

#include "ragprobe/app/experiment_config.hpp"
#include "ragprobe/common/http.hpp"
#include "ragprobe/corpus/store.hpp"
#include "ragprobe/llm/gateway.hpp"
#include "ragprobe/pipeline/pipeline.hpp"

namespace ragprobe::app {

using ChatClientFactory = std::function<std::unique_ptr<llm::ChatClient>(const llm::ChatEndpoint&)>;

/// Seams for tests: replace the chat endpoints, the embedding transport or the backoff sleep.
struct RuntimeHooks {
    ChatClientFactory chat;
    std::shared_ptr<HttpTransport> transport;
    std::function<void(std::chrono::milliseconds)> sleep;
};

/// Live objects behind one experiment: endpoints, gateways over a shared
/// transcript file, corpora and retrievers (loaded on first use).
class Runtime {
public:
    Runtime(ExperimentConfig config, const std::filesystem::path& transcripts, llm::TranscriptMode mode,
            RuntimeHooks hooks = {});
    ~Runtime();

    llm::Gateway& gateway() { return *gateway_; }
    llm::Gateway* filter_gateway() { return filter_gateway_.get(); }
    std::size_t network_calls() const;

    const retrieval::Retriever& retriever(const pipeline::PipelineConfig& config);
    std::vector<corpus::Passage> passages(const std::vector<std::string>& ids);
    pipeline::PassageResolver resolver();

    pipeline::Pipeline make_pipeline(const pipeline::PipelineConfig& config, const std::string& snapshot_digest);

private:
    void load_corpora();

    ExperimentConfig config_;
    RuntimeHooks hooks_;
    std::shared_ptr<HttpTransport> transport_;
    std::unique_ptr<llm::TranscriptStore> transcripts_;
    std::unique_ptr<llm::ChatClient> response_client_;
    std::unique_ptr<llm::ChatClient> filter_client_;
    std::unique_ptr<llm::Gateway> gateway_;
    std::unique_ptr<llm::Gateway> filter_gateway_;
    std::unique_ptr<retrieval::EmbeddingClient> embeddings_;

    std::mutex mu_;
    bool corpora_loaded_ = false;
    std::vector<corpus::CorpusStore> stores_;
    std::map<std::string, const corpus::Passage*> passage_index_;
    std::map<std::string, std::unique_ptr<retrieval::Retriever>> retrievers_;
};

/// Index file names inside a corpus directory.
std::filesystem::path bm25_index_path(const std::filesystem::path& corpus_dir);
std::filesystem::path dense_index_path(const std::filesystem::path& corpus_dir);

} // namespace ragprobe::app
