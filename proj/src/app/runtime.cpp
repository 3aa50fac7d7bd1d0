#include "ragprobe/app/runtime.hpp"

#include <algorithm>

#include "ragprobe/common/error.hpp"

namespace ragprobe::app {
namespace {

llm::GatewayOptions gateway_options(const GatewaySettings& s, const RuntimeHooks& hooks)
{
    llm::GatewayOptions o;
    o.max_attempts = s.max_attempts;
    o.transport_retry_cap = s.transport_retry_cap;
    o.max_in_flight = s.max_in_flight;
    o.backoff_base = std::chrono::milliseconds(s.backoff_base_ms);
    o.backoff_max = std::chrono::milliseconds(s.backoff_max_ms);
    if (hooks.sleep) o.sleep = hooks.sleep;
    return o;
}

} // namespace

std::filesystem::path bm25_index_path(const std::filesystem::path& corpus_dir) { return corpus_dir / "bm25.index.json"; }
std::filesystem::path dense_index_path(const std::filesystem::path& corpus_dir) { return corpus_dir / "dense.index.json"; }

Runtime::Runtime(ExperimentConfig config, const std::filesystem::path& transcripts, llm::TranscriptMode mode,
                 RuntimeHooks hooks)
    : config_(std::move(config)), hooks_(std::move(hooks))
{
    transport_ = hooks_.transport;
    if (!transport_) transport_ = make_http_transport();
    ChatClientFactory factory = hooks_.chat;
    if (!factory) {
        factory = [this](const llm::ChatEndpoint& e) -> std::unique_ptr<llm::ChatClient> {
            return std::make_unique<llm::HttpChatClient>(*transport_, e);
        };
    }
    transcripts_ = std::make_unique<llm::TranscriptStore>(transcripts, mode);
    response_client_ = factory(config_.response);
    gateway_ = std::make_unique<llm::Gateway>(*response_client_, *transcripts_, config_.response.model,
                                              gateway_options(config_.gateway, hooks_));
    if (config_.filter) {
        filter_client_ = factory(*config_.filter);
        filter_gateway_ = std::make_unique<llm::Gateway>(*filter_client_, *transcripts_, config_.filter->model,
                                                         gateway_options(config_.gateway, hooks_));
    }
    if (config_.embedding) {
        retrieval::EmbeddingOptions eo;
        eo.api_key_env = config_.embedding->api_key_env;
        embeddings_ = std::make_unique<retrieval::EmbeddingClient>(*transport_, config_.embedding->endpoints, eo);
    }
}

Runtime::~Runtime() = default;

std::size_t Runtime::network_calls() const
{
    return gateway_->network_calls() + (filter_gateway_ ? filter_gateway_->network_calls() : 0);
}

void Runtime::load_corpora()
{
    if (corpora_loaded_) return;
    if (config_.corpora.empty()) throw ConfigError("a retrieval configuration needs at least one corpus in 'corpora'");
    for (const auto& ref : config_.corpora) {
        stores_.push_back(corpus::CorpusStore::open_existing(config_.corpus_path(ref)));
    }
    for (const auto& store : stores_)
        for (const auto& p : store.passages()) passage_index_.emplace(p.passage_id, &p);
    corpora_loaded_ = true;
}

const retrieval::Retriever& Runtime::retriever(const pipeline::PipelineConfig& pc)
{
    std::lock_guard lock(mu_);
    load_corpora();
    std::vector<std::size_t> chosen;
    for (std::size_t i = 0; i < config_.corpora.size(); ++i) {
        const bool wanted = pc.corpora.empty() ||
                            std::find(pc.corpora.begin(), pc.corpora.end(), config_.corpora[i].name) != pc.corpora.end();
        if (wanted) chosen.push_back(i);
    }
    std::string key(retrieval::to_string(pc.retriever));
    for (auto i : chosen) key += "|" + config_.corpora[i].name;
    if (auto it = retrievers_.find(key); it != retrievers_.end()) return *it->second;

    std::unique_ptr<retrieval::Retriever> r;
    if (pc.retriever == retrieval::RetrieverKind::bm25) {
        std::vector<retrieval::NamedBm25Index> indexes;
        for (auto i : chosen) {
            const auto& store = stores_[i];
            const auto path = bm25_index_path(store.root());
            indexes.push_back({config_.corpora[i].name,
                               std::filesystem::exists(path)
                                   ? retrieval::Bm25Index::load(path, store.manifest().checksum)
                                   : retrieval::Bm25Index::build(store.passages())});
        }
        r = std::make_unique<retrieval::Bm25Retriever>(std::move(indexes), config_.merge);
    } else {
        if (!embeddings_) throw ConfigError("dense retrieval needs endpoints.embedding in the config");
        std::vector<retrieval::NamedDenseIndex> indexes;
        for (auto i : chosen) {
            const auto path = dense_index_path(stores_[i].root());
            if (!std::filesystem::exists(path))
                throw NotFound("corpus '" + config_.corpora[i].name + "' has no dense index; run 'ragprobe index --dense'");
            indexes.push_back({config_.corpora[i].name,
                               retrieval::DenseIndex::load(path, stores_[i].manifest().checksum)});
        }
        r = std::make_unique<retrieval::DenseRetriever>(*embeddings_, std::move(indexes), config_.merge);
    }
    return *retrievers_.emplace(key, std::move(r)).first->second;
}

std::vector<corpus::Passage> Runtime::passages(const std::vector<std::string>& ids)
{
    std::lock_guard lock(mu_);
    load_corpora();
    std::vector<corpus::Passage> out;
    out.reserve(ids.size());
    for (const auto& id : ids) {
        auto it = passage_index_.find(id);
        if (it == passage_index_.end()) throw NotFound("unknown passage '" + id + "'");
        out.push_back(*it->second);
    }
    return out;
}

pipeline::PassageResolver Runtime::resolver()
{
    return [this](const std::vector<std::string>& ids) { return passages(ids); };
}

pipeline::Pipeline Runtime::make_pipeline(const pipeline::PipelineConfig& pc, const std::string& snapshot_digest)
{
    pipeline::PipelineDeps deps{*gateway_, filter_gateway_.get(), nullptr, {}, snapshot_digest};
    if (pc.use_retrieval) {
        deps.retriever = &retriever(pc);
        deps.passages = resolver();
    }
    return pipeline::Pipeline(pc, std::move(deps));
}

} // namespace ragprobe::app
