#include <map>

#include "ragprobe/app/commands.hpp"
#include "ragprobe/common/error.hpp"

namespace ragprobe::app {

IndexSummary index_corpus(const std::filesystem::path& corpus_dir, retrieval::RetrieverKind kind,
                          const retrieval::EmbeddingClient* embeddings)
{
    const auto store = corpus::CorpusStore::open_existing(corpus_dir);
    const auto& passages = store.passages();
    IndexSummary out{store.name(), {}, passages.size()};
    if (kind == retrieval::RetrieverKind::bm25) {
        out.path = bm25_index_path(corpus_dir);
        retrieval::Bm25Index::build(passages).save(out.path, store.manifest().checksum);
        return out;
    }
    if (!embeddings) throw ConfigError("dense indexing needs embedding endpoints");
    if (passages.empty()) throw InvalidArgument("corpus '" + store.name() + "' has no passages to embed");
    std::vector<std::string> texts;
    std::vector<std::string> ids;
    texts.reserve(passages.size());
    for (const auto& p : passages) {
        texts.push_back(p.title + "\n" + p.text);
        ids.push_back(p.passage_id);
    }
    auto rows = embeddings->embed(texts, retrieval::Encoder::article);
    out.path = dense_index_path(corpus_dir);
    retrieval::DenseIndex::from_rows(std::move(ids), rows, embeddings->endpoints())
        .save(out.path, store.manifest().checksum);
    return out;
}

SearchOutput search_corpora(const SearchRequest& request, const RuntimeHooks& hooks)
{
    if (request.corpus_dirs.empty()) throw InvalidArgument("search needs at least one corpus");
    if (request.k == 0) throw InvalidArgument("k must be >= 1");

    std::vector<corpus::CorpusStore> stores;
    for (const auto& dir : request.corpus_dirs) stores.push_back(corpus::CorpusStore::open_existing(dir));

    std::shared_ptr<HttpTransport> transport = hooks.transport;
    std::unique_ptr<retrieval::EmbeddingClient> embeddings;
    std::unique_ptr<retrieval::Retriever> retriever;
    if (request.kind == retrieval::RetrieverKind::bm25) {
        std::vector<retrieval::NamedBm25Index> indexes;
        for (const auto& s : stores) {
            const auto path = bm25_index_path(s.root());
            indexes.push_back({s.name(), std::filesystem::exists(path)
                                             ? retrieval::Bm25Index::load(path, s.manifest().checksum)
                                             : retrieval::Bm25Index::build(s.passages())});
        }
        retriever = std::make_unique<retrieval::Bm25Retriever>(std::move(indexes), request.merge);
    } else {
        std::vector<retrieval::NamedDenseIndex> indexes;
        for (const auto& s : stores) {
            const auto path = dense_index_path(s.root());
            if (!std::filesystem::exists(path))
                throw NotFound("corpus '" + s.name() + "' has no dense index; run 'ragprobe index --retriever dense'");
            indexes.push_back({s.name(), retrieval::DenseIndex::load(path, s.manifest().checksum)});
        }
        const auto endpoints = indexes.front().index.endpoints();
        if (endpoints.query_url.empty()) throw ConfigError("dense index carries no query encoder URL");
        if (!transport) transport = make_http_transport();
        retrieval::EmbeddingOptions eo;
        eo.api_key_env = request.api_key_env;
        embeddings = std::make_unique<retrieval::EmbeddingClient>(*transport, endpoints, eo);
        retriever = std::make_unique<retrieval::DenseRetriever>(*embeddings, std::move(indexes), request.merge);
    }

    SearchOutput out;
    out.result = retriever->search(request.query, request.k);
    std::map<std::string, const corpus::Passage*> by_id;
    for (const auto& s : stores)
        for (const auto& p : s.passages()) by_id.emplace(p.passage_id, &p);
    for (const auto& h : out.result.hits) {
        if (auto it = by_id.find(h.passage_id); it != by_id.end()) out.passages.push_back(*it->second);
    }
    return out;
}

} // namespace ragprobe::app
