#include "ragprobe/retrieval/retriever.hpp"

#include "ragprobe/common/error.hpp"

namespace ragprobe::retrieval {

std::string_view to_string(RetrieverKind k)
{
    return k == RetrieverKind::bm25 ? "bm25" : "dense";
}

RetrieverKind parse_retriever_kind(std::string_view s)
{
    if (s == "bm25") {
        return RetrieverKind::bm25;
    }
    if (s == "dense") {
        return RetrieverKind::dense;
    }
    throw InvalidArgument("unknown retriever '" + std::string(s) + "' (expected bm25 or dense)");
}

namespace {

std::vector<RetrievalHit> combine(std::vector<std::vector<RetrievalHit>>& lists, std::size_t k, MergeMode mode)
{
    if (lists.size() == 1) {
        return std::move(lists.front());
    }
    return mode == MergeMode::global ? merge_topk(lists, k) : concat_per_source(lists, k);
}

} // namespace

Bm25Retriever::Bm25Retriever(std::vector<NamedBm25Index> indexes, MergeMode mode)
    : indexes_(std::move(indexes)), mode_(mode)
{
    if (indexes_.empty()) {
        throw InvalidArgument("BM25 retriever needs at least one index");
    }
}

SearchResult Bm25Retriever::search(std::string_view query, std::size_t k) const
{
    std::vector<std::vector<RetrievalHit>> lists;
    SearchResult out;
    for (const auto& named : indexes_) {
        auto r = named.index.search(query, k);
        if (r.status == SearchStatus::empty_query) {
            out.status = SearchStatus::empty_query;
        }
        lists.push_back(std::move(r.hits));
    }
    out.hits = combine(lists, k, mode_);
    return out;
}

DenseRetriever::DenseRetriever(const EmbeddingClient& client, std::vector<NamedDenseIndex> indexes, MergeMode mode)
    : client_(client), indexes_(std::move(indexes)), mode_(mode)
{
    if (indexes_.empty()) {
        throw InvalidArgument("dense retriever needs at least one index");
    }
}

SearchResult DenseRetriever::search(std::string_view query, std::size_t k) const
{
    std::vector<std::string> texts{std::string(query)};
    auto vecs = client_.embed(texts, Encoder::query);
    Eigen::Map<const DenseIndex::Vector> q(vecs.front().data(), static_cast<Eigen::Index>(vecs.front().size()));
    std::vector<std::vector<RetrievalHit>> lists;
    for (const auto& named : indexes_) {
        lists.push_back(named.index.search(q, k).hits);
    }
    SearchResult out;
    out.hits = combine(lists, k, mode_);
    return out;
}

} // namespace ragprobe::retrieval
