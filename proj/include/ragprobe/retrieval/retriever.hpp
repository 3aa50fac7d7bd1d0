#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "ragprobe/retrieval/bm25.hpp"
#include "ragprobe/retrieval/dense.hpp"
#include "ragprobe/retrieval/embedding_client.hpp"
#include "ragprobe/retrieval/merge.hpp"

namespace ragprobe::retrieval {

enum class RetrieverKind { bm25, dense };

std::string_view to_string(RetrieverKind k);
RetrieverKind parse_retriever_kind(std::string_view s);

enum class MergeMode { global, per_source };

/// Ranks passages for a query across one or more corpora.
class Retriever {
public:
    virtual ~Retriever() = default;
    virtual SearchResult search(std::string_view query, std::size_t k) const = 0;
};

struct NamedBm25Index {
    std::string corpus;
    Bm25Index index;
};

class Bm25Retriever final : public Retriever {
public:
    explicit Bm25Retriever(std::vector<NamedBm25Index> indexes, MergeMode mode = MergeMode::global);
    SearchResult search(std::string_view query, std::size_t k) const override;

private:
    std::vector<NamedBm25Index> indexes_;
    MergeMode mode_;
};

struct NamedDenseIndex {
    std::string corpus;
    DenseIndex index;
};

class DenseRetriever final : public Retriever {
public:
    DenseRetriever(const EmbeddingClient& client, std::vector<NamedDenseIndex> indexes,
                   MergeMode mode = MergeMode::global);
    SearchResult search(std::string_view query, std::size_t k) const override;

private:
    const EmbeddingClient& client_;
    std::vector<NamedDenseIndex> indexes_;
    MergeMode mode_;
};

} // namespace ragprobe::retrieval
