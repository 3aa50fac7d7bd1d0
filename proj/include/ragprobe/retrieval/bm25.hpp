#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ragprobe/corpus/types.hpp"
#include "ragprobe/retrieval/tokenizer.hpp"
#include "ragprobe/retrieval/types.hpp"

namespace ragprobe::retrieval {

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

struct Posting {
    std::uint32_t ordinal = 0;
    std::uint32_t tf = 0;

    bool operator==(const Posting&) const = default;
};

/// Okapi BM25 inverted index. Immutable after build; concurrent searches are safe.
class Bm25Index {
public:
    static Bm25Index build(std::span<const corpus::Passage> passages, Bm25Params params = {},
                           Tokenizer tokenizer = {});

    /// IDF with a +1 floor so very common terms never score negatively:
    /// ln((N - df + 0.5) / (df + 0.5) + 1).
    double idf(std::size_t df) const;

    /// Top-k hits with nonzero score; ties broken by ascending passage_id.
    /// A query with no tokens yields an empty result with status empty_query.
    SearchResult search(std::string_view query, std::size_t k) const;

    /// BM25 score of a single ordinal (0 when no query term occurs).
    double score(std::string_view query, std::uint32_t ordinal) const;

    std::size_t size() const { return doc_lengths_.size(); }
    const Bm25Params& params() const { return params_; }
    double avg_doc_length() const { return avg_doc_length_; }
    const std::vector<std::uint32_t>& doc_lengths() const { return doc_lengths_; }
    const std::vector<std::string>& passage_ids() const { return passage_ids_; }
    const std::unordered_map<std::string, std::uint32_t>& vocabulary() const { return vocabulary_; }
    const std::vector<std::vector<Posting>>& postings() const { return postings_; }
    const Tokenizer& tokenizer() const { return tokenizer_; }

    /// Document frequency of a (normalised) term; 0 if absent.
    std::size_t document_frequency(const std::string& term) const;

    /// Record file: a JSON document carrying a format version and the corpus checksum.
    void save(const std::filesystem::path& path, const std::string& corpus_checksum) const;
    /// Throws SchemaError on version mismatch, or ConflictError when
    /// `expected_checksum` is non-empty and differs from the stored one.
    static Bm25Index load(const std::filesystem::path& path, const std::string& expected_checksum = {});

private:
    std::vector<std::uint32_t> unique_query_terms(std::string_view query) const;

    Bm25Params params_;
    Tokenizer tokenizer_;
    std::unordered_map<std::string, std::uint32_t> vocabulary_;
    std::vector<std::vector<Posting>> postings_;
    std::vector<std::uint32_t> doc_lengths_;
    double avg_doc_length_ = 0.0;
    std::vector<std::string> passage_ids_;
};

inline Bm25Index build_bm25_index(std::span<const corpus::Passage> passages, Bm25Params params = {})
{
    return Bm25Index::build(passages, params);
}

inline SearchResult search_bm25(const Bm25Index& index, std::string_view query, std::size_t k)
{
    return index.search(query, k);
}

} // namespace ragprobe::retrieval
