#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "ragprobe/common/jsonl.hpp"

namespace ragprobe::corpus {

enum class Source { pubmed, statpearls, wikipedia, textbook, guideline, other };

std::string_view to_string(Source s);
std::optional<Source> parse_source(std::string_view tag);

using Metadata = std::map<std::string, std::string>;

struct Document {
    std::string doc_id;
    std::string title;
    std::string body;
    Source source = Source::other;
    Metadata metadata;
    bool prechunked = false;

    bool operator==(const Document&) const = default;
};

/// The unit of retrieval and of relevance annotation.
struct Passage {
    std::string passage_id;
    std::string doc_id;
    std::uint32_t seq = 0;
    std::string title;
    std::string text;
    Source source = Source::other;
    Metadata metadata;

    bool operator==(const Passage&) const = default;
};

struct CorpusManifest {
    std::string corpus_name;
    std::size_t document_count = 0;
    std::size_t passage_count = 0;
    std::map<std::string, std::size_t> source_histogram;
    std::string checksum;
    std::size_t max_chunk_chars = 0;
};

std::string make_passage_id(std::string_view doc_id, std::uint32_t seq);

/// Compact one-line rendering used as the "Metadata:" field of RAG prompts.
std::string render_metadata(const Passage& p);

Json to_json(const Document& d);
Json to_json(const Passage& p);
Json to_json(const CorpusManifest& m);
Document document_from_json(const Json& j);
Passage passage_from_json(const Json& j);
CorpusManifest manifest_from_json(const Json& j);

} // namespace ragprobe::corpus
