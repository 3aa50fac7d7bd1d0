#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "ragprobe/corpus/chunker.hpp"
#include "ragprobe/corpus/types.hpp"

namespace ragprobe::corpus {

struct IngestIssue {
    std::size_t line_number = 0;
    std::string doc_id; // empty when the line could not be parsed far enough
    std::string message;
};

struct IngestReport {
    CorpusManifest manifest;
    std::size_t documents_added = 0;
    std::vector<IngestIssue> issues;
};

struct IngestOptions {
    std::size_t max_chunk_chars = kDefaultMaxChunkChars;
    /// When set, any malformed line aborts the ingest instead of being reported and skipped.
    bool strict = false;
};

struct PassageLookup {
    std::vector<Passage> passages; // request order, found ids only
    std::vector<std::string> missing;
};

/// An on-disk passage store for one named corpus:
///   <root>/documents.jsonl   ingested documents (append-only)
///   <root>/passages.jsonl    chunked passages (append-only)
///   <root>/manifest.json     sidecar manifest, rewritten after each ingest
class CorpusStore {
public:
    /// Opens (creating if needed) the store rooted at `root`.
    CorpusStore(std::filesystem::path root, std::string corpus_name);

    static CorpusStore open_existing(const std::filesystem::path& root);

    /// Ingests a line-delimited document file. Records without a `source`
    /// field take `default_source`. Duplicate doc_ids (within the file or
    /// against the store) abort the whole ingest with a ConflictError naming
    /// the key and both line locations; nothing is written in that case.
    IngestReport ingest_documents(const std::filesystem::path& path, Source default_source,
                                  const IngestOptions& options = {});

    /// Strict mode throws NotFound listing every unknown id.
    PassageLookup get_passages(const std::vector<std::string>& ids, bool lenient = false) const;

    const std::vector<Passage>& passages() const { return passages_; }
    const std::vector<Document>& documents() const { return documents_; }
    const CorpusManifest& manifest() const { return manifest_; }
    const std::filesystem::path& root() const { return root_; }
    const std::string& name() const { return manifest_.corpus_name; }

    /// The stored documents, for round-trip checks and re-export.
    std::vector<Document> export_documents() const { return documents_; }

private:
    void load();
    void rebuild_manifest();

    std::filesystem::path root_;
    CorpusManifest manifest_;
    std::vector<Document> documents_;
    std::vector<Passage> passages_;
    std::unordered_map<std::string, std::size_t> doc_index_;
    std::unordered_map<std::string, std::size_t> passage_index_;
};

} // namespace ragprobe::corpus
