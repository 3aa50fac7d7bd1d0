#include "ragprobe/corpus/store.hpp"

#include <fstream>

#include "ragprobe/common/digest.hpp"
#include "ragprobe/common/error.hpp"
#include "ragprobe/common/text.hpp"

namespace ragprobe::corpus {

namespace {

constexpr const char* kDocumentsFile = "documents.jsonl";
constexpr const char* kPassagesFile = "passages.jsonl";
constexpr const char* kManifestFile = "manifest.json";

} // namespace

CorpusStore::CorpusStore(std::filesystem::path root, std::string corpus_name) : root_(std::move(root))
{
    std::filesystem::create_directories(root_);
    manifest_.corpus_name = std::move(corpus_name);
    load();
}

CorpusStore CorpusStore::open_existing(const std::filesystem::path& root)
{
    auto manifest_path = root / kManifestFile;
    if (!std::filesystem::exists(manifest_path)) {
        throw NotFound("no corpus manifest at " + manifest_path.string());
    }
    auto m = manifest_from_json(Json::parse(read_file(manifest_path)));
    return CorpusStore(root, m.corpus_name);
}

void CorpusStore::load()
{
    auto manifest_path = root_ / kManifestFile;
    if (std::filesystem::exists(manifest_path)) {
        auto m = manifest_from_json(Json::parse(read_file(manifest_path)));
        manifest_.max_chunk_chars = m.max_chunk_chars;
    }
    if (std::filesystem::exists(root_ / kDocumentsFile)) {
        for (const auto& j : read_jsonl(root_ / kDocumentsFile)) {
            doc_index_[j.at("doc_id").get<std::string>()] = documents_.size();
            documents_.push_back(document_from_json(j));
        }
    }
    if (std::filesystem::exists(root_ / kPassagesFile)) {
        for (const auto& j : read_jsonl(root_ / kPassagesFile)) {
            auto p = passage_from_json(j);
            passage_index_[p.passage_id] = passages_.size();
            passages_.push_back(std::move(p));
        }
    }
    rebuild_manifest();
}

void CorpusStore::rebuild_manifest()
{
    manifest_.document_count = documents_.size();
    manifest_.passage_count = passages_.size();
    manifest_.source_histogram.clear();
    Sha256 h;
    for (const auto& p : passages_) {
        ++manifest_.source_histogram[std::string(to_string(p.source))];
        h.update(to_json(p).dump());
        h.update("\n");
    }
    manifest_.checksum = h.hex_digest();
}

IngestReport CorpusStore::ingest_documents(const std::filesystem::path& path, Source default_source,
                                           const IngestOptions& options)
{
    if (options.max_chunk_chars < kMinChunkChars) {
        throw InvalidArgument("max_chunk_chars must be >= " + std::to_string(kMinChunkChars));
    }
    IngestReport report;
    std::vector<Document> accepted;
    std::unordered_map<std::string, std::size_t> seen_line;

    auto reject = [&](std::size_t line, std::string doc_id, std::string message) {
        if (options.strict) {
            throw SchemaError(path.string() + ":" + std::to_string(line) + ": " + message);
        }
        report.issues.push_back(IngestIssue{line, std::move(doc_id), std::move(message)});
    };

    for_each_line(path, [&](const JsonlLine& line) {
        Json j;
        try {
            j = Json::parse(line.raw);
        } catch (const Json::parse_error&) {
            reject(line.line_number, "", "malformed record");
            return;
        }
        Document doc;
        try {
            if (j.is_object() && !j.contains("source")) {
                j["source"] = std::string(to_string(default_source));
            }
            doc = document_from_json(j);
        } catch (const SchemaError& e) {
            std::string id = j.is_object() && j.contains("doc_id") && j["doc_id"].is_string()
                                 ? j["doc_id"].get<std::string>()
                                 : std::string{};
            reject(line.line_number, id, e.what());
            return;
        } catch (const Json::exception& e) {
            reject(line.line_number, "", std::string("invalid field type: ") + e.what());
            return;
        }
        if (text::trim(doc.body).empty()) {
            reject(line.line_number, doc.doc_id, "record " + doc.doc_id + " missing body");
            return;
        }
        if (auto it = seen_line.find(doc.doc_id); it != seen_line.end()) {
            throw ConflictError("duplicate doc_id '" + doc.doc_id + "' at " + path.string() + " lines " +
                                std::to_string(it->second) + " and " + std::to_string(line.line_number));
        }
        if (doc_index_.contains(doc.doc_id)) {
            throw ConflictError("duplicate doc_id '" + doc.doc_id + "' at " + path.string() + " line " +
                                std::to_string(line.line_number) + " is already stored in corpus " +
                                manifest_.corpus_name);
        }
        seen_line[doc.doc_id] = line.line_number;
        accepted.push_back(std::move(doc));
    });

    std::string doc_lines;
    std::string passage_lines;
    for (auto& doc : accepted) {
        std::vector<Passage> chunks;
        if (doc.prechunked) {
            Passage p;
            p.passage_id = make_passage_id(doc.doc_id, 0);
            p.doc_id = doc.doc_id;
            p.title = doc.title;
            p.text = doc.body;
            p.source = doc.source;
            p.metadata = doc.metadata;
            chunks.push_back(std::move(p));
        } else {
            chunks = chunk_document(doc, options.max_chunk_chars);
        }
        doc_lines += to_json(doc).dump() + "\n";
        for (auto& p : chunks) {
            passage_lines += to_json(p).dump() + "\n";
            passage_index_[p.passage_id] = passages_.size();
            passages_.push_back(std::move(p));
        }
        doc_index_[doc.doc_id] = documents_.size();
        documents_.push_back(std::move(doc));
    }

    auto append = [&](const char* file, const std::string& data) {
        std::ofstream out(root_ / file, std::ios::binary | std::ios::app);
        if (!out) {
            throw IoError("cannot append to " + (root_ / file).string());
        }
        out << data;
    };
    append(kDocumentsFile, doc_lines);
    append(kPassagesFile, passage_lines);

    manifest_.max_chunk_chars = options.max_chunk_chars;
    rebuild_manifest();
    write_file_atomic(root_ / kManifestFile, to_json(manifest_).dump(2) + "\n");

    report.documents_added = accepted.size();
    report.manifest = manifest_;
    return report;
}

PassageLookup CorpusStore::get_passages(const std::vector<std::string>& ids, bool lenient) const
{
    PassageLookup out;
    for (const auto& id : ids) {
        if (auto it = passage_index_.find(id); it != passage_index_.end()) {
            out.passages.push_back(passages_[it->second]);
        } else {
            out.missing.push_back(id);
        }
    }
    if (!lenient && !out.missing.empty()) {
        throw NotFound("unknown passage id(s): " + text::join(out.missing, ", "));
    }
    return out;
}

} // namespace ragprobe::corpus
