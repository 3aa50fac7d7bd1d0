#include "ragprobe/retrieval/bm25.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ragprobe/common/error.hpp"
#include "ragprobe/common/jsonl.hpp"

namespace ragprobe::retrieval {

namespace {

constexpr int kFormatVersion = 1;

} // namespace

Bm25Index Bm25Index::build(std::span<const corpus::Passage> passages, Bm25Params params, Tokenizer tokenizer)
{
    if (passages.empty()) {
        throw InvalidArgument("cannot build a BM25 index from an empty passage stream");
    }
    if (!(params.k1 > 0.0) || params.b < 0.0 || params.b > 1.0) {
        throw InvalidArgument("BM25 parameters out of range (k1 > 0, 0 <= b <= 1)");
    }
    Bm25Index idx;
    idx.params_ = params;
    idx.tokenizer_ = std::move(tokenizer);
    idx.doc_lengths_.reserve(passages.size());
    idx.passage_ids_.reserve(passages.size());

    std::uint64_t total = 0;
    for (std::size_t ord = 0; ord < passages.size(); ++ord) {
        const auto tokens = idx.tokenizer_.tokenize(passages[ord].text);
        std::map<std::uint32_t, std::uint32_t> tf;
        for (const auto& t : tokens) {
            auto [it, inserted] = idx.vocabulary_.try_emplace(t, static_cast<std::uint32_t>(idx.postings_.size()));
            if (inserted) {
                idx.postings_.emplace_back();
            }
            ++tf[it->second];
        }
        // Ordinals are visited in increasing order, so each posting list stays sorted.
        for (auto [term, count] : tf) {
            idx.postings_[term].push_back(Posting{static_cast<std::uint32_t>(ord), count});
        }
        idx.doc_lengths_.push_back(static_cast<std::uint32_t>(tokens.size()));
        idx.passage_ids_.push_back(passages[ord].passage_id);
        total += tokens.size();
    }
    idx.avg_doc_length_ = static_cast<double>(total) / static_cast<double>(passages.size());
    return idx;
}

double Bm25Index::idf(std::size_t df) const
{
    const auto n = static_cast<double>(size());
    const auto d = static_cast<double>(df);
    return std::log((n - d + 0.5) / (d + 0.5) + 1.0);
}

std::size_t Bm25Index::document_frequency(const std::string& term) const
{
    auto it = vocabulary_.find(term);
    return it == vocabulary_.end() ? 0 : postings_[it->second].size();
}

std::vector<std::uint32_t> Bm25Index::unique_query_terms(std::string_view query) const
{
    std::vector<std::uint32_t> terms;
    for (const auto& t : tokenizer_.tokenize(query)) {
        if (auto it = vocabulary_.find(t); it != vocabulary_.end()) {
            terms.push_back(it->second);
        }
    }
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
    return terms;
}

SearchResult Bm25Index::search(std::string_view query, std::size_t k) const
{
    if (k == 0) {
        throw InvalidArgument("k must be >= 1");
    }
    SearchResult out;
    if (tokenizer_.tokenize(query).empty()) {
        out.status = SearchStatus::empty_query;
        return out;
    }
    // Length normalisation denominators are recomputed per posting; avg_doc_length may be 0
    // only when every passage is token-free, in which case nothing can match anyway.
    const double k1 = params_.k1;
    const double b = params_.b;
    std::vector<double> scores(size(), 0.0);
    std::vector<std::uint32_t> touched;
    for (auto term : unique_query_terms(query)) {
        const auto& plist = postings_[term];
        const double w = idf(plist.size());
        for (const auto& p : plist) {
            const double tf = p.tf;
            const double norm = k1 * (1.0 - b + b * static_cast<double>(doc_lengths_[p.ordinal]) / avg_doc_length_);
            if (scores[p.ordinal] == 0.0) {
                touched.push_back(p.ordinal);
            }
            scores[p.ordinal] += w * (tf * (k1 + 1.0)) / (tf + norm);
        }
    }
    auto better = [&](std::uint32_t a, std::uint32_t c) {
        if (scores[a] != scores[c]) {
            return scores[a] > scores[c];
        }
        return passage_ids_[a] < passage_ids_[c];
    };
    const std::size_t take = std::min(k, touched.size());
    std::partial_sort(touched.begin(), touched.begin() + static_cast<std::ptrdiff_t>(take), touched.end(), better);
    for (std::size_t i = 0; i < take; ++i) {
        out.hits.push_back(RetrievalHit{passage_ids_[touched[i]], scores[touched[i]], i + 1});
    }
    return out;
}

double Bm25Index::score(std::string_view query, std::uint32_t ordinal) const
{
    double s = 0.0;
    for (auto term : unique_query_terms(query)) {
        const auto& plist = postings_[term];
        auto it = std::lower_bound(plist.begin(), plist.end(), ordinal,
                                   [](const Posting& p, std::uint32_t o) { return p.ordinal < o; });
        if (it == plist.end() || it->ordinal != ordinal) {
            continue;
        }
        const double tf = it->tf;
        const double norm =
            params_.k1 * (1.0 - params_.b + params_.b * static_cast<double>(doc_lengths_[ordinal]) / avg_doc_length_);
        s += idf(plist.size()) * (tf * (params_.k1 + 1.0)) / (tf + norm);
    }
    return s;
}

void Bm25Index::save(const std::filesystem::path& path, const std::string& corpus_checksum) const
{
    Json j;
    j["format"] = "ragprobe.bm25_index";
    j["version"] = kFormatVersion;
    j["corpus_checksum"] = corpus_checksum;
    j["params"] = {{"k1", params_.k1}, {"b", params_.b}};
    j["stopwords"] = tokenizer_.stopwords();
    j["passage_ids"] = passage_ids_;
    j["doc_lengths"] = doc_lengths_;
    // Terms ordered by id so the postings array lines up.
    std::vector<std::string> terms(vocabulary_.size());
    for (const auto& [t, id] : vocabulary_) {
        terms[id] = t;
    }
    j["terms"] = terms;
    Json postings = Json::array();
    for (const auto& plist : postings_) {
        Json flat = Json::array();
        for (const auto& p : plist) {
            flat.push_back(p.ordinal);
            flat.push_back(p.tf);
        }
        postings.push_back(std::move(flat));
    }
    j["postings"] = std::move(postings);
    write_file_atomic(path, j.dump());
}

Bm25Index Bm25Index::load(const std::filesystem::path& path, const std::string& expected_checksum)
{
    auto j = Json::parse(read_file(path));
    if (j.value("format", std::string{}) != "ragprobe.bm25_index" || j.value("version", 0) != kFormatVersion) {
        throw SchemaError(path.string() + ": not a version " + std::to_string(kFormatVersion) + " BM25 index");
    }
    if (!expected_checksum.empty() && j.value("corpus_checksum", std::string{}) != expected_checksum) {
        throw ConflictError(path.string() + ": index was built from a different corpus state");
    }
    Bm25Index idx;
    idx.params_ = Bm25Params{j.at("params").at("k1").get<double>(), j.at("params").at("b").get<double>()};
    idx.tokenizer_ = Tokenizer(j.value("stopwords", std::set<std::string>{}));
    idx.passage_ids_ = j.at("passage_ids").get<std::vector<std::string>>();
    idx.doc_lengths_ = j.at("doc_lengths").get<std::vector<std::uint32_t>>();
    auto terms = j.at("terms").get<std::vector<std::string>>();
    for (std::uint32_t i = 0; i < terms.size(); ++i) {
        idx.vocabulary_[terms[i]] = i;
    }
    for (const auto& flat : j.at("postings")) {
        std::vector<Posting> plist;
        for (std::size_t i = 0; i + 1 < flat.size(); i += 2) {
            plist.push_back(Posting{flat[i].get<std::uint32_t>(), flat[i + 1].get<std::uint32_t>()});
        }
        idx.postings_.push_back(std::move(plist));
    }
    std::uint64_t total = 0;
    for (auto l : idx.doc_lengths_) {
        total += l;
    }
    idx.avg_doc_length_ =
        idx.doc_lengths_.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(idx.doc_lengths_.size());
    return idx;
}

} // namespace ragprobe::retrieval
