#include "ragprobe/corpus/types.hpp"

#include <array>

#include "ragprobe/common/error.hpp"

namespace ragprobe::corpus {

namespace {

constexpr std::array<std::pair<Source, std::string_view>, 6> kSourceNames{{
    {Source::pubmed, "pubmed"},
    {Source::statpearls, "statpearls"},
    {Source::wikipedia, "wikipedia"},
    {Source::textbook, "textbook"},
    {Source::guideline, "guideline"},
    {Source::other, "other"},
}};

Metadata metadata_from_json(const Json& j)
{
    Metadata m;
    if (j.is_null()) {
        return m;
    }
    if (!j.is_object()) {
        throw SchemaError("metadata must be an object");
    }
    for (const auto& [k, v] : j.items()) {
        m[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
    return m;
}

} // namespace

std::string_view to_string(Source s)
{
    for (const auto& [src, name] : kSourceNames) {
        if (src == s) {
            return name;
        }
    }
    return "other";
}

std::optional<Source> parse_source(std::string_view tag)
{
    for (const auto& [src, name] : kSourceNames) {
        if (name == tag) {
            return src;
        }
    }
    return std::nullopt;
}

std::string make_passage_id(std::string_view doc_id, std::uint32_t seq)
{
    return std::string(doc_id) + "#" + std::to_string(seq);
}

std::string render_metadata(const Passage& p)
{
    std::string out = "title: " + p.title + "; source: " + std::string(to_string(p.source));
    for (const auto& [k, v] : p.metadata) {
        if (k == "title") {
            continue;
        }
        out += "; " + k + ": " + v;
    }
    return out;
}

Json to_json(const Document& d)
{
    Json j{{"doc_id", d.doc_id}, {"title", d.title}, {"body", d.body}, {"source", to_string(d.source)},
           {"metadata", d.metadata}};
    if (d.prechunked) {
        j["prechunked"] = true;
    }
    return j;
}

Json to_json(const Passage& p)
{
    return Json{{"passage_id", p.passage_id}, {"doc_id", p.doc_id}, {"seq", p.seq},
                {"title", p.title},           {"text", p.text},     {"source", to_string(p.source)},
                {"metadata", p.metadata}};
}

Json to_json(const CorpusManifest& m)
{
    return Json{{"corpus_name", m.corpus_name},         {"document_count", m.document_count},
                {"passage_count", m.passage_count},     {"source_histogram", m.source_histogram},
                {"checksum", m.checksum},               {"max_chunk_chars", m.max_chunk_chars}};
}

Document document_from_json(const Json& j)
{
    if (!j.is_object()) {
        throw SchemaError("document record must be an object");
    }
    Document d;
    if (!j.contains("doc_id") || !j["doc_id"].is_string() || j["doc_id"].get<std::string>().empty()) {
        throw SchemaError("record missing doc_id");
    }
    d.doc_id = j["doc_id"].get<std::string>();
    d.title = j.value("title", std::string{});
    if (!j.contains("body") || !j["body"].is_string()) {
        throw SchemaError("record " + d.doc_id + " missing body");
    }
    d.body = j["body"].get<std::string>();
    if (j.contains("source") && !j["source"].is_null()) {
        auto tag = j["source"].get<std::string>();
        auto src = parse_source(tag);
        if (!src) {
            throw SchemaError("record " + d.doc_id + " has unknown source '" + tag + "'");
        }
        d.source = *src;
    }
    d.metadata = metadata_from_json(j.value("metadata", Json()));
    d.prechunked = j.value("prechunked", false);
    return d;
}

Passage passage_from_json(const Json& j)
{
    Passage p;
    p.passage_id = j.at("passage_id").get<std::string>();
    p.doc_id = j.at("doc_id").get<std::string>();
    p.seq = j.at("seq").get<std::uint32_t>();
    p.title = j.value("title", std::string{});
    p.text = j.at("text").get<std::string>();
    auto src = parse_source(j.value("source", std::string("other")));
    p.source = src.value_or(Source::other);
    p.metadata = metadata_from_json(j.value("metadata", Json()));
    return p;
}

CorpusManifest manifest_from_json(const Json& j)
{
    CorpusManifest m;
    m.corpus_name = j.at("corpus_name").get<std::string>();
    m.document_count = j.at("document_count").get<std::size_t>();
    m.passage_count = j.at("passage_count").get<std::size_t>();
    m.source_histogram = j.value("source_histogram", std::map<std::string, std::size_t>{});
    m.checksum = j.value("checksum", std::string{});
    m.max_chunk_chars = j.value("max_chunk_chars", std::size_t{0});
    return m;
}

} // namespace ragprobe::corpus
