#include "ragprobe/pipeline/run_record.hpp"

#include <fstream>

#include "ragprobe/common/digest.hpp"
#include "ragprobe/common/error.hpp"

namespace ragprobe::pipeline {

std::string make_record_id(const std::string& query_id, const std::string& config_digest)
{
    return sha256_hex(query_id + '\n' + config_digest).substr(0, 24);
}

OrderedJson to_json(const RunRecord& r)
{
    OrderedJson j;
    j["record_id"] = r.record_id;
    j["query_id"] = r.query_id;
    j["config_name"] = r.config_name;
    j["config_digest"] = r.config_digest;
    j["snapshot_digest"] = r.snapshot_digest;
    j["rationale"] = r.rationale ? OrderedJson(*r.rationale) : OrderedJson(nullptr);
    j["retrieval_query"] = r.retrieval_query;
    OrderedJson hits = OrderedJson::array();
    for (const auto& h : r.retrieved)
        hits.push_back(OrderedJson{{"passage_id", h.passage_id}, {"score", h.score}, {"rank", h.rank}});
    j["retrieved"] = std::move(hits);
    OrderedJson verdicts = OrderedJson::array();
    for (const auto& v : r.filter_verdicts)
        verdicts.push_back(OrderedJson{{"passage_id", v.passage_id}, {"kept", v.kept}, {"exchange_id", v.exchange_id}});
    j["filter_verdicts"] = std::move(verdicts);
    j["kept_after_filter"] = r.kept_after_filter;
    j["all_filtered"] = r.all_filtered;
    j["prompt_kind"] = r.prompt_kind;
    j["context_passages"] = r.context_passages;
    j["answer_text"] = r.answer_text;
    j["references_raw"] = r.references_raw;
    j["exchange_ids"] = r.exchange_ids;
    j["extracted_option"] = r.extracted_option ? OrderedJson(*r.extracted_option) : OrderedJson(nullptr);
    j["extraction_rule"] = r.extraction_rule;
    j["correct"] = r.correct ? OrderedJson(*r.correct) : OrderedJson(nullptr);
    if (r.error)
        j["error"] = OrderedJson{{"stage", r.error->stage}, {"message", r.error->message}};
    else
        j["error"] = nullptr;
    return j;
}

RunRecord run_record_from_json(const Json& j)
{
    RunRecord r;
    try {
        r.record_id = j.at("record_id").get<std::string>();
        r.query_id = j.at("query_id").get<std::string>();
        r.config_name = j.at("config_name").get<std::string>();
        r.config_digest = j.at("config_digest").get<std::string>();
        r.snapshot_digest = j.value("snapshot_digest", std::string());
        if (!j.at("rationale").is_null()) r.rationale = j.at("rationale").get<std::string>();
        r.retrieval_query = j.at("retrieval_query").get<std::string>();
        for (const auto& h : j.at("retrieved"))
            r.retrieved.push_back({h.at("passage_id").get<std::string>(), h.at("score").get<double>(),
                                   h.at("rank").get<std::size_t>()});
        for (const auto& v : j.at("filter_verdicts"))
            r.filter_verdicts.push_back({v.at("passage_id").get<std::string>(), v.at("kept").get<bool>(),
                                         v.at("exchange_id").get<std::string>()});
        r.kept_after_filter = j.at("kept_after_filter").get<std::vector<std::string>>();
        r.all_filtered = j.at("all_filtered").get<bool>();
        r.prompt_kind = j.at("prompt_kind").get<std::string>();
        r.context_passages = j.at("context_passages").get<std::size_t>();
        r.answer_text = j.at("answer_text").get<std::string>();
        r.references_raw = j.at("references_raw").get<std::string>();
        r.exchange_ids = j.at("exchange_ids").get<std::vector<std::string>>();
        if (!j.at("extracted_option").is_null()) r.extracted_option = j.at("extracted_option").get<std::string>();
        r.extraction_rule = j.at("extraction_rule").get<std::string>();
        if (!j.at("correct").is_null()) r.correct = j.at("correct").get<bool>();
        if (!j.at("error").is_null())
            r.error = StageError{j.at("error").at("stage").get<std::string>(),
                                 j.at("error").at("message").get<std::string>()};
    } catch (const Json::exception& e) {
        throw SchemaError(std::string("run record: ") + e.what());
    }
    return r;
}

std::string serialize(const RunRecord& r) { return to_json(r).dump(); }

RunStore::RunStore(std::filesystem::path path) : path_(std::move(path))
{
    if (!std::filesystem::exists(path_)) return;
    for_each_line(path_, [&](const JsonlLine& line) {
        Json j = Json::parse(line.raw, nullptr, false);
        if (j.is_discarded())
            throw SchemaError(path_.string() + ":" + std::to_string(line.line_number) + ": malformed JSON");
        RunRecord r = run_record_from_json(j);
        if (!lines_.contains(r.record_id)) order_.push_back(r.record_id);
        lines_[r.record_id] = serialize(r);
    });
}

std::optional<RunRecord> RunStore::find(const std::string& record_id) const
{
    auto line = find_serialized(record_id);
    if (!line) return std::nullopt;
    return run_record_from_json(Json::parse(*line));
}

std::optional<std::string> RunStore::find_serialized(const std::string& record_id) const
{
    std::lock_guard lock(mu_);
    auto it = lines_.find(record_id);
    if (it == lines_.end()) return std::nullopt;
    return it->second;
}

void RunStore::append(const RunRecord& r)
{
    std::string line = serialize(r);
    std::lock_guard lock(mu_);
    if (!path_.empty()) {
        if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
        std::ofstream out(path_, std::ios::app | std::ios::binary);
        if (!out) throw IoError("cannot append to " + path_.string());
        out.write((line + '\n').data(), static_cast<std::streamsize>(line.size() + 1));
        out.flush();
        if (!out) throw IoError("write failed on " + path_.string());
    }
    if (!lines_.contains(r.record_id)) order_.push_back(r.record_id);
    lines_[r.record_id] = std::move(line);
}

std::vector<RunRecord> RunStore::all() const
{
    std::lock_guard lock(mu_);
    std::vector<RunRecord> out;
    out.reserve(order_.size());
    for (const auto& id : order_) out.push_back(run_record_from_json(Json::parse(lines_.at(id))));
    return out;
}

} // namespace ragprobe::pipeline
