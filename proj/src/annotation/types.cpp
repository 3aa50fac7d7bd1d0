#include "ragprobe/annotation/types.hpp"

#include <algorithm>

#include "ragprobe/common/digest.hpp"
#include "ragprobe/common/error.hpp"

namespace ragprobe::annotation {
namespace {

Json passages_json(const std::vector<PassageView>& passages)
{
    Json out = Json::array();
    for (const auto& p : passages)
        out.push_back(Json{{"passage_id", p.passage_id},
                           {"rank", p.rank},
                           {"title", p.title},
                           {"text", p.text},
                           {"metadata", p.metadata}});
    return out;
}

Json statements_json(const std::vector<StatementView>& statements)
{
    Json out = Json::array();
    for (const auto& s : statements)
        out.push_back(Json{{"statement_id", s.statement_id}, {"text", s.text}, {"citations", s.citations}});
    return out;
}

std::string relevance_key(const std::string& passage_id, const std::string& statement_id)
{
    return "passage '" + passage_id + "' x statement '" + statement_id + "'";
}

std::string selection_key(int ordinal) { return "reference [" + std::to_string(ordinal) + "]"; }

std::string statement_key(const std::string& statement_id) { return "statement '" + statement_id + "'"; }

// Items of a task in payload order, each with the fields a label must carry.
std::vector<std::string> item_keys(const AnnotationTask& task)
{
    std::vector<std::string> keys;
    const Json& p = task.payload;
    switch (task.stage) {
    case Stage::relevance:
        for (const auto& passage : p.at("passages"))
            for (const auto& s : p.at("statements"))
                keys.push_back(relevance_key(passage.at("passage_id"), s.at("statement_id")));
        break;
    case Stage::selection:
        for (const auto& r : p.at("references")) keys.push_back(selection_key(r.at("ordinal").get<int>()));
        break;
    case Stage::factuality:
    case Stage::completeness:
        for (const auto& s : p.at("statements")) keys.push_back(statement_key(s.at("statement_id")));
        break;
    }
    return keys;
}

template <class T>
T field(const Json& label, const char* name, std::size_t index)
{
    if (!label.contains(name))
        throw InvalidArgument("label " + std::to_string(index) + " has no '" + name + "' field");
    try {
        return label.at(name).get<T>();
    } catch (const Json::exception&) {
        throw InvalidArgument("label " + std::to_string(index) + " has a malformed '" + name + "' field");
    }
}

metrics::SupportLevel level_field(const Json& label, std::size_t index)
{
    const auto raw = field<std::string>(label, "level", index);
    try {
        return metrics::parse_support_level(raw);
    } catch (const Error&) {
        throw InvalidArgument("label " + std::to_string(index) + " has level '" + raw +
                              "', expected full, partial or none");
    }
}

} // namespace

std::string_view to_string(TaskStatus s)
{
    switch (s) {
    case TaskStatus::open: return "open";
    case TaskStatus::claimed: return "claimed";
    case TaskStatus::submitted: return "submitted";
    case TaskStatus::adjudication: return "adjudication";
    }
    return "open";
}

TaskStatus parse_task_status(std::string_view s)
{
    for (auto v : {TaskStatus::open, TaskStatus::claimed, TaskStatus::submitted, TaskStatus::adjudication})
        if (to_string(v) == s) return v;
    throw SchemaError("unknown task status '" + std::string(s) + "'");
}

std::string_view to_string(ClaimState s)
{
    switch (s) {
    case ClaimState::active: return "active";
    case ClaimState::submitted: return "submitted";
    case ClaimState::expired: return "expired";
    }
    return "active";
}

ClaimState parse_claim_state(std::string_view s)
{
    for (auto v : {ClaimState::active, ClaimState::submitted, ClaimState::expired})
        if (to_string(v) == s) return v;
    throw SchemaError("unknown claim state '" + std::string(s) + "'");
}

Json to_json(const AnnotationTask& t)
{
    Json claims = Json::array();
    for (const auto& c : t.claims)
        claims.push_back(
            Json{{"annotator_id", c.annotator_id}, {"claimed_at", c.claimed_at}, {"state", to_string(c.state)}});
    return Json{{"task_id", t.task_id},
                {"stage", metrics::to_string(t.stage)},
                {"status", to_string(t.status)},
                {"required_annotations", t.required_annotations},
                {"item_count", t.item_count},
                {"claims", claims},
                {"payload", t.payload}};
}

Json to_json(const AnnotatorProfile& p)
{
    Json stages = Json::array();
    for (Stage s : p.stages) stages.push_back(metrics::to_string(s));
    return Json{{"annotator_id", p.annotator_id},
                {"display_name", p.display_name},
                {"stages", stages},
                {"adjudicator", p.adjudicator}};
}

AnnotatorProfile annotator_from_json(const Json& j)
{
    AnnotatorProfile p;
    try {
        p.annotator_id = j.at("annotator_id").get<std::string>();
        p.display_name = j.value("display_name", p.annotator_id);
        for (const auto& s : j.at("stages")) p.stages.insert(metrics::parse_stage(s.get<std::string>()));
        p.adjudicator = j.value("adjudicator", false);
    } catch (const Json::exception& e) {
        throw SchemaError(std::string("annotator profile: ") + e.what());
    }
    if (p.annotator_id.empty()) throw SchemaError("annotator profile without annotator_id");
    return p;
}

Json to_json(const SubmissionReceipt& r)
{
    return Json{{"task_id", r.task_id},
                {"annotator_id", r.annotator_id},
                {"role", metrics::to_string(r.role)},
                {"label_count", r.label_count},
                {"task_status", to_string(r.task_status)},
                {"agreement_pair_complete", r.agreement_pair_complete}};
}

std::string make_task_id(Stage stage, std::string_view query_id, std::string_view model_id)
{
    const std::string key = std::string(metrics::to_string(stage)) + '\n' + std::string(query_id) + '\n' +
                            std::string(model_id);
    return std::string(metrics::to_string(stage)) + "-" + sha256_hex(key).substr(0, 16);
}

std::vector<TaskSpec> build_task_specs(const TaskSource& source)
{
    std::map<std::string, const GoldQuery*> queries;
    for (const auto& q : source.queries) {
        if (!queries.emplace(q.query_id, &q).second) throw InvalidArgument("duplicate query '" + q.query_id + "'");
    }
    std::vector<TaskSpec> specs;
    for (const auto& q : source.queries) {
        if (q.must_have.empty()) continue;
        auto it = source.retrieved.find(q.query_id);
        if (it == source.retrieved.end())
            throw NotFound("query '" + q.query_id + "' has no retrieved passages for a relevance task");
        TaskSpec t;
        t.stage = Stage::relevance;
        t.task_id = make_task_id(t.stage, q.query_id, "");
        t.payload = Json{{"query_id", q.query_id},
                         {"query_type", q.query_type},
                         {"query", q.text},
                         {"passages", passages_json(it->second)},
                         {"statements", statements_json(q.must_have)}};
        t.item_count = it->second.size() * q.must_have.size();
        specs.push_back(std::move(t));
    }
    for (const auto& r : source.responses) {
        auto q = queries.find(r.query_id);
        if (q == queries.end())
            throw NotFound("response of model '" + r.model_id + "' names unknown query '" + r.query_id + "'");
        const Json base{{"query_id", r.query_id},
                        {"query", q->second->text},
                        {"model_id", r.model_id},
                        {"response", r.response_text}};
        if (r.rag && !r.references.empty()) {
            TaskSpec t;
            t.stage = Stage::selection;
            t.task_id = make_task_id(t.stage, r.query_id, r.model_id);
            t.payload = base;
            Json refs = Json::array();
            for (const auto& ref : r.references)
                refs.push_back(Json{{"ordinal", ref.ordinal}, {"raw_text", ref.raw_text}});
            t.payload["references"] = refs;
            t.payload["passages"] = passages_json(r.retrieved);
            t.item_count = r.references.size();
            specs.push_back(std::move(t));
        }
        if (!r.statements.empty()) {
            TaskSpec t;
            t.stage = Stage::factuality;
            t.task_id = make_task_id(t.stage, r.query_id, r.model_id);
            t.payload = base;
            t.payload["statements"] = statements_json(r.statements);
            t.item_count = r.statements.size();
            specs.push_back(std::move(t));
        }
        if (!q->second->must_have.empty()) {
            TaskSpec t;
            t.stage = Stage::completeness;
            t.task_id = make_task_id(t.stage, r.query_id, r.model_id);
            t.payload = base;
            t.payload["statements"] = statements_json(q->second->must_have);
            t.item_count = q->second->must_have.size();
            specs.push_back(std::move(t));
        }
    }
    return specs;
}

std::vector<Json> convert_submission(const AnnotationTask& task, const Json& labels,
                                     const metrics::LabelProvenance& by)
{
    if (!labels.is_array()) throw InvalidArgument("labels must be a list");
    const Json& p = task.payload;
    std::map<std::string, Json> by_key;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const Json& label = labels[i];
        if (!label.is_object()) throw InvalidArgument("label " + std::to_string(i) + " is not an object");
        std::string key;
        switch (task.stage) {
        case Stage::relevance:
            key = relevance_key(field<std::string>(label, "passage_id", i), field<std::string>(label, "statement_id", i));
            break;
        case Stage::selection: key = selection_key(field<int>(label, "ref_ordinal", i)); break;
        case Stage::factuality:
        case Stage::completeness: key = statement_key(field<std::string>(label, "statement_id", i)); break;
        }
        if (!by_key.emplace(key, label).second) throw InvalidArgument("duplicate label for " + key);
    }
    const std::vector<std::string> keys = item_keys(task);
    for (const auto& key : keys)
        if (!by_key.contains(key)) throw InvalidArgument("missing label for " + key);
    if (by_key.size() != keys.size()) {
        const std::set<std::string> known(keys.begin(), keys.end());
        for (const auto& [key, _] : by_key)
            if (!known.contains(key)) throw InvalidArgument("label for unknown item " + key);
    }

    std::vector<Json> records;
    records.reserve(keys.size());
    const std::string query_id = p.at("query_id");
    switch (task.stage) {
    case Stage::relevance: {
        std::size_t i = 0;
        for (const auto& passage : p.at("passages")) {
            for (const auto& s : p.at("statements")) {
                const Json& label = by_key.at(relevance_key(passage.at("passage_id"), s.at("statement_id")));
                metrics::RelevanceLabel l;
                l.query_id = query_id;
                l.query_type = p.at("query_type");
                l.passage_id = passage.at("passage_id");
                l.rank = passage.at("rank");
                l.statement_id = s.at("statement_id");
                l.level = level_field(label, i++);
                l.by = by;
                records.push_back(metrics::to_json(l));
            }
        }
        break;
    }
    case Stage::selection: {
        std::set<std::string> retrieved;
        for (const auto& passage : p.at("passages")) retrieved.insert(passage.at("passage_id").get<std::string>());
        std::size_t i = 0;
        for (const auto& r : p.at("references")) {
            const Json& label = by_key.at(selection_key(r.at("ordinal").get<int>()));
            metrics::SelectionLabel l;
            l.query_id = query_id;
            l.model_id = p.at("model_id");
            l.ref_ordinal = r.at("ordinal");
            l.matched_passage_ids = field<std::vector<std::string>>(label, "matched_passage_ids", i++);
            for (const auto& id : l.matched_passage_ids)
                if (!retrieved.contains(id))
                    throw InvalidArgument(selection_key(l.ref_ordinal) + " matches passage '" + id +
                                          "', which was not retrieved");
            l.by = by;
            records.push_back(metrics::to_json(l));
        }
        break;
    }
    case Stage::factuality: {
        std::size_t i = 0;
        for (const auto& s : p.at("statements")) {
            const Json& label = by_key.at(statement_key(s.at("statement_id")));
            metrics::FactualityLabel l;
            l.query_id = query_id;
            l.model_id = p.at("model_id");
            l.statement_id = s.at("statement_id");
            l.verdict = field<bool>(label, "verdict", i++);
            l.citations = s.at("citations").get<std::vector<int>>();
            l.by = by;
            records.push_back(metrics::to_json(l));
        }
        break;
    }
    case Stage::completeness: {
        std::size_t i = 0;
        for (const auto& s : p.at("statements")) {
            const Json& label = by_key.at(statement_key(s.at("statement_id")));
            metrics::CompletenessLabel l;
            l.query_id = query_id;
            l.model_id = p.at("model_id");
            l.must_have_statement_id = s.at("statement_id");
            l.level = level_field(label, i++);
            l.by = by;
            records.push_back(metrics::to_json(l));
        }
        break;
    }
    }
    return records;
}

std::map<std::string, std::string> label_values(Stage stage, const std::vector<Json>& records)
{
    std::map<std::string, std::string> out;
    for (const auto& r : records) {
        switch (stage) {
        case Stage::relevance:
            out[relevance_key(r.at("passage_id"), r.at("statement_id"))] = r.at("level");
            break;
        case Stage::selection: {
            auto ids = r.at("matched_passage_ids").get<std::vector<std::string>>();
            std::sort(ids.begin(), ids.end());
            out[selection_key(r.at("ref_ordinal").get<int>())] = Json(ids).dump();
            break;
        }
        case Stage::factuality: out[statement_key(r.at("statement_id"))] = r.at("verdict").dump(); break;
        case Stage::completeness: out[statement_key(r.at("must_have_statement_id"))] = r.at("level"); break;
        }
    }
    return out;
}

} // namespace ragprobe::annotation
