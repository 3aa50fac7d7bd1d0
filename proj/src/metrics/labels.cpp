#include "ragprobe/metrics/labels.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

#include "ragprobe/common/error.hpp"

namespace ragprobe::metrics {
namespace {

using Key2 = std::pair<std::string, std::string>;

template <class T>
T required(const Json& j, const char* field)
{
    auto it = j.find(field);
    if (it == j.end() || it->is_null()) throw SchemaError(std::string("missing field '") + field + "'");
    try {
        return it->get<T>();
    } catch (const nlohmann::json::exception&) {
        throw SchemaError(std::string("field '") + field + "' has the wrong type");
    }
}

LabelProvenance provenance_from(const Json& j)
{
    LabelProvenance p;
    p.annotator_id = required<std::string>(j, "annotator_id");
    if (p.annotator_id.empty()) throw SchemaError("empty annotator_id");
    p.role = parse_role(j.value("role", std::string("annotator")));
    p.task_id = j.value("task_id", std::string{});
    return p;
}

void put_provenance(Json& j, const LabelProvenance& p)
{
    j["annotator_id"] = p.annotator_id;
    j["role"] = to_string(p.role);
    if (!p.task_id.empty()) j["task_id"] = p.task_id;
}

/// Picks the authoritative label per key: adjudicator first, then smallest annotator id.
template <class L, class KeyFn>
auto resolve(const std::vector<L>& labels, KeyFn key)
{
    using K = decltype(key(labels.front()));
    std::map<K, const L*> chosen;
    auto better = [](const L& a, const L& b) {
        const bool aa = a.by.role == AnnotatorRole::adjudicator;
        const bool ba = b.by.role == AnnotatorRole::adjudicator;
        if (aa != ba) return aa;
        return a.by.annotator_id < b.by.annotator_id;
    };
    for (const auto& l : labels) {
        auto [it, inserted] = chosen.emplace(key(l), &l);
        if (!inserted && better(l, *it->second)) it->second = &l;
    }
    return chosen;
}

struct QueryContext {
    std::vector<std::string> ranked;
    std::set<std::string> relevant;
    std::map<std::string, std::set<std::string>> supporting; // statement -> passages
};

std::map<std::string, QueryContext> query_contexts(const LabelSet& labels)
{
    std::map<std::string, QueryContext> out;
    for (const auto& q : build_query_relevance(labels)) {
        QueryContext c;
        c.ranked = q.ranked_passages;
        for (const auto& p : q.ranked_passages) {
            auto it = q.support.find(p);
            if (it == q.support.end()) continue;
            for (const auto& [statement, level] : it->second) {
                if (level != SupportLevel::none) {
                    c.relevant.insert(p);
                    c.supporting[statement].insert(p);
                }
            }
        }
        out.emplace(q.query_id, std::move(c));
    }
    return out;
}

std::map<Key2, std::vector<CitedReference>> selection_refs(const LabelSet& labels)
{
    std::map<Key2, std::vector<CitedReference>> out;
    const auto chosen = resolve(labels.selection, [](const SelectionLabel& l) {
        return std::make_tuple(l.query_id, l.model_id, l.ref_ordinal);
    });
    for (const auto& [key, label] : chosen) {
        CitedReference r;
        r.ordinal = label->ref_ordinal;
        r.matched_passages = label->matched_passage_ids;
        out[{label->query_id, label->model_id}].push_back(std::move(r));
    }
    return out;
}

int level_code(SupportLevel l, bool merge_partial)
{
    switch (l) {
    case SupportLevel::full: return merge_partial ? 1 : 2;
    case SupportLevel::partial: return 1;
    case SupportLevel::none: return 0;
    }
    return 0;
}

ReliabilityData to_units(const std::map<std::string, std::map<std::string, int>>& items)
{
    std::set<std::string> annotators;
    for (const auto& [item, by] : items) {
        for (const auto& [a, code] : by) annotators.insert(a);
    }
    const std::vector<std::string> columns(annotators.begin(), annotators.end());
    ReliabilityData out;
    for (const auto& [item, by] : items) {
        if (by.size() < 2) continue;
        std::vector<std::optional<int>> row(columns.size());
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (auto it = by.find(columns[c]); it != by.end()) row[c] = it->second;
        }
        out.push_back(std::move(row));
    }
    return out;
}

std::string item_key(std::initializer_list<std::string_view> parts)
{
    std::string k;
    for (auto p : parts) {
        k += p;
        k += '\x1f';
    }
    return k;
}

} // namespace

std::string_view to_string(Stage s)
{
    switch (s) {
    case Stage::relevance: return "relevance";
    case Stage::selection: return "selection";
    case Stage::factuality: return "factuality";
    case Stage::completeness: return "completeness";
    }
    return "unknown";
}

Stage parse_stage(std::string_view s)
{
    if (s == "relevance") return Stage::relevance;
    if (s == "selection") return Stage::selection;
    if (s == "factuality") return Stage::factuality;
    if (s == "completeness") return Stage::completeness;
    throw InvalidArgument("unknown stage '" + std::string(s) +
                          "' (expected relevance, selection, factuality or completeness)");
}

std::string_view to_string(AnnotatorRole r)
{
    return r == AnnotatorRole::adjudicator ? "adjudicator" : "annotator";
}

AnnotatorRole parse_role(std::string_view s)
{
    if (s == "annotator") return AnnotatorRole::annotator;
    if (s == "adjudicator") return AnnotatorRole::adjudicator;
    throw SchemaError("unknown annotator role '" + std::string(s) + "'");
}

void LabelSet::append(const LabelSet& o)
{
    relevance.insert(relevance.end(), o.relevance.begin(), o.relevance.end());
    selection.insert(selection.end(), o.selection.begin(), o.selection.end());
    factuality.insert(factuality.end(), o.factuality.begin(), o.factuality.end());
    completeness.insert(completeness.end(), o.completeness.begin(), o.completeness.end());
}

Json header_record(std::optional<Stage> stage)
{
    Json j{{"type", "header"}, {"schema", kLabelSchema}, {"version", kLabelSchemaVersion}};
    j["stage"] = stage ? Json(to_string(*stage)) : Json(nullptr);
    return j;
}

Json to_json(const RelevanceLabel& l)
{
    Json j{{"type", "relevance"},      {"query_id", l.query_id},         {"query_type", l.query_type},
           {"passage_id", l.passage_id}, {"rank", l.rank},                {"statement_id", l.statement_id},
           {"level", to_string(l.level)}};
    put_provenance(j, l.by);
    return j;
}

Json to_json(const SelectionLabel& l)
{
    Json j{{"type", "selection"},
           {"query_id", l.query_id},
           {"model_id", l.model_id},
           {"ref_ordinal", l.ref_ordinal},
           {"matched_passage_ids", l.matched_passage_ids}};
    put_provenance(j, l.by);
    return j;
}

Json to_json(const FactualityLabel& l)
{
    Json j{{"type", "factuality"},   {"query_id", l.query_id}, {"model_id", l.model_id},
           {"statement_id", l.statement_id}, {"verdict", l.verdict}, {"citations", l.citations}};
    put_provenance(j, l.by);
    return j;
}

Json to_json(const CompletenessLabel& l)
{
    Json j{{"type", "completeness"},
           {"query_id", l.query_id},
           {"model_id", l.model_id},
           {"must_have_statement_id", l.must_have_statement_id},
           {"level", to_string(l.level)}};
    put_provenance(j, l.by);
    return j;
}

void add_label_record(const Json& j, LabelSet& set)
{
    if (!j.is_object()) throw SchemaError("label record must be an object");
    const auto type = required<std::string>(j, "type");
    if (type == "header") {
        if (j.value("schema", std::string{}) != kLabelSchema) throw SchemaError("header names an unknown schema");
        if (j.value("version", 0) != kLabelSchemaVersion) {
            throw SchemaError("unsupported label schema version " + j.value("version", Json(0)).dump());
        }
        return;
    }
    if (type == "relevance") {
        RelevanceLabel l;
        l.query_id = required<std::string>(j, "query_id");
        l.query_type = j.value("query_type", std::string{});
        l.passage_id = required<std::string>(j, "passage_id");
        l.rank = required<std::size_t>(j, "rank");
        if (l.rank == 0) throw SchemaError("rank is 1-based");
        l.statement_id = required<std::string>(j, "statement_id");
        l.level = parse_support_level(required<std::string>(j, "level"));
        l.by = provenance_from(j);
        set.relevance.push_back(std::move(l));
    } else if (type == "selection") {
        SelectionLabel l;
        l.query_id = required<std::string>(j, "query_id");
        l.model_id = required<std::string>(j, "model_id");
        l.ref_ordinal = required<int>(j, "ref_ordinal");
        if (l.ref_ordinal < 1) throw SchemaError("ref_ordinal must be >= 1");
        l.matched_passage_ids = required<std::vector<std::string>>(j, "matched_passage_ids");
        l.by = provenance_from(j);
        set.selection.push_back(std::move(l));
    } else if (type == "factuality") {
        FactualityLabel l;
        l.query_id = required<std::string>(j, "query_id");
        l.model_id = required<std::string>(j, "model_id");
        l.statement_id = required<std::string>(j, "statement_id");
        l.verdict = required<bool>(j, "verdict");
        l.citations = j.value("citations", std::vector<int>{});
        l.by = provenance_from(j);
        set.factuality.push_back(std::move(l));
    } else if (type == "completeness") {
        CompletenessLabel l;
        l.query_id = required<std::string>(j, "query_id");
        l.model_id = required<std::string>(j, "model_id");
        l.must_have_statement_id = required<std::string>(j, "must_have_statement_id");
        l.level = parse_support_level(required<std::string>(j, "level"));
        l.by = provenance_from(j);
        set.completeness.push_back(std::move(l));
    } else {
        throw SchemaError("unknown label record type '" + type + "'");
    }
}

LabelSet read_label_file(const std::filesystem::path& path, std::vector<SchemaViolation>& violations)
{
    LabelSet set;
    for_each_line(path, [&](const JsonlLine& line) {
        const std::string where = path.string() + ":" + std::to_string(line.line_number);
        Json j = Json::parse(line.raw, nullptr, false);
        if (j.is_discarded()) {
            violations.push_back({where, "not valid JSON"});
            return;
        }
        try {
            add_label_record(j, set);
        } catch (const Error& e) {
            violations.push_back({where, e.what()});
        }
    });
    return set;
}

LabelSet read_label_dir(const std::filesystem::path& dir, std::vector<SchemaViolation>& violations)
{
    if (!std::filesystem::is_directory(dir)) throw NotFound("label directory " + dir.string() + " does not exist");
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".jsonl") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    LabelSet set;
    for (const auto& f : files) set.append(read_label_file(f, violations));
    return set;
}

std::vector<QueryRelevance> build_query_relevance(const LabelSet& labels)
{
    const auto chosen = resolve(labels.relevance, [](const RelevanceLabel& l) {
        return std::make_tuple(l.query_id, l.passage_id, l.statement_id);
    });
    std::map<std::string, QueryRelevance> queries;
    std::map<std::string, std::map<std::string, std::size_t>> ranks;
    std::map<std::string, std::set<std::string>> statements;
    for (const auto& [key, l] : chosen) {
        auto& q = queries[l->query_id];
        q.query_id = l->query_id;
        if (q.query_type.empty()) q.query_type = l->query_type;
        q.support[l->passage_id][l->statement_id] = l->level;
        auto [it, inserted] = ranks[l->query_id].emplace(l->passage_id, l->rank);
        if (!inserted) it->second = std::min(it->second, l->rank);
        statements[l->query_id].insert(l->statement_id);
    }
    std::vector<QueryRelevance> out;
    for (auto& [id, q] : queries) {
        std::vector<std::pair<std::size_t, std::string>> order;
        for (const auto& [p, r] : ranks[id]) order.emplace_back(r, p);
        std::sort(order.begin(), order.end());
        for (auto& [r, p] : order) q.ranked_passages.push_back(p);
        q.must_have_statements.assign(statements[id].begin(), statements[id].end());
        out.push_back(std::move(q));
    }
    return out;
}

std::vector<ResponseSelection> build_selection(const LabelSet& labels)
{
    const auto contexts = query_contexts(labels);
    std::vector<ResponseSelection> out;
    for (auto& [key, refs] : selection_refs(labels)) {
        auto ctx = contexts.find(key.first);
        if (ctx == contexts.end()) continue;
        ResponseSelection r;
        r.query_id = key.first;
        r.model_id = key.second;
        r.retrieved = ctx->second.ranked;
        r.relevant = ctx->second.relevant;
        r.references = refs;
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<ResponseFactuality> build_factuality(const LabelSet& labels)
{
    const auto chosen = resolve(labels.factuality, [](const FactualityLabel& l) {
        return std::make_tuple(l.query_id, l.model_id, l.statement_id);
    });
    std::map<Key2, ResponseFactuality> responses;
    for (const auto& [key, l] : chosen) {
        auto& r = responses[{l->query_id, l->model_id}];
        r.query_id = l->query_id;
        r.model_id = l->model_id;
        r.statement_ids.push_back(l->statement_id);
        r.verdicts[l->statement_id] = l->verdict;
    }
    std::vector<ResponseFactuality> out;
    for (auto& [k, r] : responses) out.push_back(std::move(r));
    return out;
}

std::vector<EvidenceResponse> build_evidence(const LabelSet& labels)
{
    const auto contexts = query_contexts(labels);
    auto refs = selection_refs(labels);
    const auto chosen = resolve(labels.factuality, [](const FactualityLabel& l) {
        return std::make_tuple(l.query_id, l.model_id, l.statement_id);
    });
    std::map<Key2, EvidenceResponse> responses;
    for (const auto& [key, l] : chosen) {
        auto ctx = contexts.find(l->query_id);
        if (ctx == contexts.end()) continue;
        auto& r = responses[{l->query_id, l->model_id}];
        r.query_id = l->query_id;
        r.model_id = l->model_id;
        r.relevant = ctx->second.relevant;
        r.statements.push_back({l->statement_id, l->citations, l->verdict});
    }
    std::vector<EvidenceResponse> out;
    for (auto& [k, r] : responses) {
        r.references = refs[k];
        std::set<int> known;
        for (const auto& ref : r.references) known.insert(ref.ordinal);
        for (const auto& s : r.statements) {
            for (int c : s.citations) {
                if (known.insert(c).second) r.references.push_back({c, {}, true});
            }
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<ResponseCompleteness> build_completeness(const LabelSet& labels)
{
    const auto chosen = resolve(labels.completeness, [](const CompletenessLabel& l) {
        return std::make_tuple(l.query_id, l.model_id, l.must_have_statement_id);
    });
    std::map<Key2, ResponseCompleteness> responses;
    for (const auto& [key, l] : chosen) {
        auto& r = responses[{l->query_id, l->model_id}];
        r.query_id = l->query_id;
        r.model_id = l->model_id;
        r.must_have_ids.push_back(l->must_have_statement_id);
        r.levels[l->must_have_statement_id] = l->level;
    }
    std::vector<ResponseCompleteness> out;
    for (auto& [k, r] : responses) out.push_back(std::move(r));
    return out;
}

std::vector<SupportResponse> build_support(const LabelSet& labels)
{
    const auto contexts = query_contexts(labels);
    auto refs = selection_refs(labels);
    const auto chosen = resolve(labels.completeness, [](const CompletenessLabel& l) {
        return std::make_tuple(l.query_id, l.model_id, l.must_have_statement_id);
    });
    std::map<Key2, SupportResponse> responses;
    for (const auto& [key, l] : chosen) {
        auto ctx = contexts.find(l->query_id);
        if (ctx == contexts.end()) continue;
        auto& r = responses[{l->query_id, l->model_id}];
        r.completeness.query_id = l->query_id;
        r.completeness.model_id = l->model_id;
        r.completeness.must_have_ids.push_back(l->must_have_statement_id);
        r.completeness.levels[l->must_have_statement_id] = l->level;
        r.supporting_passages = ctx->second.supporting;
    }
    std::vector<SupportResponse> out;
    for (auto& [k, r] : responses) {
        for (const auto& ref : refs[k]) r.cited_passages.insert(ref.matched_passages.begin(), ref.matched_passages.end());
        out.push_back(std::move(r));
    }
    return out;
}

ReliabilityData agreement_units(const LabelSet& labels, Stage stage, bool merge_partial)
{
    std::map<std::string, std::map<std::string, int>> items;
    auto add = [&](const std::string& item, const LabelProvenance& by, int code) {
        if (by.role == AnnotatorRole::adjudicator) return;
        items[item].emplace(by.annotator_id, code);
    };
    switch (stage) {
    case Stage::relevance:
        for (const auto& l : labels.relevance) {
            add(item_key({l.query_id, l.passage_id, l.statement_id}), l.by, level_code(l.level, merge_partial));
        }
        break;
    case Stage::completeness:
        for (const auto& l : labels.completeness) {
            add(item_key({l.query_id, l.model_id, l.must_have_statement_id}), l.by,
                level_code(l.level, merge_partial));
        }
        break;
    case Stage::factuality:
        for (const auto& l : labels.factuality) {
            add(item_key({l.query_id, l.model_id, l.statement_id}), l.by, l.verdict ? 1 : 0);
        }
        break;
    case Stage::selection: {
        const auto contexts = query_contexts(labels);
        std::map<Key2, std::set<std::string>> fallback;
        for (const auto& l : labels.selection) {
            fallback[{l.query_id, l.model_id}].insert(l.matched_passage_ids.begin(), l.matched_passage_ids.end());
        }
        for (const auto& l : labels.selection) {
            if (l.by.role == AnnotatorRole::adjudicator) continue;
            std::vector<std::string> passages;
            if (auto ctx = contexts.find(l.query_id); ctx != contexts.end()) {
                passages = ctx->second.ranked;
            } else {
                const auto& f = fallback[{l.query_id, l.model_id}];
                passages.assign(f.begin(), f.end());
            }
            const std::set<std::string> matched(l.matched_passage_ids.begin(), l.matched_passage_ids.end());
            const std::string ordinal = std::to_string(l.ref_ordinal);
            for (const auto& p : passages) {
                add(item_key({l.query_id, l.model_id, ordinal, p}), l.by, matched.contains(p) ? 1 : 0);
            }
        }
        break;
    }
    }
    return to_units(items);
}

} // namespace ragprobe::metrics
