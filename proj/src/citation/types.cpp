#include "ragprobe/citation/types.hpp"

#include <algorithm>

#include "ragprobe/common/error.hpp"

namespace ragprobe::citation {
namespace {

template <class E, std::size_t N>
E parse_enum(std::string_view s, const std::pair<E, std::string_view> (&table)[N], std::string_view what)
{
    for (const auto& [v, name] : table) {
        if (name == s) return v;
    }
    throw SchemaError("unknown " + std::string(what) + " '" + std::string(s) + "'");
}

template <class E, std::size_t N>
std::string_view name_of(E v, const std::pair<E, std::string_view> (&table)[N])
{
    for (const auto& [e, name] : table) {
        if (e == v) return name;
    }
    return "unknown";
}

constexpr std::pair<Owner, std::string_view> kOwners[] = {{Owner::gold_answer, "gold_answer"},
                                                          {Owner::model_response, "model_response"}};
constexpr std::pair<Necessity, std::string_view> kNecessity[] = {{Necessity::must_have, "must_have"},
                                                                 {Necessity::nice_to_have, "nice_to_have"}};
constexpr std::pair<Origin, std::string_view> kOrigins[] = {{Origin::retrieval_based, "retrieval_based"},
                                                            {Origin::self_generated, "self_generated"},
                                                            {Origin::unresolved, "unresolved"}};
constexpr std::pair<Verifiability, std::string_view> kVerifiability[] = {
    {Verifiability::verified, "verified"}, {Verifiability::unverifiable, "unverifiable"}};

} // namespace

std::string_view to_string(Owner v) { return name_of(v, kOwners); }
std::string_view to_string(Necessity v) { return name_of(v, kNecessity); }
std::string_view to_string(Origin v) { return name_of(v, kOrigins); }
std::string_view to_string(Verifiability v) { return name_of(v, kVerifiability); }
Owner parse_owner(std::string_view s) { return parse_enum(s, kOwners, "statement owner"); }
Necessity parse_necessity(std::string_view s) { return parse_enum(s, kNecessity, "necessity"); }
Origin parse_origin(std::string_view s) { return parse_enum(s, kOrigins, "reference origin"); }
Verifiability parse_verifiability(std::string_view s) { return parse_enum(s, kVerifiability, "verifiability"); }

void check_invariants(const Statement& s)
{
    if (!std::is_sorted(s.citations.begin(), s.citations.end()) ||
        std::adjacent_find(s.citations.begin(), s.citations.end()) != s.citations.end()) {
        throw InvalidArgument("statement " + s.statement_id + ": citations must be sorted and unique");
    }
    if (s.necessity && s.owner != Owner::gold_answer) {
        throw InvalidArgument("statement " + s.statement_id + ": necessity is only defined for gold-answer statements");
    }
    if (s.distinctive && s.owner != Owner::model_response) {
        throw InvalidArgument("statement " + s.statement_id +
                              ": distinctiveness is only defined for model-response statements");
    }
}

Json to_json(const Statement& s)
{
    Json j{{"statement_id", s.statement_id}, {"owner", to_string(s.owner)}, {"text", s.text}, {"citations", s.citations}};
    j["necessity"] = s.necessity ? Json(to_string(*s.necessity)) : Json(nullptr);
    j["distinctive"] = s.distinctive ? Json(*s.distinctive) : Json(nullptr);
    return j;
}

Json to_json(const Reference& r)
{
    Json j{{"ref_ordinal", r.ordinal},
           {"raw_text", r.raw_text},
           {"matched_passages", r.matched_passages},
           {"origin", to_string(r.origin)},
           {"match_score", r.match_score}};
    j["verifiability"] = r.verifiability ? Json(to_string(*r.verifiability)) : Json(nullptr);
    return j;
}

Json to_json(const ParsedResponse& p)
{
    Json statements = Json::array();
    for (const auto& s : p.body_statements) statements.push_back(to_json(s));
    Json refs = Json::array();
    for (const auto& r : p.references) refs.push_back(to_json(r));
    return Json{{"body_statements", std::move(statements)},
                {"references", std::move(refs)},
                {"unmatched_citation_ordinals", p.unmatched_citation_ordinals},
                {"missing_reference_section", p.missing_reference_section},
                {"warnings", p.warnings}};
}

Statement statement_from_json(const Json& j)
{
    Statement s;
    try {
        s.statement_id = j.at("statement_id").get<std::string>();
        s.owner = parse_owner(j.at("owner").get<std::string>());
        s.text = j.at("text").get<std::string>();
        s.citations = j.value("citations", std::vector<int>{});
        if (auto it = j.find("necessity"); it != j.end() && !it->is_null()) {
            s.necessity = parse_necessity(it->get<std::string>());
        }
        if (auto it = j.find("distinctive"); it != j.end() && !it->is_null()) s.distinctive = it->get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("malformed statement: ") + e.what());
    }
    try {
        check_invariants(s);
    } catch (const InvalidArgument& e) {
        throw SchemaError(e.what());
    }
    return s;
}

Reference reference_from_json(const Json& j)
{
    Reference r;
    try {
        r.ordinal = j.at("ref_ordinal").get<int>();
        r.raw_text = j.at("raw_text").get<std::string>();
        r.matched_passages = j.value("matched_passages", std::vector<std::string>{});
        r.origin = parse_origin(j.value("origin", std::string("unresolved")));
        r.match_score = j.value("match_score", 0.0);
        if (auto it = j.find("verifiability"); it != j.end() && !it->is_null()) {
            r.verifiability = parse_verifiability(it->get<std::string>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("malformed reference: ") + e.what());
    }
    if ((r.origin == Origin::retrieval_based) != !r.matched_passages.empty()) {
        throw SchemaError("reference " + std::to_string(r.ordinal) +
                          ": origin retrieval_based requires matched passages and vice versa");
    }
    return r;
}

ParsedResponse parsed_response_from_json(const Json& j)
{
    ParsedResponse p;
    try {
        for (const auto& s : j.at("body_statements")) p.body_statements.push_back(statement_from_json(s));
        for (const auto& r : j.at("references")) p.references.push_back(reference_from_json(r));
        p.unmatched_citation_ordinals = j.value("unmatched_citation_ordinals", std::vector<int>{});
        p.missing_reference_section = j.value("missing_reference_section", false);
        p.warnings = j.value("warnings", std::vector<std::string>{});
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("malformed parsed response: ") + e.what());
    }
    return p;
}

} // namespace ragprobe::citation
