#include "ragprobe/pipeline/config.hpp"

#include <set>

#include "ragprobe/common/digest.hpp"
#include "ragprobe/common/error.hpp"
#include "ragprobe/llm/sampling.hpp"

namespace ragprobe::pipeline {

void validate(const PipelineConfig& c)
{
    if (c.use_filtering && !c.use_retrieval)
        throw ConfigError("pipeline config '" + c.name + "': use_filtering requires use_retrieval");
    if (c.use_reformulation && !c.use_retrieval)
        throw ConfigError("pipeline config '" + c.name + "': use_reformulation requires use_retrieval");
    if (c.use_retrieval && c.k < 1) throw ConfigError("pipeline config '" + c.name + "': k must be >= 1");
    if (c.filter_on_rationale && !c.use_reformulation)
        throw ConfigError("pipeline config '" + c.name + "': filter_on_rationale requires use_reformulation");
    try {
        llm::sampling_profile(c.response_profile);
    } catch (const InvalidArgument& e) {
        throw ConfigError("pipeline config '" + c.name + "': " + e.what());
    }
    for (const auto& corpus : c.corpora)
        if (corpus.empty()) throw ConfigError("pipeline config '" + c.name + "': empty corpus name");
}

Json to_json(const PipelineConfig& c)
{
    Json j{{"name", c.name},
           {"use_retrieval", c.use_retrieval},
           {"use_filtering", c.use_filtering},
           {"use_reformulation", c.use_reformulation},
           {"k", c.k},
           {"retriever", std::string(retrieval::to_string(c.retriever))},
           {"response_profile", c.response_profile},
           {"corpora", c.corpora},
           {"filter_on_rationale", c.filter_on_rationale}};
    j["seed"] = c.seed ? Json(*c.seed) : Json(nullptr);
    return j;
}

PipelineConfig config_from_json(const Json& j)
{
    if (!j.is_object()) throw ConfigError("pipeline config must be an object");
    static const std::set<std::string> known{"name", "use_retrieval", "use_filtering", "use_reformulation", "k",
                                             "retriever", "response_profile", "corpora", "filter_on_rationale",
                                             "seed"};
    for (const auto& [key, _] : j.items())
        if (!known.contains(key)) throw ConfigError("pipeline config: unknown field '" + key + "'");
    PipelineConfig c;
    try {
        c.use_retrieval = j.value("use_retrieval", true);
        c.use_filtering = j.value("use_filtering", false);
        c.use_reformulation = j.value("use_reformulation", false);
        if (j.contains("k")) {
            const auto& k = j.at("k");
            if (!k.is_number_integer() || k.get<std::int64_t>() < 1)
                throw ConfigError("pipeline config: k must be an integer >= 1");
            c.k = k.get<std::size_t>();
        }
        c.retriever = retrieval::parse_retriever_kind(j.value("retriever", std::string("bm25")));
        c.response_profile = j.value("response_profile", std::string("primary"));
        c.corpora = j.value("corpora", std::vector<std::string>{});
        c.filter_on_rationale = j.value("filter_on_rationale", false);
        if (j.contains("seed") && !j.at("seed").is_null()) c.seed = j.at("seed").get<std::int64_t>();
        c.name = j.value("name", std::string());
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("pipeline config: ") + e.what());
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("pipeline config: ") + e.what());
    }
    if (c.name.empty()) c.name = default_name(c);
    validate(c);
    return c;
}

std::string config_digest(const PipelineConfig& c)
{
    Json j = to_json(c);
    j.erase("name");
    return sha256_hex(j.dump());
}

std::string default_name(const PipelineConfig& c)
{
    if (!c.use_retrieval) return "no_rag";
    std::string base = "standard";
    if (c.use_filtering && c.use_reformulation)
        base = "combined";
    else if (c.use_filtering)
        base = "filter";
    else if (c.use_reformulation)
        base = "reformulate";
    return base + "@" + std::to_string(c.k);
}

std::vector<PipelineConfig> standard_grid(const std::vector<std::size_t>& ks, retrieval::RetrieverKind retriever,
                                          const std::string& response_profile, std::vector<std::string> corpora)
{
    if (ks.empty()) throw ConfigError("grid needs at least one k");
    std::vector<PipelineConfig> grid;
    PipelineConfig baseline;
    baseline.use_retrieval = false;
    baseline.retriever = retriever;
    baseline.response_profile = response_profile;
    baseline.name = default_name(baseline);
    grid.push_back(baseline);
    const std::pair<bool, bool> variants[] = {{false, false}, {true, false}, {false, true}, {true, true}};
    for (auto [filter, reformulate] : variants) {
        for (std::size_t k : ks) {
            PipelineConfig c;
            c.use_filtering = filter;
            c.use_reformulation = reformulate;
            c.k = k;
            c.retriever = retriever;
            c.response_profile = response_profile;
            c.corpora = corpora;
            c.name = default_name(c);
            validate(c);
            grid.push_back(std::move(c));
        }
    }
    return grid;
}

} // namespace ragprobe::pipeline
