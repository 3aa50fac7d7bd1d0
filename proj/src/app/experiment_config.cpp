#include "ragprobe/app/experiment_config.hpp"

#include <set>

#include "ragprobe/common/error.hpp"

namespace ragprobe::app {
namespace {

void only_fields(const Json& j, const std::string& where, std::initializer_list<const char*> allowed)
{
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : j.items())
        if (!ok.contains(key)) throw ConfigError(where + ": unknown field '" + key + "'");
}

template <class T>
T get(const Json& j, const char* key, const std::string& where, T fallback)
{
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception&) {
        throw ConfigError(where + "." + key + " has the wrong type");
    }
}

template <class T>
T require(const Json& j, const char* key, const std::string& where)
{
    if (!j.contains(key)) throw ConfigError(where + "." + key + " is required");
    return get<T>(j, key, where, T{});
}

llm::ChatEndpoint parse_endpoint(const Json& j, const std::string& where)
{
    only_fields(j, where, {"id", "url", "model", "api_key_env"});
    llm::ChatEndpoint e;
    e.id = get<std::string>(j, "id", where, where.substr(where.rfind('.') + 1));
    e.url = require<std::string>(j, "url", where);
    e.model = require<std::string>(j, "model", where);
    e.api_key_env = get<std::string>(j, "api_key_env", where, "");
    if (e.url.empty() || e.model.empty()) throw ConfigError(where + ": url and model must be non-empty");
    return e;
}

Json endpoint_json(const llm::ChatEndpoint& e)
{
    return Json{{"id", e.id}, {"url", e.url}, {"model", e.model}, {"api_key_env", e.api_key_env}};
}

} // namespace

std::filesystem::path ExperimentConfig::corpus_path(const CorpusRef& c) const
{
    const std::filesystem::path p(c.path);
    return p.is_absolute() ? p : base_dir / p;
}

ExperimentConfig parse_experiment_config(const Json& j, std::filesystem::path base_dir)
{
    only_fields(j, "config", {"version", "endpoints", "corpora", "merge", "gateway", "grid", "pipelines", "benchmark"});
    ExperimentConfig c;
    c.base_dir = std::move(base_dir);
    c.version = require<int>(j, "version", "config");
    if (c.version != kConfigVersion)
        throw ConfigError("config.version " + std::to_string(c.version) + " is not supported (expected " +
                          std::to_string(kConfigVersion) + ")");

    const Json endpoints = j.value("endpoints", Json::object());
    only_fields(endpoints, "config.endpoints", {"response", "filter", "embedding"});
    if (!endpoints.contains("response")) throw ConfigError("config.endpoints.response is required");
    c.response = parse_endpoint(endpoints.at("response"), "config.endpoints.response");
    if (endpoints.contains("filter")) c.filter = parse_endpoint(endpoints.at("filter"), "config.endpoints.filter");
    if (endpoints.contains("embedding")) {
        const Json& e = endpoints.at("embedding");
        const std::string where = "config.endpoints.embedding";
        only_fields(e, where, {"query_url", "article_url", "api_key_env"});
        EmbeddingSettings s;
        s.endpoints.query_url = require<std::string>(e, "query_url", where);
        s.endpoints.article_url = require<std::string>(e, "article_url", where);
        s.api_key_env = get<std::string>(e, "api_key_env", where, "");
        c.embedding = s;
    }

    std::set<std::string> corpus_names;
    for (const auto& corpus : j.value("corpora", Json::array())) {
        only_fields(corpus, "config.corpora[]", {"name", "path"});
        CorpusRef ref{require<std::string>(corpus, "name", "config.corpora[]"),
                      require<std::string>(corpus, "path", "config.corpora[]")};
        if (ref.name.empty() || !corpus_names.insert(ref.name).second)
            throw ConfigError("config.corpora: empty or duplicate corpus name '" + ref.name + "'");
        c.corpora.push_back(std::move(ref));
    }
    const std::string merge = get<std::string>(j, "merge", "config", "global");
    if (merge == "global")
        c.merge = retrieval::MergeMode::global;
    else if (merge == "per_source")
        c.merge = retrieval::MergeMode::per_source;
    else
        throw ConfigError("config.merge must be 'global' or 'per_source'");

    if (j.contains("gateway")) {
        const Json& g = j.at("gateway");
        const std::string where = "config.gateway";
        only_fields(g, where, {"max_attempts", "transport_retry_cap", "max_in_flight", "backoff_base_ms", "backoff_max_ms"});
        c.gateway.max_attempts = get<std::size_t>(g, "max_attempts", where, c.gateway.max_attempts);
        c.gateway.transport_retry_cap = get<std::size_t>(g, "transport_retry_cap", where, c.gateway.transport_retry_cap);
        c.gateway.max_in_flight = get<std::size_t>(g, "max_in_flight", where, c.gateway.max_in_flight);
        c.gateway.backoff_base_ms = get<std::int64_t>(g, "backoff_base_ms", where, c.gateway.backoff_base_ms);
        c.gateway.backoff_max_ms = get<std::int64_t>(g, "backoff_max_ms", where, c.gateway.backoff_max_ms);
        if (c.gateway.max_attempts < 1 || c.gateway.transport_retry_cap < 1 || c.gateway.max_in_flight < 1)
            throw ConfigError(where + ": attempts, retry cap and in-flight bound must be >= 1");
    }

    auto check_corpora = [&](const std::vector<std::string>& names, const std::string& where) {
        for (const auto& n : names)
            if (!corpus_names.contains(n)) throw ConfigError(where + " names unknown corpus '" + n + "'");
    };
    if (j.contains("grid")) {
        const Json& g = j.at("grid");
        const std::string where = "config.grid";
        only_fields(g, where, {"ks", "retriever", "response_profile", "seed", "corpora"});
        GridSettings s;
        s.ks = get<std::vector<std::size_t>>(g, "ks", where, s.ks);
        if (s.ks.empty()) throw ConfigError(where + ".ks must list at least one k");
        for (auto k : s.ks)
            if (k < 1) throw ConfigError(where + ".ks: k must be >= 1");
        try {
            s.retriever = retrieval::parse_retriever_kind(get<std::string>(g, "retriever", where, "bm25"));
        } catch (const InvalidArgument& e) {
            throw ConfigError(where + ".retriever: " + e.what());
        }
        s.response_profile = get<std::string>(g, "response_profile", where, s.response_profile);
        if (g.contains("seed") && !g.at("seed").is_null()) s.seed = get<std::int64_t>(g, "seed", where, 0);
        s.corpora = get<std::vector<std::string>>(g, "corpora", where, {});
        check_corpora(s.corpora, where + ".corpora");
        c.grid = s;
    }
    std::set<std::string> names;
    for (const auto& p : j.value("pipelines", Json::array())) {
        pipeline::PipelineConfig pc = pipeline::config_from_json(p);
        check_corpora(pc.corpora, "pipeline config '" + pc.name + "'");
        if (!names.insert(pc.name).second) throw ConfigError("duplicate pipeline name '" + pc.name + "'");
        c.pipelines.push_back(std::move(pc));
    }

    if (j.contains("benchmark")) {
        const Json& b = j.at("benchmark");
        const std::string where = "config.benchmark";
        only_fields(b, where, {"limit", "seed", "bootstrap_replicates", "parallelism"});
        c.benchmark.limit = get<std::size_t>(b, "limit", where, c.benchmark.limit);
        c.benchmark.seed = get<std::uint64_t>(b, "seed", where, c.benchmark.seed);
        c.benchmark.bootstrap_replicates =
            get<std::size_t>(b, "bootstrap_replicates", where, c.benchmark.bootstrap_replicates);
        c.benchmark.parallelism = get<std::size_t>(b, "parallelism", where, c.benchmark.parallelism);
        if (c.benchmark.limit < 1 || c.benchmark.bootstrap_replicates < 1 || c.benchmark.parallelism < 1)
            throw ConfigError(where + ": limit, bootstrap_replicates and parallelism must be >= 1");
    }
    return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path)
{
    Json j = Json::parse(read_file(path), nullptr, false);
    if (j.is_discarded()) throw ConfigError(path.string() + " is not valid JSON");
    return parse_experiment_config(j, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

Json to_json(const ExperimentConfig& c)
{
    Json j;
    j["version"] = c.version;
    Json endpoints{{"response", endpoint_json(c.response)}};
    if (c.filter) endpoints["filter"] = endpoint_json(*c.filter);
    if (c.embedding)
        endpoints["embedding"] = Json{{"query_url", c.embedding->endpoints.query_url},
                                      {"article_url", c.embedding->endpoints.article_url},
                                      {"api_key_env", c.embedding->api_key_env}};
    j["endpoints"] = endpoints;
    Json corpora = Json::array();
    for (const auto& r : c.corpora) corpora.push_back(Json{{"name", r.name}, {"path", r.path}});
    j["corpora"] = corpora;
    j["merge"] = c.merge == retrieval::MergeMode::global ? "global" : "per_source";
    j["gateway"] = Json{{"max_attempts", c.gateway.max_attempts},
                        {"transport_retry_cap", c.gateway.transport_retry_cap},
                        {"max_in_flight", c.gateway.max_in_flight},
                        {"backoff_base_ms", c.gateway.backoff_base_ms},
                        {"backoff_max_ms", c.gateway.backoff_max_ms}};
    if (c.grid) {
        Json g{{"ks", c.grid->ks},
               {"retriever", std::string(retrieval::to_string(c.grid->retriever))},
               {"response_profile", c.grid->response_profile},
               {"corpora", c.grid->corpora}};
        g["seed"] = c.grid->seed ? Json(*c.grid->seed) : Json(nullptr);
        j["grid"] = g;
    }
    Json pipelines = Json::array();
    for (const auto& p : c.pipelines) pipelines.push_back(pipeline::to_json(p));
    j["pipelines"] = pipelines;
    j["benchmark"] = Json{{"limit", c.benchmark.limit},
                          {"seed", c.benchmark.seed},
                          {"bootstrap_replicates", c.benchmark.bootstrap_replicates},
                          {"parallelism", c.benchmark.parallelism}};
    return j;
}

std::vector<pipeline::PipelineConfig> experiment_pipelines(const ExperimentConfig& c, bool use_grid)
{
    if (use_grid) {
        if (!c.grid) throw ConfigError("--grid requested but the config has no 'grid' section");
        auto grid = pipeline::standard_grid(c.grid->ks, c.grid->retriever, c.grid->response_profile, c.grid->corpora);
        for (auto& p : grid) p.seed = c.grid->seed;
        return grid;
    }
    if (c.pipelines.empty()) throw ConfigError("the config lists no 'pipelines'; pass --grid to run the grid");
    return c.pipelines;
}

} // namespace ragprobe::app
