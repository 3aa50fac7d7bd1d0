#include <atomic>

#include "ragprobe/app/commands.hpp"
#include "ragprobe/app/run_directory.hpp"
#include "ragprobe/citation/alignment.hpp"
#include "ragprobe/citation/segmentation.hpp"
#include "ragprobe/common/digest.hpp"
#include "ragprobe/common/error.hpp"
#include "ragprobe/pipeline/run_record.hpp"

namespace ragprobe::app {
namespace {

std::string jsonl_text(const std::vector<Json>& records)
{
    std::string out;
    for (const auto& r : records) out += r.dump() + "\n";
    return out;
}

std::vector<pipeline::Query> load_free_text_queries(const std::filesystem::path& path)
{
    std::vector<pipeline::Query> out;
    std::set<std::string> seen;
    for (const auto& j : read_jsonl(path)) {
        std::string id;
        std::string text;
        try {
            id = j.at("query_id").get<std::string>();
            text = j.at("text").get<std::string>();
        } catch (const Json::exception& e) {
            throw SchemaError(path.string() + ": query record needs query_id and text (" + e.what() + ")");
        }
        if (!seen.insert(id).second) throw SchemaError(path.string() + ": duplicate query_id '" + id + "'");
        pipeline::Query q = pipeline::free_text_query(id, text);
        q.query_type = j.value("query_type", q.query_type);
        out.push_back(std::move(q));
    }
    if (out.empty()) throw SchemaError(path.string() + ": no queries");
    return out;
}

Json query_json(const pipeline::Query& q)
{
    return Json{{"query_id", q.query_id}, {"text", q.text}, {"query_type", q.query_type}};
}

std::vector<pipeline::PipelineConfig> snapshot_pipelines(const RunDirectory& rd)
{
    std::vector<pipeline::PipelineConfig> out;
    for (const auto& p : rd.inputs().at("pipelines")) out.push_back(pipeline::config_from_json(p));
    return out;
}

void write_if_changed(const std::filesystem::path& path, const std::string& text)
{
    if (std::filesystem::exists(path) && read_file(path) == text) return;
    write_file_atomic(path, text);
}

} // namespace

RunSummary run_experiment(const RunRequest& request, const RuntimeHooks& hooks)
{
    if (request.dataset.has_value() == request.queries.has_value())
        throw InvalidArgument("pass exactly one of --dataset or --queries");
    const ExperimentConfig config = load_experiment_config(request.config_path);
    const std::vector<pipeline::PipelineConfig> pipelines = experiment_pipelines(config, request.use_grid);
    const std::size_t limit = request.limit.value_or(config.benchmark.limit);
    if (limit < 1) throw InvalidArgument("--limit must be >= 1");

    std::vector<pipeline::BenchmarkItem> items;
    std::vector<pipeline::Query> queries;
    std::vector<Json> input_records;
    if (request.dataset) {
        items = pipeline::sample_items(pipeline::load_benchmark(*request.dataset), limit, config.benchmark.seed);
        for (const auto& i : items) {
            queries.push_back(pipeline::query_from_item(i));
            input_records.push_back(pipeline::to_json(i));
        }
    } else {
        queries = load_free_text_queries(*request.queries);
        for (const auto& q : queries) input_records.push_back(query_json(q));
    }
    const std::string input_text = jsonl_text(input_records);
    Json pipeline_list = Json::array();
    for (const auto& p : pipelines) pipeline_list.push_back(pipeline::to_json(p));
    const Json inputs{{"kind", request.dataset ? "mcq" : "free_text"},
                      {"pipelines", pipeline_list},
                      {"inputs_sha256", sha256_hex(input_text)},
                      {"sample", Json{{"limit", limit}, {"seed", config.benchmark.seed}}}};

    const RunDirectory rd = RunDirectory::create(request.run_dir, config, inputs);
    write_if_changed(request.dataset ? rd.items_file() : rd.queries_file(), input_text);

    Runtime runtime(rd.config(), rd.transcripts_file(), request.mode, hooks);
    pipeline::RunStore store(rd.runs_file());
    RunSummary summary;
    summary.snapshot_digest = rd.digest();
    std::atomic<std::size_t> reused{0};
    auto existing = [&](const std::string& id) -> std::optional<pipeline::RunRecord> {
        auto r = store.find(id);
        if (r && request.retry_failed && !r->ok()) return std::nullopt;
        if (r) ++reused;
        return r;
    };

    if (request.dataset) {
        pipeline::BenchmarkOptions options;
        options.bootstrap_replicates = config.benchmark.bootstrap_replicates;
        options.seed = config.benchmark.seed;
        options.parallelism = request.parallelism.value_or(config.benchmark.parallelism);
        options.existing = existing;
        summary.table = pipeline::run_benchmark(
            items, pipelines, [&](const pipeline::PipelineConfig& pc) { return runtime.make_pipeline(pc, rd.digest()); },
            options, [&](const pipeline::RunRecord& r) { store.append(r); });
        for (const auto& cell : summary.table->cells) summary.failed += cell.failed;
        std::filesystem::create_directories(rd.reports_dir());
        const Json report{{"snapshot_digest", rd.digest()}, {"accuracy", pipeline::to_json(*summary.table)}};
        write_file_atomic(rd.reports_dir() / "accuracy.json", report.dump(2) + "\n");
    } else {
        for (const auto& pc : pipelines) {
            pipeline::Pipeline p = runtime.make_pipeline(pc, rd.digest());
            const std::string digest = pipeline::config_digest(pc);
            for (const auto& q : queries) {
                if (auto r = existing(pipeline::make_record_id(q.query_id, digest))) {
                    if (!r->ok()) ++summary.failed;
                    continue;
                }
                const pipeline::RunRecord r = p.run(q);
                if (!r.ok()) ++summary.failed;
                store.append(r);
            }
        }
    }
    summary.records = pipelines.size() * queries.size();
    summary.reused = reused.load();
    summary.network_calls = runtime.network_calls();
    return summary;
}

ReplaySummary replay_run(const std::filesystem::path& run_dir, const RuntimeHooks& hooks)
{
    const RunDirectory rd = RunDirectory::open(run_dir);
    const auto pipelines = snapshot_pipelines(rd);
    std::vector<pipeline::Query> queries;
    if (rd.inputs().value("kind", std::string()) == "mcq") {
        for (const auto& item : pipeline::load_benchmark(rd.items_file())) queries.push_back(pipeline::query_from_item(item));
    } else {
        queries = load_free_text_queries(rd.queries_file());
    }
    const pipeline::RunStore stored(rd.runs_file());
    Runtime runtime(rd.config(), rd.transcripts_file(), llm::TranscriptMode::replay, hooks);

    ReplaySummary summary;
    for (const auto& pc : pipelines) {
        pipeline::Pipeline p = runtime.make_pipeline(pc, rd.digest());
        for (const auto& q : queries) {
            const pipeline::RunRecord r = p.run(q);
            ++summary.records;
            const auto original = stored.find_serialized(r.record_id);
            if (original && *original == pipeline::serialize(r))
                ++summary.identical;
            else
                summary.mismatched.push_back(r.record_id);
        }
    }
    summary.network_calls = runtime.network_calls();
    return summary;
}

ParseSummary parse_run(const std::filesystem::path& run_dir, bool use_llm, const RuntimeHooks& hooks,
                       llm::TranscriptMode mode)
{
    const RunDirectory rd = RunDirectory::open(run_dir);
    const pipeline::RunStore runs(rd.runs_file());
    Runtime runtime(rd.config(), rd.transcripts_file(), mode, hooks);

    ParseSummary summary;
    std::vector<Json> lines;
    for (const auto& r : runs.all()) {
        if (!r.ok()) continue;
        std::vector<std::string> context_ids;
        if (r.context_passages > 0) context_ids = r.kept_after_filter;
        const std::vector<corpus::Passage> context = context_ids.empty() ? std::vector<corpus::Passage>{}
                                                                         : runtime.passages(context_ids);
        citation::ParsedResponse parsed;
        if (use_llm) {
            auto statements = citation::segment_statements(runtime.gateway(), r.answer_text,
                                                           citation::Owner::model_response);
            parsed = citation::align_statements_to_refs(&runtime.gateway(), r.answer_text, std::move(statements));
        } else {
            parsed = citation::parse_response(r.answer_text);
        }
        for (auto& ref : parsed.references) ref = citation::classify_reference_origin(std::move(ref), context);
        const auto counts = citation::count_origins(parsed.references);
        summary.origins.retrieval_based += counts.retrieval_based;
        summary.origins.self_generated += counts.self_generated;
        summary.origins.unresolved += counts.unresolved;
        summary.statements += parsed.body_statements.size();
        summary.missing_reference_sections += parsed.missing_reference_section ? 1 : 0;
        summary.warnings += parsed.warnings.size();
        ++summary.responses;
        lines.push_back(Json{{"record_id", r.record_id},
                             {"query_id", r.query_id},
                             {"model_id", r.config_name},
                             {"snapshot_digest", rd.digest()},
                             {"context_passages", context_ids},
                             {"parsed", citation::to_json(parsed)}});
    }
    write_file_atomic(rd.parsed_file(), jsonl_text(lines));
    return summary;
}

} // namespace ragprobe::app
