#include <set>

#include "ragprobe/annotation/store.hpp"
#include "ragprobe/app/commands.hpp"
#include "ragprobe/app/run_directory.hpp"
#include "ragprobe/citation/types.hpp"
#include "ragprobe/common/error.hpp"
#include "ragprobe/pipeline/run_record.hpp"

namespace ragprobe::app {
namespace {

annotation::PassageView passage_view(const corpus::Passage& p, std::size_t rank)
{
    return {p.passage_id, rank, p.title, p.text, corpus::render_metadata(p)};
}

// The configuration whose ranked lists are judged for relevance: by default
// the deepest plain retrieval configuration of the run.
std::string pick_relevance_config(const RunDirectory& rd, const std::optional<std::string>& requested)
{
    std::optional<pipeline::PipelineConfig> best;
    for (const auto& p : rd.inputs().at("pipelines")) {
        auto pc = pipeline::config_from_json(p);
        if (requested) {
            if (pc.name == *requested) return pc.name;
            continue;
        }
        if (!pc.use_retrieval || pc.use_reformulation) continue;
        if (!best || pc.k > best->k || (pc.k == best->k && pc.use_filtering < best->use_filtering)) best = pc;
    }
    if (requested) throw NotFound("run has no configuration named '" + *requested + "'");
    if (!best) throw NotFound("run has no retrieval configuration without reformulation to judge relevance on");
    return best->name;
}

} // namespace

std::vector<annotation::GoldQuery> load_gold(const std::filesystem::path& path)
{
    std::vector<annotation::GoldQuery> out;
    for (const auto& j : read_jsonl(path)) {
        annotation::GoldQuery q;
        try {
            q.query_id = j.at("query_id").get<std::string>();
            q.query_type = j.value("query_type", std::string("patient"));
            q.text = j.value("text", std::string());
            std::size_t n = 0;
            for (const auto& s : j.at("must_have")) {
                ++n;
                if (s.is_string())
                    q.must_have.push_back({"m" + std::to_string(n), s.get<std::string>(), {}});
                else
                    q.must_have.push_back({s.at("statement_id").get<std::string>(), s.at("text").get<std::string>(), {}});
            }
        } catch (const Json::exception& e) {
            throw SchemaError(path.string() + ": gold record needs query_id and must_have (" + e.what() + ")");
        }
        out.push_back(std::move(q));
    }
    return out;
}

std::map<annotation::Stage, std::size_t> create_run_tasks(const TaskRequest& request)
{
    const RunDirectory rd = RunDirectory::open(request.run_dir);
    if (!std::filesystem::exists(rd.parsed_file()))
        throw NotFound("run has no parsed.jsonl; run 'ragprobe parse' first");
    annotation::TaskSource source;
    source.queries = load_gold(request.gold);
    std::set<std::string> gold_ids;
    for (const auto& q : source.queries) gold_ids.insert(q.query_id);

    Runtime runtime(rd.config(), rd.transcripts_file(), llm::TranscriptMode::cache);
    const pipeline::RunStore runs(rd.runs_file());
    const std::string relevance_config = pick_relevance_config(rd, request.relevance_config);
    for (const auto& r : runs.all()) {
        if (r.config_name != relevance_config || !gold_ids.contains(r.query_id) || r.retrieved.empty()) continue;
        std::vector<std::string> ids;
        for (const auto& h : r.retrieved) ids.push_back(h.passage_id);
        const auto passages = runtime.passages(ids);
        auto& list = source.retrieved[r.query_id];
        for (std::size_t i = 0; i < passages.size(); ++i) list.push_back(passage_view(passages[i], r.retrieved[i].rank));
    }

    for (const auto& line : read_jsonl(rd.parsed_file())) {
        const std::string query_id = line.at("query_id");
        if (!gold_ids.contains(query_id)) continue;
        const auto parsed = citation::parsed_response_from_json(line.at("parsed"));
        annotation::ResponseView view;
        view.query_id = query_id;
        view.model_id = line.at("model_id");
        const auto record = runs.find(line.at("record_id"));
        if (!record) throw NotFound("parsed response " + line.at("record_id").get<std::string>() + " has no run record");
        view.response_text = record->answer_text;
        const auto context_ids = line.at("context_passages").get<std::vector<std::string>>();
        view.rag = !context_ids.empty();
        if (view.rag) {
            const auto passages = runtime.passages(context_ids);
            for (std::size_t i = 0; i < passages.size(); ++i) view.retrieved.push_back(passage_view(passages[i], i + 1));
        }
        for (const auto& ref : parsed.references) view.references.push_back({ref.ordinal, ref.raw_text});
        for (const auto& s : parsed.body_statements)
            if (s.distinctive.value_or(true)) view.statements.push_back({s.statement_id, s.text, s.citations});
        source.responses.push_back(std::move(view));
    }

    annotation::AnnotationStore store(request.store.value_or(rd.annotation_db()));
    return store.create_tasks(source, {request.double_fraction, request.seed});
}

} // namespace ragprobe::app
