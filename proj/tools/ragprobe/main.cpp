#include <algorithm>
#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include <unistd.h>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "ragprobe/annotation/server.hpp"
#include "ragprobe/annotation/store.hpp"
#include "ragprobe/app/commands.hpp"
#include "ragprobe/app/experiment_config.hpp"
#include "ragprobe/app/run_directory.hpp"
#include "ragprobe/common/error.hpp"
#include "ragprobe/common/jsonl.hpp"
#include "ragprobe/corpus/store.hpp"

namespace fs = std::filesystem;
using namespace ragprobe;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

std::size_t edit_distance(const std::string& a, const std::string& b)
{
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
            diag = up;
        }
    }
    return row[b.size()];
}

std::optional<std::string> closest(const std::string& word, const std::vector<std::string>& candidates)
{
    std::optional<std::string> best;
    std::size_t best_d = std::max<std::size_t>(2, word.size() / 3) + 1;
    for (const auto& c : candidates) {
        const auto d = edit_distance(word, c);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

const CLI::App* deepest_parsed(const CLI::App& app)
{
    const CLI::App* cur = &app;
    for (;;) {
        auto subs = cur->get_subcommands();
        if (subs.empty()) return cur;
        cur = subs.front();
    }
}

std::vector<std::string> candidate_words(const CLI::App& app)
{
    std::vector<std::string> out;
    for (const auto* sub : app.get_subcommands([](const CLI::App*) { return true; })) {
        out.push_back(sub->get_name());
    }
    for (const auto* opt : app.get_options()) {
        for (const auto& l : opt->get_lnames()) out.push_back("--" + l);
    }
    return out;
}

int usage_error(const CLI::App& root, const CLI::ParseError& e)
{
    const CLI::App* at = deepest_parsed(root);
    const auto extras = at->remaining();
    if (at->get_subcommands([](const CLI::App*) { return true; }).size() > 0 && !extras.empty() &&
        extras.front().rfind('-', 0) != 0) {
        std::cerr << "error: unknown subcommand '" << extras.front() << "'\n";
    } else {
        std::cerr << "error: " << e.what() << "\n";
    }
    const auto words = candidate_words(*at);
    for (const auto& extra : extras) {
        std::string token = extra.substr(0, extra.find('='));
        if (auto s = closest(token, words)) {
            std::cerr << "  '" << token << "' is not recognised; did you mean '" << *s << "'?\n";
        }
    }
    std::string path = at->get_name();
    for (const CLI::App* p = at->get_parent(); p; p = p->get_parent()) {
        path = p->get_name() + " " + path;
    }
    if (at == &root) path = root.get_name();
    std::cerr << "run '" << path << " --help' for usage\n";
    return kExitUsage;
}

std::vector<std::string> split_csv(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string part; std::getline(ss, part, ',');) {
        if (!part.empty()) out.push_back(part);
    }
    return out;
}

bool stdout_is_tty() { return ::isatty(::fileno(stdout)) != 0; }

std::string fmt_double(double v, int precision = 3)
{
    std::ostringstream os;
    os << std::fixed << std::setprecision(precision) << v;
    return os.str();
}

const std::map<std::string, retrieval::RetrieverKind> kRetrieverNames{{"bm25", retrieval::RetrieverKind::bm25},
                                                                      {"dense", retrieval::RetrieverKind::dense}};
const std::map<std::string, retrieval::MergeMode> kMergeNames{{"global", retrieval::MergeMode::global},
                                                              {"per_source", retrieval::MergeMode::per_source}};
const std::map<std::string, llm::TranscriptMode> kModeNames{{"cache", llm::TranscriptMode::cache},
                                                            {"replay", llm::TranscriptMode::replay},
                                                            {"refresh", llm::TranscriptMode::refresh}};

template <typename T>
std::vector<std::string> keys_of(const std::map<std::string, T>& m)
{
    std::vector<std::string> out;
    for (const auto& [k, v] : m) out.push_back(k);
    return out;
}

// ---- ingest ----------------------------------------------------------------

struct IngestArgs {
    fs::path corpus_dir;
    std::string name;
    std::string source = "other";
    std::vector<fs::path> inputs;
    std::size_t max_chunk_chars = corpus::kDefaultMaxChunkChars;
    bool strict = false;
};

int cmd_ingest(const IngestArgs& a)
{
    const auto source = corpus::parse_source(a.source);
    if (!source) throw InvalidArgument("unknown source tag '" + a.source + "'");
    const std::string name = a.name.empty() ? fs::absolute(a.corpus_dir).lexically_normal().filename().string() : a.name;
    corpus::CorpusStore store(a.corpus_dir, name);
    corpus::IngestOptions options{a.max_chunk_chars, a.strict};
    std::size_t skipped = 0;
    for (const auto& input : a.inputs) {
        const auto report = store.ingest_documents(input, *source, options);
        for (const auto& issue : report.issues) {
            std::cerr << input.string() << ":" << issue.line_number << ": skipped"
                      << (issue.doc_id.empty() ? "" : " '" + issue.doc_id + "'") << ": " << issue.message << "\n";
        }
        skipped += report.issues.size();
        std::cout << input.string() << ": " << report.documents_added << " documents added\n";
    }
    const auto& m = store.manifest();
    std::cout << "corpus '" << m.corpus_name << "': " << m.document_count << " documents, " << m.passage_count
              << " passages, checksum " << m.checksum.substr(0, 12) << (skipped ? ", " + std::to_string(skipped) + " lines skipped" : "")
              << "\n";
    return kExitOk;
}

// ---- index / search --------------------------------------------------------

struct CorpusSelection {
    std::vector<fs::path> corpus_dirs;
    fs::path config;
};

struct ResolvedCorpora {
    std::vector<fs::path> dirs;
    std::optional<app::ExperimentConfig> config;
};

ResolvedCorpora resolve_corpora(const CorpusSelection& sel)
{
    ResolvedCorpora out;
    if (!sel.config.empty()) {
        out.config = app::load_experiment_config(sel.config);
        for (const auto& c : out.config->corpora) out.dirs.push_back(out.config->corpus_path(c));
    }
    out.dirs.insert(out.dirs.end(), sel.corpus_dirs.begin(), sel.corpus_dirs.end());
    if (out.dirs.empty()) throw InvalidArgument("give --corpus or a --config that lists corpora");
    return out;
}

struct IndexArgs {
    CorpusSelection corpora;
    std::string kind = "bm25";
    std::string query_url;
    std::string article_url;
    std::string api_key_env;
};

int cmd_index(const IndexArgs& a)
{
    const auto kind = kRetrieverNames.at(a.kind);
    const auto resolved = resolve_corpora(a.corpora);
    std::shared_ptr<HttpTransport> transport;
    std::unique_ptr<retrieval::EmbeddingClient> embeddings;
    if (kind == retrieval::RetrieverKind::dense) {
        retrieval::EncoderEndpoints endpoints{a.query_url, a.article_url};
        std::string key_env = a.api_key_env;
        if (resolved.config && resolved.config->embedding) {
            if (endpoints.query_url.empty()) endpoints.query_url = resolved.config->embedding->endpoints.query_url;
            if (endpoints.article_url.empty()) endpoints.article_url = resolved.config->embedding->endpoints.article_url;
            if (key_env.empty()) key_env = resolved.config->embedding->api_key_env;
        }
        if (endpoints.query_url.empty() || endpoints.article_url.empty()) {
            throw ConfigError("dense indexing needs --query-url and --article-url (or endpoints.embedding in the config)");
        }
        transport = make_http_transport();
        retrieval::EmbeddingOptions eo;
        eo.api_key_env = key_env;
        embeddings = std::make_unique<retrieval::EmbeddingClient>(*transport, endpoints, eo);
    }
    for (const auto& dir : resolved.dirs) {
        const auto s = app::index_corpus(dir, kind, embeddings.get());
        std::cout << s.corpus << ": " << a.kind << " index over " << s.passages
                  << " passages -> " << s.path.string() << "\n";
    }
    return kExitOk;
}

struct SearchArgs {
    CorpusSelection corpora;
    std::string query;
    std::size_t k = 16;
    std::string kind = "bm25";
    std::string merge;
    std::string api_key_env;
    bool json = false;
};

int cmd_search(const SearchArgs& a)
{
    const auto resolved = resolve_corpora(a.corpora);
    app::SearchRequest req;
    req.corpus_dirs = resolved.dirs;
    req.query = a.query;
    req.k = a.k;
    req.kind = kRetrieverNames.at(a.kind);
    req.merge = !a.merge.empty() ? kMergeNames.at(a.merge)
                                 : (resolved.config ? resolved.config->merge : retrieval::MergeMode::global);
    req.api_key_env = a.api_key_env;
    if (req.api_key_env.empty() && resolved.config && resolved.config->embedding) {
        req.api_key_env = resolved.config->embedding->api_key_env;
    }
    const auto out = app::search_corpora(req);
    if (out.result.status == retrieval::SearchStatus::empty_query) {
        std::cerr << "query has no searchable terms\n";
    }
    for (std::size_t i = 0; i < out.result.hits.size(); ++i) {
        const auto& h = out.result.hits[i];
        const corpus::Passage* p = i < out.passages.size() ? &out.passages[i] : nullptr;
        if (a.json) {
            OrderedJson j;
            j["rank"] = h.rank;
            j["passage_id"] = h.passage_id;
            j["score"] = h.score;
            if (p) {
                j["title"] = p->title;
                j["text"] = p->text;
            }
            std::cout << j.dump() << "\n";
        } else {
            std::cout << std::setw(3) << h.rank << "  " << fmt_double(h.score, 4) << "  " << h.passage_id;
            if (p) std::cout << "  " << p->title;
            std::cout << "\n";
        }
    }
    return kExitOk;
}

// ---- run / replay / parse --------------------------------------------------

void print_table(const pipeline::BenchmarkTable& table)
{
    std::cout << std::left << std::setw(18) << "config" << std::right << std::setw(9) << "accuracy" << "  "
              << std::setw(17) << "95% CI" << std::setw(9) << "delta" << std::setw(10) << "p" << std::setw(7)
              << "failed" << "\n";
    for (const auto& c : table.cells) {
        std::cout << std::left << std::setw(18) << c.config.name << std::right << std::setw(9)
                  << (c.accuracy.value ? fmt_double(*c.accuracy.value) : "n/a") << "  " << std::setw(17)
                  << (c.accuracy.ci_low ? "[" + fmt_double(*c.accuracy.ci_low) + ", " + fmt_double(*c.accuracy.ci_high) + "]"
                                        : "")
                  << std::setw(9) << (c.delta_vs_baseline ? fmt_double(*c.delta_vs_baseline) : "")
                  << std::setw(10) << (c.mcnemar_p ? fmt_double(*c.mcnemar_p, 4) : "") << std::setw(7) << c.failed
                  << "\n";
    }
}

int cmd_run(const app::RunRequest& req)
{
    const auto s = app::run_experiment(req);
    std::cout << "snapshot " << s.snapshot_digest.substr(0, 16) << ": " << s.records << " records (" << s.reused
              << " reused, " << s.failed << " failed), " << s.network_calls << " model calls\n";
    if (s.table) print_table(*s.table);
    return kExitOk;
}

int cmd_replay(const fs::path& run_dir)
{
    const auto s = app::replay_run(run_dir);
    std::cout << s.identical << "/" << s.records << " records identical, " << s.network_calls << " model calls\n";
    for (const auto& id : s.mismatched) std::cout << "mismatch: " << id << "\n";
    return s.mismatched.empty() ? kExitOk : kExitDomain;
}

int cmd_parse(const fs::path& run_dir, bool use_llm, llm::TranscriptMode mode)
{
    const auto s = app::parse_run(run_dir, use_llm, {}, mode);
    std::cout << s.responses << " responses, " << s.statements << " statements; references: "
              << s.origins.retrieval_based << " retrieval-based, " << s.origins.self_generated << " self-generated, "
              << s.origins.unresolved << " unresolved";
    if (s.missing_reference_sections) std::cout << "; " << s.missing_reference_sections << " without a reference list";
    std::cout << "\n";
    return kExitOk;
}

// ---- tasks / serve ---------------------------------------------------------

int cmd_tasks_create(const app::TaskRequest& req)
{
    const auto counts = app::create_run_tasks(req);
    std::size_t total = 0;
    for (const auto& [stage, n] : counts) {
        std::cout << metrics::to_string(stage) << ": " << n << " tasks\n";
        total += n;
    }
    std::cout << total << " tasks created\n";
    return kExitOk;
}

struct AnnotatorArgs {
    fs::path store;
    std::string id;
    std::string name;
    std::string token;
    std::string token_env;
    std::string stages = "relevance,selection,factuality,completeness";
    bool adjudicator = false;
};

int cmd_tasks_annotator(const AnnotatorArgs& a)
{
    std::string token = a.token;
    if (!a.token_env.empty()) {
        const char* v = std::getenv(a.token_env.c_str());
        if (!v) throw ConfigError("environment variable " + a.token_env + " is not set");
        token = v;
    }
    if (token.empty()) throw InvalidArgument("give --token or --token-env");
    annotation::AnnotatorProfile p;
    p.annotator_id = a.id;
    p.display_name = a.name.empty() ? a.id : a.name;
    for (const auto& s : split_csv(a.stages)) p.stages.insert(metrics::parse_stage(s));
    p.adjudicator = a.adjudicator;
    annotation::AnnotationStore store(a.store);
    store.register_annotator(p, token);
    std::cout << "registered annotator '" << p.annotator_id << "'" << (p.adjudicator ? " (adjudicator)" : "") << "\n";
    return kExitOk;
}

int cmd_tasks_export(const fs::path& store_path, const std::string& stage, const fs::path& out)
{
    annotation::AnnotationStore store(store_path);
    std::optional<metrics::Stage> s;
    if (!stage.empty()) s = metrics::parse_stage(stage);
    const auto text = store.export_labels(s);
    if (out.empty()) {
        std::cout << text;
    } else {
        if (out.has_parent_path()) fs::create_directories(out.parent_path());
        write_file_atomic(out, text);
        std::cerr << "labels written to " << out.string() << "\n";
    }
    return kExitOk;
}

int cmd_tasks_progress(const fs::path& store_path)
{
    annotation::AnnotationStore store(store_path);
    std::cout << store.progress().dump(2) << "\n";
    return kExitOk;
}

std::atomic<bool> g_stop_requested{false};

extern "C" void on_signal(int) { g_stop_requested.store(true); }

int cmd_serve(const fs::path& store_path, const std::string& host, int port, double lease_hours)
{
    annotation::StoreOptions options;
    options.lease = std::chrono::seconds(static_cast<std::int64_t>(lease_hours * 3600.0));
    annotation::AnnotationStore store(store_path, options);
    annotation::AnnotationServer server(store);
    if (port == 0) {
        port = server.bind_any_port(host);
    } else {
        server.bind(host, port);
    }
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::jthread watcher([&server](std::stop_token st) {
        while (!st.stop_requested() && !g_stop_requested.load()) {
            std::this_thread::sleep_for(std::chrono::milliseconds(200));
        }
        server.stop();
    });
    std::cout << "serving " << store_path.string() << " on http://" << host << ":" << port << std::endl;
    server.serve();
    watcher.request_stop();
    return kExitOk;
}

// ---- eval / report ---------------------------------------------------------

struct EvalArgs {
    fs::path labels;
    fs::path runs;
    fs::path report;
    std::string ks;
    double partial_weight = 1.0;
    std::size_t replicates = 10000;
    std::uint64_t seed = 20240611;
    bool lenient = false;
    bool strict_agreement = false;
};

int cmd_eval(const EvalArgs& a)
{
    app::EvalRequest req;
    req.labels = a.labels;
    if (!a.runs.empty()) req.run_dir = a.runs;
    if (!a.report.empty()) req.out = a.report;
    if (!a.ks.empty()) {
        req.options.ks.clear();
        for (const auto& k : split_csv(a.ks)) {
            std::size_t pos = 0;
            const auto v = std::stoul(k, &pos);
            if (pos != k.size() || v == 0) throw InvalidArgument("bad k '" + k + "' in --ks");
            req.options.ks.push_back(v);
        }
    }
    req.options.partial_weight = a.partial_weight;
    req.options.bootstrap_replicates = a.replicates;
    req.options.seed = a.seed;
    req.options.merge_partial_for_agreement = !a.strict_agreement;
    req.lenient = a.lenient;
    const auto s = app::evaluate_run(req);
    for (const auto& v : s.violations) std::cerr << v.location << ": " << v.message << "\n";
    std::cout << s.metrics << " metric values written to " << s.report_path.string() << "\n";
    if (!s.missing.empty()) {
        std::cout << "missing inputs:";
        for (const auto& m : s.missing) std::cout << " " << m;
        std::cout << "\n";
    }
    return kExitOk;
}

int cmd_report(const fs::path& run_dir, bool color, bool json)
{
    const auto out = app::build_report(run_dir, color);
    if (json) {
        std::cout << out.summary.dump(2) << "\n";
    } else {
        std::cout << out.text;
    }
    return kExitOk;
}

void add_corpus_selection(CLI::App* cmd, CorpusSelection& sel)
{
    cmd->add_option("--corpus", sel.corpus_dirs, "Corpus directory (repeatable)");
    cmd->add_option("--config", sel.config, "Experiment config; its corpora are used")->check(CLI::ExistingFile);
}

int run_cli(int argc, char** argv)
{
    CLI::App app{"Retrieval-augmented answering experiments: corpora, runs, annotation and evaluation", "ragprobe"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");
    bool verbose = false;
    app.add_flag("-v,--verbose", verbose, "Log progress and retries to stderr");

    IngestArgs ingest;
    auto* c_ingest = app.add_subcommand("ingest", "Add documents from line-delimited files to a corpus");
    c_ingest->add_option("--corpus", ingest.corpus_dir, "Corpus directory (created if needed)")->required();
    c_ingest->add_option("--name", ingest.name, "Corpus name (default: directory name)");
    c_ingest->add_option("--source", ingest.source, "Source tag for records without one")
        ->check(CLI::IsMember({"pubmed", "statpearls", "wikipedia", "textbook", "guideline", "other"}));
    c_ingest->add_option("--max-chunk-chars", ingest.max_chunk_chars, "Chunk size cap in characters")
        ->check(CLI::PositiveNumber);
    c_ingest->add_flag("--strict", ingest.strict, "Abort on the first malformed line");
    c_ingest->add_option("inputs", ingest.inputs, "Document files")->required()->check(CLI::ExistingFile);

    IndexArgs index;
    auto* c_index = app.add_subcommand("index", "Build a BM25 or dense index for each corpus");
    add_corpus_selection(c_index, index.corpora);
    c_index->add_option("--retriever", index.kind, "bm25 or dense")
        ->check(CLI::IsMember(keys_of(kRetrieverNames)));
    c_index->add_option("--query-url", index.query_url, "Query encoder endpoint (dense)");
    c_index->add_option("--article-url", index.article_url, "Article encoder endpoint (dense)");
    c_index->add_option("--api-key-env", index.api_key_env, "Variable holding the encoder API key");

    SearchArgs search;
    auto* c_search = app.add_subcommand("search", "Query one or more corpora");
    add_corpus_selection(c_search, search.corpora);
    c_search->add_option("--query", search.query, "Query text")->required();
    c_search->add_option("-k,--k", search.k, "Number of passages")->check(CLI::PositiveNumber);
    c_search->add_option("--retriever", search.kind, "bm25 or dense")
        ->check(CLI::IsMember(keys_of(kRetrieverNames)));
    c_search->add_option("--merge", search.merge, "global or per_source")
        ->check(CLI::IsMember(keys_of(kMergeNames)));
    c_search->add_option("--api-key-env", search.api_key_env, "Variable holding the encoder API key");
    c_search->add_flag("--json", search.json, "One JSON record per hit");

    app::RunRequest run;
    fs::path run_dataset;
    fs::path run_queries;
    std::size_t run_limit = 0;
    std::size_t run_parallel = 0;
    auto* c_run = app.add_subcommand("run", "Run pipeline configurations over a dataset or query set");
    c_run->add_option("--config", run.config_path, "Experiment config")->required()->check(CLI::ExistingFile);
    auto* o_dataset = c_run->add_option("--dataset", run_dataset, "Multiple-choice items (JSONL)")
                          ->check(CLI::ExistingFile);
    auto* o_queries = c_run->add_option("--queries", run_queries, "Free-text queries (JSONL)")
                          ->check(CLI::ExistingFile);
    o_dataset->excludes(o_queries);
    c_run->add_option("--run-dir", run.run_dir, "Run directory")->required();
    c_run->add_flag("--grid", run.use_grid, "Run the config's grid instead of its pipelines list");
    std::string run_mode = "cache";
    c_run->add_option("--mode", run_mode, "Transcript mode: cache, replay or refresh")
        ->check(CLI::IsMember(keys_of(kModeNames)));
    c_run->add_option("--limit", run_limit, "Sample this many items (seeded)")->check(CLI::PositiveNumber);
    c_run->add_option("--parallel", run_parallel, "Concurrent items")->check(CLI::PositiveNumber);
    c_run->add_flag("--retry-failed", run.retry_failed, "Rerun stored records that carry a stage error");

    fs::path parse_dir;
    bool parse_llm = false;
    std::string parse_mode = "cache";
    auto* c_parse = app.add_subcommand("parse", "Split responses into statements and references");
    c_parse->add_option("--run-dir", parse_dir, "Run directory")->required()->check(CLI::ExistingDirectory);
    c_parse->add_flag("--llm", parse_llm, "Extract statements with the model instead of sentence splitting");
    c_parse->add_option("--mode", parse_mode, "Transcript mode: cache, replay or refresh")
        ->check(CLI::IsMember(keys_of(kModeNames)));

    auto* c_tasks = app.add_subcommand("tasks", "Annotation tasks and annotators");
    c_tasks->require_subcommand(1);

    app::TaskRequest tasks_create;
    fs::path tasks_store;
    std::string relevance_config;
    auto* c_tcreate = c_tasks->add_subcommand("create", "Create annotation tasks from a parsed run");
    c_tcreate->add_option("--run-dir", tasks_create.run_dir, "Run directory")->required()->check(CLI::ExistingDirectory);
    c_tcreate->add_option("--gold", tasks_create.gold, "Gold statements (JSONL)")->required()->check(CLI::ExistingFile);
    c_tcreate->add_option("--store", tasks_store, "Annotation database (default: <run-dir>/annotation.db)");
    c_tcreate->add_option("--double-fraction", tasks_create.double_fraction, "Share of tasks annotated twice")
        ->check(CLI::Range(0.0, 1.0));
    c_tcreate->add_option("--seed", tasks_create.seed, "Seed for double-annotation sampling");
    c_tcreate->add_option("--relevance-config", relevance_config, "Pipeline whose retrieval lists are judged");

    AnnotatorArgs annotator;
    auto* c_tann = c_tasks->add_subcommand("annotator", "Register an annotator");
    c_tann->add_option("--store", annotator.store, "Annotation database")->required();
    c_tann->add_option("--id", annotator.id, "Annotator id")->required();
    c_tann->add_option("--name", annotator.name, "Display name");
    auto* o_token = c_tann->add_option("--token", annotator.token, "Bearer token (at least 8 characters)");
    auto* o_token_env = c_tann->add_option("--token-env", annotator.token_env, "Variable holding the bearer token");
    o_token->excludes(o_token_env);
    c_tann->add_option("--stages", annotator.stages, "Comma-separated stages");
    c_tann->add_flag("--adjudicator", annotator.adjudicator, "Resolves disagreements");

    fs::path export_store;
    std::string export_stage;
    fs::path export_out;
    auto* c_texport = c_tasks->add_subcommand("export", "Write submitted labels as label records");
    c_texport->add_option("--store", export_store, "Annotation database")->required()->check(CLI::ExistingFile);
    c_texport->add_option("--stage", export_stage, "Only this stage")
        ->check(CLI::IsMember({"relevance", "selection", "factuality", "completeness"}));
    c_texport->add_option("--out", export_out, "Output file (default: stdout)");

    fs::path progress_store;
    auto* c_tprogress = c_tasks->add_subcommand("progress", "Print task counts per stage and status");
    c_tprogress->add_option("--store", progress_store, "Annotation database")->required()->check(CLI::ExistingFile);

    fs::path serve_store;
    std::string serve_host = "127.0.0.1";
    int serve_port = 8080;
    double serve_lease_hours = 24.0;
    auto* c_serve = app.add_subcommand("serve", "Serve the annotation REST API");
    c_serve->add_option("--store", serve_store, "Annotation database")->required();
    c_serve->add_option("--host", serve_host, "Listen address");
    c_serve->add_option("--port", serve_port, "Listen port (0 picks a free one)")->check(CLI::Range(0, 65535));
    c_serve->add_option("--lease-hours", serve_lease_hours, "Claim lease duration")->check(CLI::PositiveNumber);

    EvalArgs eval;
    auto* c_eval = app.add_subcommand("eval", "Compute metrics from label files");
    c_eval->add_option("--labels", eval.labels, "Label file or directory")->required()->check(CLI::ExistingPath);
    c_eval->add_option("--runs", eval.runs, "Run directory or runs file (for filter evaluation)")
        ->check(CLI::ExistingPath);
    c_eval->add_option("--report,--out", eval.report, "Report path (default: <runs>/reports/eval.json)");
    c_eval->add_option("--ks", eval.ks, "Comma-separated retrieval depths");
    c_eval->add_option("--partial-weight", eval.partial_weight, "Weight of partial support in coverage")
        ->check(CLI::Range(0.0, 1.0));
    c_eval->add_option("--replicates", eval.replicates, "Bootstrap replicates")->check(CLI::PositiveNumber);
    c_eval->add_option("--seed", eval.seed, "Bootstrap seed");
    c_eval->add_flag("--lenient", eval.lenient, "Report label schema violations instead of failing");
    c_eval->add_flag("--strict-agreement", eval.strict_agreement,
                     "Keep partial and full support apart when computing agreement");

    fs::path report_dir;
    bool report_color = false;
    bool report_no_color = false;
    bool report_json = false;
    auto* c_report = app.add_subcommand("report", "Summarise evaluation and accuracy reports");
    c_report->add_option("--run-dir", report_dir, "Run directory")->required()->check(CLI::ExistingDirectory);
    auto* f_color = c_report->add_flag("--color", report_color, "Force ANSI colours");
    c_report->add_flag("--no-color", report_no_color, "Disable ANSI colours")->excludes(f_color);
    c_report->add_flag("--json", report_json, "Print the machine-readable summary");

    fs::path replay_dir;
    auto* c_replay = app.add_subcommand("replay", "Re-execute a run from transcripts and compare records");
    c_replay->add_option("--run-dir", replay_dir, "Run directory")->required()->check(CLI::ExistingDirectory);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return usage_error(app, e);
    }

    auto logger = spdlog::stderr_color_mt("ragprobe");
    logger->set_level(verbose ? spdlog::level::info : spdlog::level::warn);
    spdlog::set_default_logger(logger);

    if (*c_ingest) return cmd_ingest(ingest);
    if (*c_index) return cmd_index(index);
    if (*c_search) return cmd_search(search);
    if (*c_run) {
        if (run_dataset.empty() == run_queries.empty()) {
            std::cerr << "error: run needs exactly one of --dataset or --queries\n";
            return kExitUsage;
        }
        if (!run_dataset.empty()) run.dataset = run_dataset;
        if (!run_queries.empty()) run.queries = run_queries;
        run.mode = kModeNames.at(run_mode);
        if (run_limit) run.limit = run_limit;
        if (run_parallel) run.parallelism = run_parallel;
        return cmd_run(run);
    }
    if (*c_parse) return cmd_parse(parse_dir, parse_llm, kModeNames.at(parse_mode));
    if (*c_tcreate) {
        if (!tasks_store.empty()) tasks_create.store = tasks_store;
        if (!relevance_config.empty()) tasks_create.relevance_config = relevance_config;
        return cmd_tasks_create(tasks_create);
    }
    if (*c_tann) return cmd_tasks_annotator(annotator);
    if (*c_texport) return cmd_tasks_export(export_store, export_stage, export_out);
    if (*c_tprogress) return cmd_tasks_progress(progress_store);
    if (*c_serve) return cmd_serve(serve_store, serve_host, serve_port, serve_lease_hours);
    if (*c_eval) return cmd_eval(eval);
    if (*c_report) {
        const bool color = report_color || (!report_no_color && stdout_is_tty());
        return cmd_report(report_dir, color, report_json);
    }
    if (*c_replay) return cmd_replay(replay_dir);
    return kExitUsage;
}

} // namespace

int main(int argc, char** argv)
{
    try {
        return run_cli(argc, argv);
    } catch (const ragprobe::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    } catch (const Json::exception& e) {
        std::cerr << "error: malformed JSON: " << e.what() << "\n";
        return kExitDomain;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    }
}
