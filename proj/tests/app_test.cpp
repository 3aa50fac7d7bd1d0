#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <regex>

#include "annotation_fixture.hpp"
#include "ragprobe/annotation/store.hpp"
#include "ragprobe/common/text.hpp"
#include "ragprobe/metrics/labels.hpp"
#include "scripted.hpp"
#include "test_support.hpp"
#include "chat_server.hpp"

namespace ragprobe::app {
namespace {

using ragprobe::testing::TempDir;
using ragprobe::testing::write_records;
using ragprobe::testing::write_text;
namespace fs = std::filesystem;

struct CliResult {
    int code = -1;
    std::string output; // stdout and stderr interleaved
};

std::string quote(const std::string& s)
{
    std::string out = "'";
    for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return out + "'";
}

CliResult cli(const std::vector<std::string>& args)
{
    std::string cmd = quote(RAGPROBE_BIN);
    for (const auto& a : args) cmd += " " + quote(a);
    cmd += " 2>&1";
    CliResult r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) return r;
    char buf[4096];
    for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, pipe)) > 0;) r.output.append(buf, n);
    const int status = ::pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

// ---- exit-code contract ---------------------------------------------------

TEST(CliUsage, HelpExitsZero)
{
    const auto r = cli({"--help"});
    EXPECT_EQ(r.code, 0);
    for (const char* sub : {"ingest", "index", "search", "run", "parse", "tasks", "serve", "eval", "report", "replay"})
        EXPECT_TRUE(contains(r.output, sub)) << sub;
    EXPECT_EQ(cli({"eval", "--help"}).code, 0);
    EXPECT_EQ(cli({"tasks", "create", "--help"}).code, 0);
}

TEST(CliUsage, UnknownSubcommandIsUsageError)
{
    const auto r = cli({"evl"});
    EXPECT_EQ(r.code, 2);
    EXPECT_TRUE(contains(r.output, "did you mean 'eval'")) << r.output;
    EXPECT_EQ(cli({}).code, 2);
}

TEST(CliUsage, UnknownFlagSuggestsTheClosestOne)
{
    TempDir dir;
    write_text(dir / "labels.jsonl", "");
    const auto r = cli({"eval", "--labels", (dir / "labels.jsonl").string(), "--replicate", "10"});
    EXPECT_EQ(r.code, 2);
    EXPECT_TRUE(contains(r.output, "did you mean '--replicates'")) << r.output;
}

TEST(CliUsage, MissingRequiredOptionIsUsageError)
{
    EXPECT_EQ(cli({"eval"}).code, 2);
    EXPECT_EQ(cli({"report"}).code, 2);
    EXPECT_EQ(cli({"eval", "--labels", "/nonexistent/labels.jsonl"}).code, 2);
}

TEST(CliUsage, DomainErrorsExitOne)
{
    TempDir dir;
    write_text(dir / "labels.jsonl", metrics::header_record(std::nullopt).dump() + "\n");
    // No --runs and no --out: nowhere to write the report.
    const auto r = cli({"eval", "--labels", (dir / "labels.jsonl").string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_TRUE(contains(r.output, "error:")) << r.output;
    fs::create_directories(dir / "empty-run");
    EXPECT_EQ(cli({"report", "--run-dir", (dir / "empty-run").string()}).code, 1);
}

TEST(CliRun, GridWithFilteringWithoutRetrievalNamesTheInvariant)
{
    TempDir dir;
    const Json config{{"version", 1},
                      {"endpoints", {{"response", {{"url", "http://127.0.0.1:9/v1/chat/completions"}, {"model", "m"}}}}},
                      {"grid", {{"ks", {1}}}},
                      {"pipelines", {{{"name", "broken"}, {"use_retrieval", false}, {"use_filtering", true}}}}};
    write_text(dir / "config.json", config.dump());
    write_records(dir / "items.jsonl", {Json{{"item_id", "i1"},
                                             {"question", "q?"},
                                             {"options", {{"A", "x"}, {"B", "y"}}},
                                             {"gold", "A"}}});
    const auto r = cli({"run", "--config", (dir / "config.json").string(), "--dataset", (dir / "items.jsonl").string(),
                        "--run-dir", (dir / "run").string(), "--grid"});
    EXPECT_EQ(r.code, 1);
    EXPECT_TRUE(contains(r.output, "use_filtering requires use_retrieval")) << r.output;
    EXPECT_FALSE(fs::exists(dir / "run" / "runs.jsonl"));
}

// ---- end to end over a local chat endpoint --------------------------------

const char* const kRationale = "Aminoglycoside clearance falls with renal function, so extend the dosing interval.";

std::string chat_reply(const std::string& prompt)
{
    switch (scripted::classify(prompt)) {
    case scripted::Prompt::reformulation: return kRationale;
    case scripted::Prompt::filter:
        return contains(text::to_lower_ascii(scripted::filter_passage(prompt)), "renal") ? "Yes" : "No";
    case scripted::Prompt::response_rag:
        return "Extending the dosing interval is advised [1]. Levels guide later doses [2].\n\n"
               "The final answer is (C).\n\n### References\n[1] Renal dosing of aminoglycosides\n"
               "[2] Therapeutic drug monitoring\n";
    case scripted::Prompt::response_nonrag:
        return contains(prompt, "Case 0") ? "The final answer is (C)." : "The final answer is (A).";
    default: return "[]";
    }
}

class EndToEnd : public ::testing::Test {
protected:
    TempDir dir;
    std::unique_ptr<testing::ChatServer> chat;
    fs::path run_dir;
    std::size_t items = 4;

    void SetUp() override
    {
        chat = std::make_unique<testing::ChatServer>(chat_reply);
        run_dir = dir / "run";
        const std::vector<std::pair<std::string, std::string>> docs{
            {"Renal dosing of aminoglycosides", "In renal impairment the dosing interval of gentamicin is extended."},
            {"Therapeutic drug monitoring", "Trough levels guide later aminoglycoside doses in renal failure."},
            {"Hepatic metabolism", "Many drugs are cleared by the liver and need hepatic adjustment."},
            {"Penicillin allergy", "Cross reactivity with cephalosporins is low."},
            {"Renal replacement therapy", "Dialysis removes aminoglycosides and changes renal dosing needs."},
            {"Hypertension", "First line agents include thiazides and ACE inhibitors."}};
        std::vector<Json> records;
        for (std::size_t i = 0; i < docs.size(); ++i)
            records.push_back(Json{{"doc_id", "doc" + std::to_string(i)},
                                   {"title", docs[i].first},
                                   {"body", docs[i].second},
                                   {"source", "textbook"}});
        write_records(dir / "docs.jsonl", records);
        ASSERT_EQ(cli({"ingest", "--corpus", (dir / "corpus").string(), "--name", "notes",
                       (dir / "docs.jsonl").string()})
                      .code,
                  0);
        ASSERT_EQ(cli({"index", "--corpus", (dir / "corpus").string()}).code, 0);

        const Json config{{"version", 1},
                          {"endpoints", {{"response", {{"url", chat->url()}, {"model", "test-model"}}}}},
                          {"corpora", {{{"name", "notes"}, {"path", "corpus"}}}},
                          {"grid", {{"ks", {1, 2}}, {"retriever", "bm25"}, {"seed", 11}}},
                          {"benchmark", {{"bootstrap_replicates", 200}}}};
        write_text(dir / "config.json", config.dump(2));

        std::vector<Json> item_records, gold;
        for (std::size_t i = 0; i < items; ++i) {
            const std::string id = "item" + std::to_string(i);
            item_records.push_back(Json{{"item_id", id},
                                        {"question", "Case " + std::to_string(i) +
                                                         ": gentamicin in renal impairment. Which adjustment?"},
                                        {"options", {{"A", "double the dose"}, {"B", "no change"},
                                                     {"C", "extend the interval"}, {"D", "stop the drug"}}},
                                        {"gold", "C"},
                                        {"dataset", "custom"}});
            gold.push_back(Json{{"query_id", id},
                                {"query_type", "usmle"},
                                {"text", "renal dosing"},
                                {"must_have", {"The dosing interval is extended.", "Levels guide dosing."}}});
        }
        write_records(dir / "items.jsonl", item_records);
        write_records(dir / "gold.jsonl", gold);

        const auto r = run_grid();
        ASSERT_EQ(r.code, 0) << r.output;
    }

    CliResult run_grid()
    {
        return cli({"run", "--config", (dir / "config.json").string(), "--dataset", (dir / "items.jsonl").string(),
                    "--run-dir", run_dir.string(), "--grid"});
    }
};

TEST_F(EndToEnd, GridRunWritesAccuracyCells)
{
    const Json acc = Json::parse(read_file(run_dir / "reports" / "accuracy.json")).at("accuracy");
    const auto& cells = acc.at("cells");
    ASSERT_EQ(cells.size(), 1u + 4u * 2u);
    EXPECT_EQ(acc.at("baseline"), "no_rag");
    for (const auto& c : cells) {
        EXPECT_EQ(c.at("n"), items);
        EXPECT_FALSE(c.at("accuracy").at("ci_low").is_null());
    }
    // Baseline answers only case 0 correctly; every RAG response answers C.
    EXPECT_DOUBLE_EQ(cells[0].at("accuracy").at("value").get<double>(), 0.25);
    for (std::size_t i = 1; i < cells.size(); ++i) {
        EXPECT_DOUBLE_EQ(cells[i].at("accuracy").at("value").get<double>(), 1.0);
        EXPECT_DOUBLE_EQ(cells[i].at("delta_vs_baseline").get<double>(), 0.75);
    }
    EXPECT_EQ(read_jsonl(run_dir / "runs.jsonl").size(), cells.size() * items);
    EXPECT_TRUE(fs::exists(run_dir / "config.snapshot.json"));
}

TEST_F(EndToEnd, RerunAndReplayMakeNoModelCalls)
{
    const std::size_t calls = chat->requests();
    const std::string runs = read_file(run_dir / "runs.jsonl");
    const auto again = run_grid();
    ASSERT_EQ(again.code, 0) << again.output;
    EXPECT_TRUE(contains(again.output, " 0 model calls")) << again.output;
    EXPECT_EQ(chat->requests(), calls);
    EXPECT_EQ(read_file(run_dir / "runs.jsonl"), runs);

    const auto replay = cli({"replay", "--run-dir", run_dir.string()});
    EXPECT_EQ(replay.code, 0) << replay.output;
    const std::string expected = std::to_string(9 * items) + "/" + std::to_string(9 * items) + " records identical";
    EXPECT_TRUE(contains(replay.output, expected)) << replay.output;
    EXPECT_EQ(chat->requests(), calls);
}

TEST_F(EndToEnd, SearchPrintsRankedHits)
{
    const auto r = cli({"search", "--config", (dir / "config.json").string(), "--query", "renal dosing interval",
                        "-k", "3", "--json"});
    ASSERT_EQ(r.code, 0) << r.output;
    std::vector<Json> hits;
    for (const auto& line : text::split_lines(r.output))
        if (!line.empty()) hits.push_back(Json::parse(line));
    ASSERT_EQ(hits.size(), 3u);
    EXPECT_EQ(hits[0].at("rank"), 1);
    EXPECT_GE(hits[0].at("score").get<double>(), hits[1].at("score").get<double>());
}

TEST_F(EndToEnd, AnnotateEvaluateAndReport)
{
    ASSERT_EQ(cli({"parse", "--run-dir", run_dir.string()}).code, 0);
    const auto created = cli({"tasks", "create", "--run-dir", run_dir.string(), "--gold", (dir / "gold.jsonl").string(),
                              "--double-fraction", "0.5", "--seed", "3"});
    ASSERT_EQ(created.code, 0) << created.output;
    EXPECT_TRUE(contains(created.output, "relevance: 4 tasks")) << created.output;

    const fs::path db = run_dir / "annotation.db";
    for (const char* who : {"ann1", "ann2"})
        ASSERT_EQ(cli({"tasks", "annotator", "--store", db.string(), "--id", who, "--token",
                       std::string(who) + "-secret"})
                      .code,
                  0);
    {
        annotation::AnnotationStore store(db);
        testing::Gen g(9);
        for (auto stage : {annotation::Stage::relevance, annotation::Stage::selection, annotation::Stage::factuality,
                           annotation::Stage::completeness})
            for (const char* who : {"ann1", "ann2"})
                while (auto t = store.claim_next(who, stage))
                    store.submit_labels(t->task_id, who,
                                        testing::full_labels(*t, [&](std::size_t) { return g.uniform(0, 5); }));
    }
    const fs::path labels = dir / "labels" / "all.jsonl";
    ASSERT_EQ(cli({"tasks", "export", "--store", db.string(), "--out", labels.string()}).code, 0);

    const auto eval = cli({"eval", "--labels", labels.string(), "--runs", run_dir.string(), "--replicates", "200"});
    ASSERT_EQ(eval.code, 0) << eval.output;
    ASSERT_TRUE(fs::exists(run_dir / "reports" / "eval.json"));
    const Json report = Json::parse(read_file(run_dir / "reports" / "eval.json"));
    EXPECT_EQ(report.at("label_violations"), 0);
    EXPECT_FALSE(report.at("snapshot_digest").is_null());

    const auto text_report = cli({"report", "--run-dir", run_dir.string(), "--no-color"});
    ASSERT_EQ(text_report.code, 0) << text_report.output;
    const auto json_report = cli({"report", "--run-dir", run_dir.string(), "--json"});
    ASSERT_EQ(json_report.code, 0) << json_report.output;
    const Json summary = Json::parse(json_report.output);
    EXPECT_TRUE(summary.at("missing").empty()) << summary.at("missing").dump();
    EXPECT_EQ(summary.at("accuracy_cells"), 9);
    std::set<std::string> names;
    for (const auto& m : summary.at("metrics")) names.insert(m.at("metric").get<std::string>());
    for (const char* family :
         {"precision@", "miss@", "coverage@", "selection_precision", "selection_recall", "factuality_response",
          "factuality_statement", "factuality_by_evidence", "completeness_response", "completeness_statement",
          "completeness_by_support", "krippendorff_alpha", "filter_precision", "filter_recall", "filter_f1",
          "accuracy"}) {
        EXPECT_TRUE(std::any_of(names.begin(), names.end(), [&](const std::string& n) { return n.starts_with(family); }))
            << family;
        EXPECT_TRUE(contains(text::to_lower_ascii(text_report.output), family)) << family;
    }
    EXPECT_TRUE(contains(text_report.output, "k=2")) << text_report.output;
    EXPECT_TRUE(fs::exists(run_dir / "reports" / "report.txt"));

    // Without completeness labels the report still renders, with explicit missing cells.
    std::string partial;
    for (const auto& line : text::split_lines(read_file(labels)))
        if (!line.empty() && !contains(line, "\"type\":\"completeness\"")) partial += line + "\n";
    write_text(dir / "partial.jsonl", partial);
    const fs::path other = dir / "other";
    ASSERT_EQ(cli({"eval", "--labels", (dir / "partial.jsonl").string(), "--runs", run_dir.string(), "--out",
                   (other / "reports" / "eval.json").string(), "--replicates", "200"})
                  .code,
              0);
    const auto missing = cli({"report", "--run-dir", other.string(), "--no-color"});
    ASSERT_EQ(missing.code, 0) << missing.output;
    EXPECT_TRUE(contains(missing.output, "completeness_response\tmissing")) << missing.output;
    EXPECT_TRUE(contains(missing.output, "accuracy\tmissing")) << missing.output;
    EXPECT_FALSE(contains(missing.output, "factuality_response\tmissing")) << missing.output;
}

} // namespace
} // namespace ragprobe::app
