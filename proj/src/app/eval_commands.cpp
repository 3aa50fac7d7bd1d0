#include <algorithm>
#include <cstdio>
#include <sstream>

#include "ragprobe/app/commands.hpp"
#include "ragprobe/app/run_directory.hpp"
#include "ragprobe/common/error.hpp"
#include "ragprobe/metrics/labels.hpp"
#include "ragprobe/pipeline/filter_eval.hpp"
#include "ragprobe/pipeline/run_record.hpp"

namespace ragprobe::app {
namespace {

struct RunLocation {
    std::filesystem::path runs_file;
    std::filesystem::path reports_dir;
    std::optional<std::string> snapshot_digest;
};

RunLocation locate_run(const std::filesystem::path& p)
{
    RunLocation loc;
    if (std::filesystem::is_regular_file(p)) {
        loc.runs_file = p;
        loc.reports_dir = p.parent_path() / "reports";
        return loc;
    }
    if (!std::filesystem::is_directory(p)) throw NotFound("no run directory or runs file at " + p.string());
    loc.runs_file = p / "runs.jsonl";
    loc.reports_dir = p / "reports";
    if (std::filesystem::exists(p / "config.snapshot.json")) loc.snapshot_digest = RunDirectory::open(p).digest();
    return loc;
}

const char* const kFamilies[] = {
    "precision@k",          "miss@k",                 "coverage@k",           "selection_precision",
    "selection_recall",     "factuality_response",    "factuality_statement", "factuality_by_evidence",
    "completeness_response", "completeness_statement", "completeness_by_support", "krippendorff_alpha",
    "filter_precision",     "filter_recall",          "filter_f1",            "accuracy",
};

bool family_matches(const std::string& family, const std::string& metric)
{
    if (family.ends_with("@k")) return metric.starts_with(family.substr(0, family.size() - 1));
    return metric == family;
}

std::string fmt(double v, const char* spec = "%.3f")
{
    char buf[32];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::string variant_of(const pipeline::PipelineConfig& c)
{
    if (!c.use_retrieval) return "no retrieval";
    const std::string def = pipeline::default_name(c);
    if (c.name != def) return c.name;
    return def.substr(0, def.find('@'));
}

std::string accuracy_grid(const Json& accuracy, bool color)
{
    std::vector<std::size_t> ks;
    std::vector<std::string> rows;
    std::map<std::pair<std::string, std::size_t>, std::string> cells;
    std::string baseline_line;
    for (const auto& cell : accuracy.at("cells")) {
        const auto pc = pipeline::config_from_json(cell.at("config"));
        const auto acc = metrics::metric_report_from_json(cell.at("accuracy"));
        std::string text = acc.value ? fmt(*acc.value) : std::string("n/a");
        if (acc.ci_low && acc.ci_high) text += " [" + fmt(*acc.ci_low) + ", " + fmt(*acc.ci_high) + "]";
        if (cell.at("failed").get<std::size_t>() > 0) text += " !" + std::to_string(cell.at("failed").get<std::size_t>());
        if (!pc.use_retrieval) {
            baseline_line = "baseline (" + pc.name + "): " + text + "\n";
            continue;
        }
        std::string marker = " ";
        const char* open = "";
        if (!cell.at("delta_vs_baseline").is_null()) {
            const double d = cell.at("delta_vs_baseline");
            marker = d > 0 ? "+" : d < 0 ? "-" : "=";
            if (color) open = d > 0 ? "\x1b[32m" : d < 0 ? "\x1b[31m" : "";
            if (!cell.at("mcnemar_p").is_null() && cell.at("mcnemar_p").get<double>() < 0.05) marker += "*";
        }
        text = marker + " " + text;
        if (*open) text = std::string(open) + text + "\x1b[0m";
        const std::string row = variant_of(pc);
        if (std::find(rows.begin(), rows.end(), row) == rows.end()) rows.push_back(row);
        if (std::find(ks.begin(), ks.end(), pc.k) == ks.end()) ks.push_back(pc.k);
        cells[{row, pc.k}] = text;
    }
    std::sort(ks.begin(), ks.end());
    std::ostringstream os;
    os << baseline_line;
    for (const auto& row : rows) {
        os << row << "\n";
        for (auto k : ks) {
            auto it = cells.find({row, k});
            os << "  k=" << k << "\t" << (it == cells.end() ? std::string("missing") : it->second) << "\n";
        }
    }
    os << "(+ gain / - drop vs. baseline; * McNemar p < 0.05; !n failed items)\n";
    return os.str();
}

} // namespace

EvalSummary evaluate_run(const EvalRequest& request)
{
    metrics::LabelSet labels;
    EvalSummary summary;
    if (std::filesystem::is_directory(request.labels))
        labels = metrics::read_label_dir(request.labels, summary.violations);
    else if (std::filesystem::exists(request.labels))
        labels = metrics::read_label_file(request.labels, summary.violations);
    else
        throw NotFound("no label file or directory at " + request.labels.string());
    if (!summary.violations.empty() && !request.lenient) {
        const auto& v = summary.violations.front();
        throw SchemaError(std::to_string(summary.violations.size()) + " label schema violation(s); first at " +
                          v.location + ": " + v.message);
    }

    metrics::EvalResult result = metrics::evaluate_labels(labels, request.options);
    Json filter = Json::array();
    std::optional<RunLocation> run;
    if (request.run_dir) {
        run = locate_run(*request.run_dir);
        const pipeline::RunStore runs(run->runs_file);
        const auto records = runs.all();
        const bool filtered = std::any_of(records.begin(), records.end(),
                                          [](const auto& r) { return !r.filter_verdicts.empty(); });
        if (filtered && labels.relevance.empty()) {
            result.missing.push_back("relevance labels for filter precision/recall");
        } else if (filtered) {
            for (const auto& e : pipeline::evaluate_filter(records, metrics::build_query_relevance(labels))) {
                result.reports.push_back(e.prf.precision);
                result.reports.push_back(e.prf.recall);
                result.reports.push_back(e.prf.f1);
                filter.push_back(Json{{"config", e.config_name},
                                      {"pairs", e.pairs},
                                      {"unlabeled_pairs", e.unlabeled_pairs},
                                      {"tp", e.prf.counts.tp},
                                      {"fp", e.prf.counts.fp},
                                      {"fn", e.prf.counts.fn},
                                      {"tn", e.prf.counts.tn}});
            }
        }
    }
    Json reference_lines = Json::array();
    for (const auto& line : pipeline::filter_reference_lines())
        reference_lines.push_back(Json{{"label", line.label}, {"f1", line.f1}});

    std::filesystem::path out;
    if (request.out)
        out = *request.out;
    else if (run)
        out = run->reports_dir / "eval.json";
    else
        throw InvalidArgument("pass --out or --runs to say where the report goes");

    Json report = metrics::to_json(result);
    report["snapshot_digest"] = run && run->snapshot_digest ? Json(*run->snapshot_digest) : Json(nullptr);
    report["filter"] = filter;
    report["filter_reference_lines"] = reference_lines;
    report["label_violations"] = summary.violations.size();
    if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
    write_file_atomic(out, report.dump(2) + "\n");

    summary.report_path = out;
    summary.metrics = result.reports.size();
    summary.missing = result.missing;
    return summary;
}

ReportOutput build_report(const std::filesystem::path& run_dir, bool color)
{
    const auto reports_dir = run_dir / "reports";
    const auto eval_path = reports_dir / "eval.json";
    const auto accuracy_path = reports_dir / "accuracy.json";
    const bool have_eval = std::filesystem::exists(eval_path);
    const bool have_accuracy = std::filesystem::exists(accuracy_path);
    if (!have_eval && !have_accuracy)
        throw NotFound("no reports in " + reports_dir.string() + "; run 'ragprobe eval' or 'ragprobe run' first");

    std::vector<metrics::MetricReport> all;
    Json eval = Json::object();
    if (have_eval) {
        eval = Json::parse(read_file(eval_path));
        for (const auto& r : eval.at("reports")) all.push_back(metrics::metric_report_from_json(r));
    }
    Json accuracy;
    std::size_t accuracy_cells = 0;
    if (have_accuracy) {
        accuracy = Json::parse(read_file(accuracy_path)).at("accuracy");
        for (const auto& cell : accuracy.at("cells")) {
            all.push_back(metrics::metric_report_from_json(cell.at("accuracy")));
            ++accuracy_cells;
        }
    }

    std::ostringstream os;
    std::vector<std::string> missing;
    const std::vector<std::pair<std::string, std::vector<std::string>>> sections = {
        {"Retrieval", {"precision@k", "miss@k", "coverage@k"}},
        {"Evidence selection", {"selection_precision", "selection_recall"}},
        {"Factuality", {"factuality_response", "factuality_statement", "factuality_by_evidence"}},
        {"Completeness", {"completeness_response", "completeness_statement", "completeness_by_support"}},
        {"Annotator agreement", {"krippendorff_alpha"}},
        {"Evidence filter", {"filter_precision", "filter_recall", "filter_f1"}},
    };
    for (const auto& [title, families] : sections) {
        os << "== " << title << " ==\n";
        std::vector<metrics::MetricReport> rows;
        for (const auto& family : families) {
            std::size_t found = 0;
            for (const auto& r : all) {
                if (family_matches(family, r.metric) ||
                    (family.ends_with("@k") && r.metric.starts_with("coverage_macro@") && family == "coverage@k")) {
                    rows.push_back(r);
                    ++found;
                }
            }
            if (found == 0) missing.push_back(family);
        }
        if (!rows.empty()) os << metrics::render_table(rows);
        for (const auto& family : families)
            if (std::find(missing.begin(), missing.end(), family) != missing.end()) os << family << "\tmissing\n";
        if (title == "Evidence filter" && have_eval && eval.contains("filter_reference_lines")) {
            for (const auto& line : eval.at("filter_reference_lines"))
                os << "reference line: " << line.at("label").get<std::string>() << " F1 = "
                   << fmt(line.at("f1").get<double>()) << "\n";
        }
        os << "\n";
    }
    os << "== Accuracy ==\n";
    if (have_accuracy)
        os << accuracy_grid(accuracy, color);
    else {
        os << "accuracy\tmissing\n";
        missing.push_back("accuracy");
    }
    if (have_eval && !eval.at("missing").empty()) {
        os << "\n== Inputs not available ==\n";
        for (const auto& m : eval.at("missing")) os << "- " << m.get<std::string>() << "\n";
    }

    ReportOutput out;
    out.text = os.str();
    Json metrics_json = Json::array();
    for (const auto& r : all) metrics_json.push_back(metrics::to_json(r));
    out.summary = Json{{"metrics", metrics_json},
                       {"missing", missing},
                       {"accuracy_cells", accuracy_cells},
                       {"snapshot_digest", have_eval ? eval.value("snapshot_digest", Json(nullptr)) : Json(nullptr)}};
    std::filesystem::create_directories(reports_dir);
    write_file_atomic(reports_dir / "summary.json", out.summary.dump(2) + "\n");
    write_file_atomic(reports_dir / "report.txt", color ? build_report(run_dir, false).text : out.text);
    return out;
}

} // namespace ragprobe::app
