#include "ragprobe/metrics/evaluate.hpp"

#include <algorithm>
#include <map>
#include <set>


namespace ragprobe::metrics {
namespace {

/// (numerator, denominator) contributed by one resampling unit.
using Part = std::pair<double, double>;

std::optional<Interval> ratio_ci(const std::vector<Part>& parts, const EvalOptions& o)
{
    if (parts.empty() || o.bootstrap_replicates == 0) return std::nullopt;
    auto stat = [&](std::span<const std::size_t> idx) -> std::optional<double> {
        double num = 0.0, den = 0.0;
        for (auto i : idx) {
            num += parts[i].first;
            den += parts[i].second;
        }
        if (den == 0.0) return std::nullopt;
        return num / den;
    };
    return bootstrap_ci(parts.size(), stat, o.bootstrap_replicates, o.seed);
}

void with_ci(MetricReport& m, const std::vector<Part>& parts, const EvalOptions& o)
{
    if (!m.value) return;
    if (auto ci = ratio_ci(parts, o)) attach_ci(m, *ci);
}

template <class T>
std::map<std::string, std::vector<T>> by_model(const std::vector<T>& items, std::string (*model_of)(const T&))
{
    std::map<std::string, std::vector<T>> out;
    for (const auto& i : items) {
        out["all"].push_back(i);
        out[model_of(i)].push_back(i);
    }
    return out;
}

std::string model_of_selection(const ResponseSelection& r) { return r.model_id; }
std::string model_of_factuality(const ResponseFactuality& r) { return r.model_id; }
std::string model_of_evidence(const EvidenceResponse& r) { return r.model_id; }
std::string model_of_completeness(const ResponseCompleteness& r) { return r.model_id; }
std::string model_of_support(const SupportResponse& r) { return r.completeness.model_id; }

void tag(MetricReport& m, const std::string& model)
{
    m.stratum["model"] = model;
}

void retrieval_reports(const LabelSet& labels, const EvalOptions& o, EvalResult& out)
{
    const auto queries = build_query_relevance(labels);
    if (queries.empty()) {
        out.missing.push_back("relevance labels: precision@k, miss@k, coverage@k, selection and support breakdowns");
        return;
    }
    std::size_t depth = queries.front().ranked_passages.size();
    for (const auto& q : queries) depth = std::min(depth, q.ranked_passages.size());

    std::map<std::string, std::vector<QueryRelevance>> strata;
    for (const auto& q : queries) {
        strata["all"].push_back(q);
        strata[q.query_type.empty() ? "unspecified" : q.query_type].push_back(q);
    }
    if (strata.size() == 2) strata.erase(std::next(strata.begin(), strata.begin()->first == "all" ? 1 : 0));

    for (std::size_t k : o.ks) {
        if (k > depth) {
            out.missing.push_back("retrieval metrics at k=" + std::to_string(k) + " (annotated depth " +
                                  std::to_string(depth) + ")");
            continue;
        }
        for (const auto& [type, group] : strata) {
            std::vector<Part> precision_parts, miss_parts, coverage_parts, macro_parts;
            for (const auto& q : group) {
                const auto rel = relevant_in_top_k(q, k);
                precision_parts.emplace_back(static_cast<double>(rel) / static_cast<double>(k), 1.0);
                miss_parts.emplace_back(rel == 0 ? 1.0 : 0.0, 1.0);
                const std::vector<QueryRelevance> one{q};
                const auto cov = coverage_at_k(one, k);
                const double total = static_cast<double>(q.must_have_statements.size());
                coverage_parts.emplace_back(cov.value ? *cov.value * total : 0.0, total);
                if (cov.value) macro_parts.emplace_back(*cov.value, 1.0);
            }
            MetricReport reports[] = {precision_at_k(group, k), miss_at_k(group, k), coverage_at_k(group, k),
                                      coverage_at_k_macro(group, k)};
            const std::vector<Part>* parts[] = {&precision_parts, &miss_parts, &coverage_parts, &macro_parts};
            for (int i = 0; i < 4; ++i) {
                with_ci(reports[i], *parts[i], o);
                reports[i].stratum["query_type"] = type;
                out.reports.push_back(std::move(reports[i]));
            }
        }
    }
}

void selection_reports(const LabelSet& labels, const EvalOptions& o, EvalResult& out)
{
    const auto responses = build_selection(labels);
    if (responses.empty()) {
        out.missing.push_back("selection labels: selection precision/recall");
        return;
    }
    for (const auto& [model, group] : by_model(responses, model_of_selection)) {
        for (bool per_reference : {false, true}) {
            auto compute = [&](std::span<const ResponseSelection> rs) {
                return per_reference ? selection_metrics_per_reference(rs) : selection_metrics(rs);
            };
            SelectionResult total = compute(group);
            std::vector<Part> p_parts, r_parts;
            for (const auto& r : group) {
                const std::vector<ResponseSelection> one{r};
                const auto single = compute(one);
                // Recover the counts behind each single-response ratio.
                const auto counts = [&](const MetricReport& m, bool precision) -> Part {
                    double den = 0.0;
                    if (precision) {
                        std::set<std::string> cited;
                        std::size_t refs = 0;
                        for (const auto& ref : r.references) {
                            if (ref.unresolved) continue;
                            bool any = false;
                            for (const auto& p : ref.matched_passages) {
                                if (std::find(r.retrieved.begin(), r.retrieved.end(), p) != r.retrieved.end()) {
                                    cited.insert(p);
                                    any = true;
                                }
                            }
                            refs += any ? 1 : 0;
                        }
                        den = per_reference ? static_cast<double>(refs) : static_cast<double>(cited.size());
                    } else {
                        std::set<std::string> rel;
                        for (const auto& p : r.retrieved) {
                            if (r.relevant.contains(p)) rel.insert(p);
                        }
                        den = static_cast<double>(rel.size());
                    }
                    return {m.value ? *m.value * den : 0.0, den};
                };
                p_parts.push_back(counts(single.precision, true));
                r_parts.push_back(counts(single.recall, false));
            }
            with_ci(total.precision, p_parts, o);
            with_ci(total.recall, r_parts, o);
            tag(total.precision, model);
            tag(total.recall, model);
            out.reports.push_back(std::move(total.precision));
            out.reports.push_back(std::move(total.recall));
        }
    }
}

void factuality_reports(const LabelSet& labels, const EvalOptions& o, EvalResult& out)
{
    const auto responses = build_factuality(labels);
    if (responses.empty()) {
        out.missing.push_back("factuality labels: factuality scores and evidence breakdown");
        return;
    }
    for (const auto& [model, group] : by_model(responses, model_of_factuality)) {
        auto scores = factuality_scores(group);
        std::vector<Part> resp, stmt;
        for (const auto& r : group) {
            std::size_t t = 0;
            for (const auto& id : r.statement_ids) t += r.verdicts.at(id) ? 1 : 0;
            resp.emplace_back(t == r.statement_ids.size() ? 1.0 : 0.0, 1.0);
            if (!r.statement_ids.empty()) {
                stmt.emplace_back(static_cast<double>(t) / static_cast<double>(r.statement_ids.size()), 1.0);
            }
        }
        with_ci(scores.response_level, resp, o);
        with_ci(scores.statement_level, stmt, o);
        tag(scores.response_level, model);
        tag(scores.statement_level, model);
        out.reports.push_back(std::move(scores.response_level));
        out.reports.push_back(std::move(scores.statement_level));
    }

    const auto evidence = build_evidence(labels);
    if (evidence.empty()) {
        out.missing.push_back("relevance labels for factuality_by_evidence");
        return;
    }
    for (const auto& [model, group] : by_model(evidence, model_of_evidence)) {
        for (auto& m : factuality_by_evidence(group, o.precedence)) {
            tag(m, model);
            out.reports.push_back(std::move(m));
        }
    }
}

void completeness_reports(const LabelSet& labels, const EvalOptions& o, EvalResult& out)
{
    const auto responses = build_completeness(labels);
    if (responses.empty()) {
        out.missing.push_back("completeness labels: completeness scores and support breakdown");
        return;
    }
    for (const auto& [model, group] : by_model(responses, model_of_completeness)) {
        auto scores = completeness_scores(group, o.partial_weight);
        std::vector<Part> resp, stmt;
        for (const auto& r : group) {
            const std::vector<ResponseCompleteness> one{r};
            const auto single = completeness_scores(one, o.partial_weight);
            resp.emplace_back(*single.response_level.value, 1.0);
            if (single.statement_level.value) stmt.emplace_back(*single.statement_level.value, 1.0);
        }
        with_ci(scores.response_level, resp, o);
        with_ci(scores.statement_level, stmt, o);
        tag(scores.response_level, model);
        tag(scores.statement_level, model);
        out.reports.push_back(std::move(scores.response_level));
        out.reports.push_back(std::move(scores.statement_level));
    }
    const auto support = build_support(labels);
    if (support.empty()) {
        out.missing.push_back("relevance labels for completeness_by_support");
        return;
    }
    for (const auto& [model, group] : by_model(support, model_of_support)) {
        for (auto& m : completeness_by_support(group, o.partial_weight)) {
            tag(m, model);
            out.reports.push_back(std::move(m));
        }
    }
}

void agreement_reports(const LabelSet& labels, const EvalOptions& o, EvalResult& out)
{
    for (Stage stage : {Stage::relevance, Stage::selection, Stage::factuality, Stage::completeness}) {
        const auto units = agreement_units(labels, stage, o.merge_partial_for_agreement);
        if (units.empty()) continue;
        const auto a = o.bootstrap_replicates == 0 ? krippendorff_alpha(units)
                                                   : krippendorff_alpha(units, o.bootstrap_replicates, o.seed);
        MetricReport m = a.alpha ? defined_metric("krippendorff_alpha", *a.alpha, a.items_used)
                                 : undefined_metric("krippendorff_alpha", a.note, a.items_used);
        m.stratum["stage"] = std::string(to_string(stage));
        if (a.zero_expected_disagreement) m.stratum["note"] = "zero expected disagreement";
        if (a.ci && m.value) attach_ci(m, *a.ci);
        out.reports.push_back(std::move(m));
    }
}

} // namespace

void attach_ci(MetricReport& report, const Interval& ci)
{
    double lo = ci.low, hi = ci.high;
    if (report.value) {
        lo = std::min(lo, *report.value);
        hi = std::max(hi, *report.value);
    }
    report.ci_low = lo;
    report.ci_high = hi;
}

EvalResult evaluate_labels(const LabelSet& labels, const EvalOptions& options)
{
    EvalResult out;
    retrieval_reports(labels, options, out);
    selection_reports(labels, options, out);
    factuality_reports(labels, options, out);
    completeness_reports(labels, options, out);
    agreement_reports(labels, options, out);
    return out;
}

Json to_json(const EvalResult& r)
{
    Json reports = Json::array();
    for (const auto& m : r.reports) reports.push_back(to_json(m));
    return Json{{"reports", std::move(reports)}, {"missing", r.missing}};
}

} // namespace ragprobe::metrics
