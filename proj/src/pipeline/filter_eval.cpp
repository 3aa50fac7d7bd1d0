#include "ragprobe/pipeline/filter_eval.hpp"

namespace ragprobe::pipeline {

std::vector<FilterEvaluation> evaluate_filter(const std::vector<RunRecord>& records,
                                              const std::vector<metrics::QueryRelevance>& relevance)
{
    std::map<std::string, const metrics::QueryRelevance*> by_query;
    for (const auto& q : relevance) by_query[q.query_id] = &q;

    std::map<std::string, std::pair<std::vector<bool>, std::vector<bool>>> per_config;
    std::map<std::string, std::size_t> unlabeled;
    std::vector<std::string> order;
    for (const auto& r : records) {
        if (r.filter_verdicts.empty()) continue;
        if (!per_config.contains(r.config_name)) order.push_back(r.config_name);
        auto& [predicted, gold] = per_config[r.config_name];
        auto q = by_query.find(r.query_id);
        for (const auto& v : r.filter_verdicts) {
            if (q == by_query.end() || !q->second->support.contains(v.passage_id)) {
                ++unlabeled[r.config_name];
                continue;
            }
            predicted.push_back(v.kept);
            gold.push_back(metrics::passage_relevant(*q->second, v.passage_id));
        }
    }
    std::vector<FilterEvaluation> out;
    for (const auto& name : order) {
        const auto& [predicted, gold] = per_config.at(name);
        FilterEvaluation e;
        e.config_name = name;
        e.prf = metrics::classifier_prf(predicted, gold);
        for (auto* m : {&e.prf.precision, &e.prf.recall, &e.prf.f1}) m->stratum["config"] = name;
        e.pairs = predicted.size();
        e.unlabeled_pairs = unlabeled[name];
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<FilterReferenceLine> filter_reference_lines()
{
    return {{"zero-shot filter (published)", 0.521}, {"fine-tuned filter (published)", 0.623}};
}

} // namespace ragprobe::pipeline
