#include "ragprobe/metrics/retrieval_metrics.hpp"

#include <map>

#include "ragprobe/common/error.hpp"

namespace ragprobe::metrics {
namespace {

void check_depth(std::span<const QueryRelevance> queries, std::size_t k)
{
    if (k == 0) throw InvalidArgument("k must be >= 1");
    for (const auto& q : queries) {
        if (k > q.ranked_passages.size()) {
            throw InvalidArgument("k=" + std::to_string(k) + " exceeds the annotated depth " +
                                  std::to_string(q.ranked_passages.size()) + " of query " + q.query_id);
        }
    }
}

bool statement_supported_in_top_k(const QueryRelevance& q, const std::string& statement_id, std::size_t k)
{
    for (std::size_t r = 0; r < k; ++r) {
        auto p = q.support.find(q.ranked_passages[r]);
        if (p == q.support.end()) continue;
        auto s = p->second.find(statement_id);
        if (s != p->second.end() && s->second != SupportLevel::none) return true;
    }
    return false;
}

Stratum k_stratum(std::size_t k) { return {{"k", std::to_string(k)}}; }

} // namespace

std::string_view to_string(SupportLevel l)
{
    switch (l) {
    case SupportLevel::full: return "full";
    case SupportLevel::partial: return "partial";
    case SupportLevel::none: return "none";
    }
    return "none";
}

SupportLevel parse_support_level(std::string_view s)
{
    if (s == "full") return SupportLevel::full;
    if (s == "partial") return SupportLevel::partial;
    if (s == "none") return SupportLevel::none;
    throw SchemaError("unknown support level '" + std::string(s) + "' (expected full, partial or none)");
}

bool passage_relevant(const std::map<std::string, SupportLevel>& labels,
                      const std::vector<std::string>& must_have_statements)
{
    bool relevant = false;
    for (const auto& id : must_have_statements) {
        auto it = labels.find(id);
        if (it == labels.end()) throw InvalidArgument("no support label for must-have statement " + id);
        relevant = relevant || it->second != SupportLevel::none;
    }
    return relevant;
}

bool passage_relevant(const QueryRelevance& q, const std::string& passage_id)
{
    auto it = q.support.find(passage_id);
    if (it == q.support.end()) {
        throw InvalidArgument("query " + q.query_id + ": passage " + passage_id + " has no relevance labels");
    }
    try {
        return passage_relevant(it->second, q.must_have_statements);
    } catch (const InvalidArgument& e) {
        throw InvalidArgument("query " + q.query_id + ", passage " + passage_id + ": " + e.what());
    }
}

std::size_t relevant_in_top_k(const QueryRelevance& q, std::size_t k)
{
    std::size_t n = 0;
    for (std::size_t r = 0; r < k && r < q.ranked_passages.size(); ++r) {
        n += passage_relevant(q, q.ranked_passages[r]) ? 1 : 0;
    }
    return n;
}

MetricReport precision_at_k(std::span<const QueryRelevance> queries, std::size_t k)
{
    check_depth(queries, k);
    const std::string name = "precision@" + std::to_string(k);
    if (queries.empty()) return undefined_metric(name, "no queries", 0, k_stratum(k));
    double sum = 0.0;
    for (const auto& q : queries) sum += static_cast<double>(relevant_in_top_k(q, k)) / static_cast<double>(k);
    return defined_metric(name, sum / static_cast<double>(queries.size()), queries.size(), k_stratum(k));
}

MetricReport miss_at_k(std::span<const QueryRelevance> queries, std::size_t k)
{
    check_depth(queries, k);
    const std::string name = "miss@" + std::to_string(k);
    if (queries.empty()) return undefined_metric(name, "no queries", 0, k_stratum(k));
    std::size_t missed = 0;
    for (const auto& q : queries) missed += relevant_in_top_k(q, k) == 0 ? 1 : 0;
    return defined_metric(name, static_cast<double>(missed) / static_cast<double>(queries.size()), queries.size(),
                          k_stratum(k));
}

MetricReport coverage_at_k(std::span<const QueryRelevance> queries, std::size_t k)
{
    check_depth(queries, k);
    const std::string name = "coverage@" + std::to_string(k);
    std::size_t total = 0, covered = 0;
    for (const auto& q : queries) {
        for (const auto& s : q.must_have_statements) {
            ++total;
            covered += statement_supported_in_top_k(q, s, k) ? 1 : 0;
        }
    }
    if (total == 0) return undefined_metric(name, "no must-have statements", 0, k_stratum(k));
    return defined_metric(name, static_cast<double>(covered) / static_cast<double>(total), total, k_stratum(k));
}

MetricReport coverage_at_k_macro(std::span<const QueryRelevance> queries, std::size_t k)
{
    check_depth(queries, k);
    const std::string name = "coverage_macro@" + std::to_string(k);
    double sum = 0.0;
    std::size_t used = 0;
    for (const auto& q : queries) {
        if (q.must_have_statements.empty()) continue;
        std::size_t covered = 0;
        for (const auto& s : q.must_have_statements) covered += statement_supported_in_top_k(q, s, k) ? 1 : 0;
        sum += static_cast<double>(covered) / static_cast<double>(q.must_have_statements.size());
        ++used;
    }
    if (used == 0) return undefined_metric(name, "no must-have statements", 0, k_stratum(k));
    return defined_metric(name, sum / static_cast<double>(used), used, k_stratum(k));
}

std::vector<MetricReport> stratify_by_query_type(std::span<const QueryRelevance> queries, std::size_t k,
                                                 const RetrievalMetric& metric)
{
    std::vector<MetricReport> out;
    out.push_back(metric(queries, k));
    out.back().stratum["query_type"] = "all";
    std::map<std::string, std::vector<QueryRelevance>> groups;
    for (const auto& q : queries) groups[q.query_type].push_back(q);
    for (const auto& [type, group] : groups) {
        out.push_back(metric(group, k));
        out.back().stratum["query_type"] = type.empty() ? "unspecified" : type;
    }
    return out;
}

} // namespace ragprobe::metrics
