#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ragprobe/metrics/report.hpp"

namespace ragprobe::metrics {

enum class SupportLevel { full, partial, none };

std::string_view to_string(SupportLevel l);
SupportLevel parse_support_level(std::string_view s);

/// Resolved relevance annotations for one query's ranked list.
struct QueryRelevance {
    std::string query_id;
    std::string query_type; // stratification key
    std::vector<std::string> ranked_passages; // annotated depth, rank order
    std::vector<std::string> must_have_statements;
    /// support[passage_id][statement_id]
    std::map<std::string, std::map<std::string, SupportLevel>> support;
};

/// True iff any must-have statement is fully or partially supported.
/// Throws InvalidArgument naming the first must-have statement without a label.
bool passage_relevant(const std::map<std::string, SupportLevel>& labels,
                      const std::vector<std::string>& must_have_statements);

bool passage_relevant(const QueryRelevance& q, const std::string& passage_id);

/// Relevant passages among the first k of q.ranked_passages.
std::size_t relevant_in_top_k(const QueryRelevance& q, std::size_t k);

/// All three throw InvalidArgument when k is 0 or exceeds any query's annotated depth.
MetricReport precision_at_k(std::span<const QueryRelevance> queries, std::size_t k);
MetricReport miss_at_k(std::span<const QueryRelevance> queries, std::size_t k);
/// Pooled over every must-have statement of every query.
MetricReport coverage_at_k(std::span<const QueryRelevance> queries, std::size_t k);
/// Per-query coverage averaged over queries with at least one must-have statement.
MetricReport coverage_at_k_macro(std::span<const QueryRelevance> queries, std::size_t k);

using RetrievalMetric = std::function<MetricReport(std::span<const QueryRelevance>, std::size_t)>;

/// Overall report followed by one report per query_type, each tagged with
/// {"query_type": ..., "k": ...}.
std::vector<MetricReport> stratify_by_query_type(std::span<const QueryRelevance> queries, std::size_t k,
                                                 const RetrievalMetric& metric);

} // namespace ragprobe::metrics
