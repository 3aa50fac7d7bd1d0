#include "ragprobe/metrics/response_quality.hpp"

#include <algorithm>
#include <map>

#include "ragprobe/common/error.hpp"

namespace ragprobe::metrics {
namespace {

double credit(SupportLevel level, double partial_weight)
{
    switch (level) {
    case SupportLevel::full: return 1.0;
    case SupportLevel::partial: return partial_weight;
    case SupportLevel::none: return 0.0;
    }
    return 0.0;
}

SupportLevel level_of(const ResponseCompleteness& r, const std::string& id)
{
    auto it = r.levels.find(id);
    if (it == r.levels.end()) {
        throw InvalidArgument("query " + r.query_id + ": no completeness label for must-have statement " + id);
    }
    return it->second;
}

void check_weight(double w)
{
    if (!(w >= 0.0 && w <= 1.0)) throw InvalidArgument("partial weight must lie in [0, 1]");
}

std::string precedence_text(const BucketPrecedence& p)
{
    std::string out;
    for (auto b : p.order) {
        if (!out.empty()) out += '>';
        out += std::string(to_string(b));
    }
    return out;
}

void check_precedence(const BucketPrecedence& p)
{
    std::vector<EvidenceBucket> sorted = p.order;
    std::sort(sorted.begin(), sorted.end());
    const std::vector<EvidenceBucket> expected{EvidenceBucket::true_positive, EvidenceBucket::false_positive,
                                               EvidenceBucket::self_generated};
    if (sorted != expected) {
        throw InvalidArgument("bucket precedence must order true_positive, false_positive and self_generated");
    }
}

} // namespace

QualityScores factuality_scores(std::span<const ResponseFactuality> responses, bool use_response_labels)
{
    double response_sum = 0.0;
    double statement_sum = 0.0;
    std::size_t with_statements = 0;
    for (const auto& r : responses) {
        std::size_t true_count = 0;
        for (const auto& id : r.statement_ids) {
            auto it = r.verdicts.find(id);
            if (it == r.verdicts.end()) {
                throw InvalidArgument("query " + r.query_id + ": statement " + id + " has no factuality verdict");
            }
            true_count += it->second ? 1 : 0;
        }
        bool all_true = true_count == r.statement_ids.size();
        if (use_response_labels && r.response_label) all_true = *r.response_label;
        response_sum += all_true ? 1.0 : 0.0;
        if (!r.statement_ids.empty()) {
            statement_sum += static_cast<double>(true_count) / static_cast<double>(r.statement_ids.size());
            ++with_statements;
        }
    }
    QualityScores out;
    out.response_level = ratio_metric("factuality_response", response_sum, static_cast<double>(responses.size()),
                                      responses.size(), "no responses");
    out.statement_level = ratio_metric("factuality_statement", statement_sum, static_cast<double>(with_statements),
                                       with_statements, "no graded statements");
    return out;
}

std::string_view to_string(EvidenceBucket b)
{
    switch (b) {
    case EvidenceBucket::true_positive: return "true_positive";
    case EvidenceBucket::false_positive: return "false_positive";
    case EvidenceBucket::self_generated: return "self_generated";
    case EvidenceBucket::no_reference: return "no_reference";
    case EvidenceBucket::unresolved: return "unresolved";
    }
    return "unknown";
}

EvidenceBucket evidence_bucket(const EvidenceStatement& s, const EvidenceResponse& r,
                               const BucketPrecedence& precedence)
{
    std::map<int, const CitedReference*> by_ordinal;
    for (const auto& ref : r.references) by_ordinal.emplace(ref.ordinal, &ref);

    bool tp = false, fp = false, sg = false, pending = false, any = false;
    for (int ordinal : s.citations) {
        auto it = by_ordinal.find(ordinal);
        if (it == by_ordinal.end()) continue;
        any = true;
        const CitedReference& ref = *it->second;
        if (ref.unresolved) {
            pending = true;
        } else if (ref.matched_passages.empty()) {
            sg = true;
        } else if (std::any_of(ref.matched_passages.begin(), ref.matched_passages.end(),
                               [&](const std::string& p) { return r.relevant.contains(p); })) {
            tp = true;
        } else {
            fp = true;
        }
    }
    if (!any) return EvidenceBucket::no_reference;

    auto present = [&](EvidenceBucket b) {
        return (b == EvidenceBucket::true_positive && tp) || (b == EvidenceBucket::false_positive && fp) ||
               (b == EvidenceBucket::self_generated && sg);
    };
    if (pending && !present(precedence.order.front())) return EvidenceBucket::unresolved;
    for (auto b : precedence.order) {
        if (present(b)) return b;
    }
    return EvidenceBucket::unresolved;
}

std::vector<MetricReport> factuality_by_evidence(std::span<const EvidenceResponse> responses,
                                                 const BucketPrecedence& precedence)
{
    check_precedence(precedence);
    constexpr EvidenceBucket kBuckets[] = {EvidenceBucket::true_positive, EvidenceBucket::false_positive,
                                           EvidenceBucket::self_generated, EvidenceBucket::no_reference,
                                           EvidenceBucket::unresolved};
    std::map<EvidenceBucket, std::pair<std::size_t, std::size_t>> tally; // (true, total)
    for (const auto& r : responses) {
        for (const auto& s : r.statements) {
            auto& t = tally[evidence_bucket(s, r, precedence)];
            t.first += s.verdict ? 1 : 0;
            ++t.second;
        }
    }
    const std::string order = precedence_text(precedence);
    std::vector<MetricReport> out;
    for (auto b : kBuckets) {
        const auto [hits, total] = tally[b];
        MetricReport m = ratio_metric("factuality_by_evidence", static_cast<double>(hits), static_cast<double>(total),
                                      total, "no statements in bucket");
        m.stratum = {{"evidence", std::string(to_string(b))}, {"precedence", order}};
        out.push_back(std::move(m));
    }
    return out;
}

QualityScores completeness_scores(std::span<const ResponseCompleteness> responses, double partial_weight)
{
    check_weight(partial_weight);
    double response_sum = 0.0;
    double statement_sum = 0.0;
    std::size_t with_statements = 0;
    for (const auto& r : responses) {
        double total = 0.0;
        bool all_full = true;
        for (const auto& id : r.must_have_ids) {
            const double c = credit(level_of(r, id), partial_weight);
            total += c;
            all_full = all_full && c == 1.0;
        }
        response_sum += all_full ? 1.0 : 0.0;
        if (!r.must_have_ids.empty()) {
            statement_sum += total / static_cast<double>(r.must_have_ids.size());
            ++with_statements;
        }
    }
    QualityScores out;
    out.response_level = ratio_metric("completeness_response", response_sum, static_cast<double>(responses.size()),
                                      responses.size(), "no responses");
    out.statement_level = ratio_metric("completeness_statement", statement_sum, static_cast<double>(with_statements),
                                       with_statements, "no must-have statements");
    if (partial_weight != 1.0) {
        const std::string w = std::to_string(partial_weight);
        out.response_level.stratum["partial_weight"] = w;
        out.statement_level.stratum["partial_weight"] = w;
    }
    return out;
}

std::string_view to_string(SupportBucket b)
{
    switch (b) {
    case SupportBucket::supported_referenced: return "supported_referenced";
    case SupportBucket::supported_missed: return "supported_missed";
    case SupportBucket::unsupported: return "unsupported";
    }
    return "unknown";
}

SupportBucket support_bucket(const SupportResponse& r, const std::string& statement_id)
{
    auto it = r.supporting_passages.find(statement_id);
    if (it == r.supporting_passages.end() || it->second.empty()) return SupportBucket::unsupported;
    for (const auto& p : it->second) {
        if (r.cited_passages.contains(p)) return SupportBucket::supported_referenced;
    }
    return SupportBucket::supported_missed;
}

std::vector<MetricReport> completeness_by_support(std::span<const SupportResponse> responses, double partial_weight)
{
    check_weight(partial_weight);
    std::map<SupportBucket, std::pair<double, std::size_t>> tally;
    for (const auto& r : responses) {
        for (const auto& id : r.completeness.must_have_ids) {
            auto& t = tally[support_bucket(r, id)];
            t.first += credit(level_of(r.completeness, id), partial_weight);
            ++t.second;
        }
    }
    std::vector<MetricReport> out;
    for (auto b : {SupportBucket::supported_referenced, SupportBucket::supported_missed, SupportBucket::unsupported}) {
        const auto [sum, total] = tally[b];
        MetricReport m = ratio_metric("completeness_by_support", sum, static_cast<double>(total), total,
                                      "no statements in bucket");
        m.stratum = {{"support", std::string(to_string(b))}};
        out.push_back(std::move(m));
    }
    return out;
}

} // namespace ragprobe::metrics
