#include "ragprobe/metrics/selection.hpp"

#include <algorithm>
#include <map>
#include <optional>

namespace ragprobe::metrics {
namespace {

constexpr const char* kNoCited = "no retrieval-based citations";
constexpr const char* kNoRelevant = "no relevant passages retrieved";

SelectionResult finish(std::size_t hit_p, std::size_t den_p, std::size_t hit_r, std::size_t den_r, std::size_t n,
                       const std::string& suffix)
{
    return {ratio_metric("selection_precision" + suffix, static_cast<double>(hit_p), static_cast<double>(den_p), n,
                         kNoCited),
            ratio_metric("selection_recall" + suffix, static_cast<double>(hit_r), static_cast<double>(den_r), n,
                         kNoRelevant)};
}

std::size_t relevant_retrieved(const ResponseSelection& r)
{
    std::set<std::string> seen;
    for (const auto& p : r.retrieved) {
        if (r.relevant.contains(p)) seen.insert(p);
    }
    return seen.size();
}

} // namespace

SelectionResult selection_metrics(std::span<const ResponseSelection> responses)
{
    std::size_t hits = 0, cited_total = 0, relevant_total = 0;
    for (const auto& r : responses) {
        const std::set<std::string> retrieved(r.retrieved.begin(), r.retrieved.end());
        std::set<std::string> cited;
        for (const auto& ref : r.references) {
            if (ref.unresolved) continue;
            for (const auto& p : ref.matched_passages) {
                if (retrieved.contains(p)) cited.insert(p);
            }
        }
        for (const auto& p : cited) hits += r.relevant.contains(p) ? 1 : 0;
        cited_total += cited.size();
        relevant_total += relevant_retrieved(r);
    }
    return finish(hits, cited_total, hits, relevant_total, responses.size(), "");
}

SelectionResult selection_metrics_per_reference(std::span<const ResponseSelection> responses)
{
    std::size_t rel_refs = 0, refs = 0, credited_total = 0, relevant_total = 0;
    for (const auto& r : responses) {
        std::map<std::string, std::size_t> rank;
        for (std::size_t i = 0; i < r.retrieved.size(); ++i) rank.emplace(r.retrieved[i], i);
        std::set<std::string> credited;
        for (const auto& ref : r.references) {
            if (ref.unresolved) continue;
            std::vector<std::string> matched;
            for (const auto& p : ref.matched_passages) {
                if (rank.contains(p)) matched.push_back(p);
            }
            if (matched.empty()) continue;
            ++refs;
            std::optional<std::string> first_relevant;
            for (const auto& p : matched) {
                if (r.relevant.contains(p) && (!first_relevant || rank[p] < rank[*first_relevant])) first_relevant = p;
            }
            if (first_relevant) {
                ++rel_refs;
                credited.insert(*first_relevant);
            }
        }
        credited_total += credited.size();
        relevant_total += relevant_retrieved(r);
    }
    return finish(rel_refs, refs, credited_total, relevant_total, responses.size(), "_per_reference");
}

} // namespace ragprobe::metrics
