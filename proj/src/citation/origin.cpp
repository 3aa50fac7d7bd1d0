#include "ragprobe/citation/origin.hpp"

#include <algorithm>
#include <set>

#include "ragprobe/common/text.hpp"

namespace ragprobe::citation {
namespace {

std::vector<std::string_view> split_segments(std::string_view s)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        auto dot = s.find(". ", start);
        if (dot == std::string_view::npos) dot = s.size();
        auto seg = text::trim(s.substr(start, dot - start));
        while (!seg.empty() && seg.back() == '.') seg.remove_suffix(1);
        if (!seg.empty()) out.push_back(seg);
        if (dot == s.size()) break;
        start = dot + 2;
    }
    return out;
}

} // namespace

double token_jaccard(std::string_view a, std::string_view b)
{
    const auto ta = text::match_tokens(a);
    const auto tb = text::match_tokens(b);
    const std::set<std::string> sa(ta.begin(), ta.end());
    const std::set<std::string> sb(tb.begin(), tb.end());
    if (sa.empty() && sb.empty()) return 0.0;
    std::size_t inter = 0;
    for (const auto& t : sa) inter += sb.count(t);
    return static_cast<double>(inter) / static_cast<double>(sa.size() + sb.size() - inter);
}

double reference_similarity(const Reference& ref, const corpus::Passage& passage)
{
    if (auto url = passage.metadata.find("url"); url != passage.metadata.end() && !url->second.empty()) {
        if (ref.raw_text.find(url->second) != std::string::npos) return 1.0;
    }
    const std::string title = text::normalize_for_match(passage.title);
    if (title.empty()) return 0.0;
    double best = 0.0;
    for (auto seg : split_segments(ref.raw_text)) {
        if (text::normalize_for_match(seg) == title) return 1.0;
        best = std::max(best, token_jaccard(seg, passage.title));
    }
    return best;
}

Reference classify_reference_origin(Reference ref, std::span<const corpus::Passage> retrieved,
                                    const OriginThresholds& thresholds)
{
    ref.matched_passages.clear();
    double best = 0.0;
    for (const auto& p : retrieved) {
        const double sim = reference_similarity(ref, p);
        best = std::max(best, sim);
        if (sim >= thresholds.match &&
            std::find(ref.matched_passages.begin(), ref.matched_passages.end(), p.passage_id) ==
                ref.matched_passages.end()) {
            ref.matched_passages.push_back(p.passage_id);
        }
    }
    ref.match_score = best;
    if (!ref.matched_passages.empty()) {
        ref.origin = Origin::retrieval_based;
    } else if (best < thresholds.self_floor) {
        ref.origin = Origin::self_generated;
    } else {
        ref.origin = Origin::unresolved;
    }
    return ref;
}

OriginCounts count_origins(std::span<const Reference> refs)
{
    OriginCounts c;
    for (const auto& r : refs) {
        switch (r.origin) {
        case Origin::retrieval_based: ++c.retrieval_based; break;
        case Origin::self_generated: ++c.self_generated; break;
        case Origin::unresolved: ++c.unresolved; break;
        }
    }
    return c;
}

} // namespace ragprobe::citation
