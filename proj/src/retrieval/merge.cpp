#include "ragprobe/retrieval/merge.hpp"

#include <algorithm>
#include <tuple>

namespace ragprobe::retrieval {

std::vector<RetrievalHit> merge_topk(std::span<const std::vector<RetrievalHit>> per_corpus_hits, std::size_t k)
{
    struct Entry {
        const RetrievalHit* hit;
        std::size_t corpus;
    };
    std::vector<Entry> all;
    for (std::size_t c = 0; c < per_corpus_hits.size(); ++c) {
        for (const auto& h : per_corpus_hits[c]) {
            all.push_back(Entry{&h, c});
        }
    }
    auto better = [](const Entry& a, const Entry& b) {
        if (a.hit->score != b.hit->score) {
            return a.hit->score > b.hit->score;
        }
        return std::tie(a.corpus, a.hit->passage_id) < std::tie(b.corpus, b.hit->passage_id);
    };
    const std::size_t take = std::min(k, all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take), all.end(), better);
    std::vector<RetrievalHit> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        out.push_back(RetrievalHit{all[i].hit->passage_id, all[i].hit->score, i + 1});
    }
    return out;
}

std::vector<RetrievalHit> concat_per_source(std::span<const std::vector<RetrievalHit>> per_corpus_hits,
                                            std::size_t k)
{
    std::vector<RetrievalHit> out;
    for (const auto& hits : per_corpus_hits) {
        for (std::size_t i = 0; i < std::min(k, hits.size()); ++i) {
            out.push_back(RetrievalHit{hits[i].passage_id, hits[i].score, out.size() + 1});
        }
    }
    return out;
}

} // namespace ragprobe::retrieval
