#pragma once

#include <span>
#include <vector>

#include "ragprobe/retrieval/types.hpp"

namespace ragprobe::retrieval {

/// Global top-k across per-corpus hit lists (each already sorted). Ties are
/// broken by corpus declaration order, then passage_id. Ranks restart at 1.
std::vector<RetrievalHit> merge_topk(std::span<const std::vector<RetrievalHit>> per_corpus_hits, std::size_t k);

/// Per-source variant: each corpus keeps its own top-k, concatenated in declaration order.
std::vector<RetrievalHit> concat_per_source(std::span<const std::vector<RetrievalHit>> per_corpus_hits,
                                            std::size_t k);

} // namespace ragprobe::retrieval
