#pragma once

#include <string>
#include <vector>

namespace ragprobe::retrieval {

struct RetrievalHit {
    std::string passage_id;
    double score = 0.0;
    std::size_t rank = 0; // 1-based

    bool operator==(const RetrievalHit&) const = default;
};

enum class SearchStatus { ok, empty_query };

struct SearchResult {
    std::vector<RetrievalHit> hits;
    SearchStatus status = SearchStatus::ok;
};

} // namespace ragprobe::retrieval
