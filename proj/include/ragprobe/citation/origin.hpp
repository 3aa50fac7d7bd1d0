#pragma once

#include <span>

#include "ragprobe/citation/types.hpp"
#include "ragprobe/corpus/types.hpp"

namespace ragprobe::citation {

struct OriginThresholds {
    double match = 0.8;      // Jaccard at or above: retrieval-based
    double self_floor = 0.4; // best Jaccard below: self-generated
};

/// Token-set Jaccard similarity; 0 when both sides are empty.
double token_jaccard(std::string_view a, std::string_view b);

/// Similarity of a reference to one passage: 1 for a normalized title found
/// as a reference segment or a URL match, else the best token-set Jaccard
/// between the passage title and any ". "-separated reference segment.
double reference_similarity(const Reference& ref, const corpus::Passage& passage);

/// Assisted matching against the response's retrieved set.
Reference classify_reference_origin(Reference ref, std::span<const corpus::Passage> retrieved,
                                    const OriginThresholds& thresholds = {});

struct OriginCounts {
    std::size_t retrieval_based = 0;
    std::size_t self_generated = 0;
    std::size_t unresolved = 0;
    std::size_t total() const { return retrieval_based + self_generated + unresolved; }
};

OriginCounts count_origins(std::span<const Reference> refs);

} // namespace ragprobe::citation
