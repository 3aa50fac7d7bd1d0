#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ragprobe/metrics/report.hpp"

namespace ragprobe::metrics {

struct ConfusionCounts {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

struct ClassifierPrf {
    ConfusionCounts counts;
    MetricReport precision;
    MetricReport recall;
    MetricReport f1;
};

ClassifierPrf classifier_prf(const ConfusionCounts& counts);

/// Positive = relevant. Throws InvalidArgument on length mismatch.
ClassifierPrf classifier_prf(const std::vector<bool>& predictions, const std::vector<bool>& gold);

/// Keyed form: one prediction per (query_id, passage_id). Throws when a key
/// is missing on either side or duplicated.
using PairKey = std::pair<std::string, std::string>;
ClassifierPrf classifier_prf(const std::vector<std::pair<PairKey, bool>>& predictions,
                             const std::vector<std::pair<PairKey, bool>>& gold);

} // namespace ragprobe::metrics
