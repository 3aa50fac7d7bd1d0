#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ragprobe/metrics/labels.hpp"
#include "ragprobe/metrics/report.hpp"

namespace ragprobe::metrics {

struct EvalOptions {
    std::vector<std::size_t> ks{1, 2, 4, 8, 16, 32};
    double partial_weight = 1.0;
    BucketPrecedence precedence;
    std::size_t bootstrap_replicates = 10000;
    std::uint64_t seed = 20240611;
    bool merge_partial_for_agreement = true;
};

struct EvalResult {
    std::vector<MetricReport> reports;
    std::vector<std::string> missing; // metric families whose inputs were absent
};

/// Every metric the labels allow. Retrieval metrics are emitted for each k
/// up to the annotated depth; response metrics are stratified by model.
EvalResult evaluate_labels(const LabelSet& labels, const EvalOptions& options = {});

/// Attaches an interval, widening it to contain the point estimate.
void attach_ci(MetricReport& report, const Interval& ci);

Json to_json(const EvalResult& r);

} // namespace ragprobe::metrics
