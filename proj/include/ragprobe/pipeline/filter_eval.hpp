#pragma once

#include <map>
#include <string>
#include <vector>

#include "ragprobe/metrics/classifier.hpp"
#include "ragprobe/metrics/retrieval_metrics.hpp"
#include "ragprobe/pipeline/run_record.hpp"

namespace ragprobe::pipeline {

struct FilterEvaluation {
    std::string config_name;
    metrics::ClassifierPrf prf;
    std::size_t pairs = 0;
    std::size_t unlabeled_pairs = 0; // verdicts on passages without relevance labels
};

/// Scores the evidence filter's verdicts against relevance labels, one
/// result per filtering configuration. A passage is a positive when it
/// supports a must-have statement of its query; verdicts on passages with no
/// labels are counted and left out.
std::vector<FilterEvaluation> evaluate_filter(const std::vector<RunRecord>& records,
                                              const std::vector<metrics::QueryRelevance>& relevance);

/// Published F1 of a zero-shot and a fine-tuned filter, shown for comparison only.
struct FilterReferenceLine {
    std::string label;
    double f1;
};
std::vector<FilterReferenceLine> filter_reference_lines();

} // namespace ragprobe::pipeline
