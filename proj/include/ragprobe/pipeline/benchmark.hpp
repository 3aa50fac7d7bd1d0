#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ragprobe/metrics/report.hpp"
#include "ragprobe/pipeline/pipeline.hpp"

namespace ragprobe::pipeline {

struct BenchmarkCell {
    PipelineConfig config;
    metrics::MetricReport accuracy; // with bootstrap CI
    std::size_t n = 0;
    std::size_t failed = 0;   // stage errors, counted incorrect
    std::size_t unparsed = 0; // no option extracted, counted incorrect
    std::optional<double> delta_vs_baseline;
    std::optional<double> mcnemar_p;
    std::vector<bool> per_item_correct;
};

struct BenchmarkTable {
    std::string baseline_name; // empty when the grid has no non-RAG config
    std::vector<BenchmarkCell> cells; // grid order
};

struct BenchmarkOptions {
    std::size_t bootstrap_replicates = 10000;
    std::uint64_t seed = 20240611;
    std::size_t parallelism = 1;
    /// Previously stored record for an id; found records are reused, not rerun.
    std::function<std::optional<RunRecord>(const std::string& record_id)> existing;
};

/// Builds the pipeline for one grid cell.
using PipelineFactory = std::function<Pipeline(const PipelineConfig&)>;

/// Called with every record as it is produced, e.g. to persist it.
using RecordSink = std::function<void(const RunRecord&)>;

/// Runs every item under every configuration. Items run in parallel up to
/// options.parallelism; cells and records come back in a fixed order.
BenchmarkTable run_benchmark(const std::vector<BenchmarkItem>& items, const std::vector<PipelineConfig>& grid,
                             const PipelineFactory& factory, const BenchmarkOptions& options = {},
                             const RecordSink& sink = {});

/// Accuracy cells from previously stored records (no model calls).
BenchmarkTable tabulate(const std::vector<BenchmarkItem>& items, const std::vector<PipelineConfig>& grid,
                        const std::vector<RunRecord>& records, const BenchmarkOptions& options = {});

Json to_json(const BenchmarkTable& t);

} // namespace ragprobe::pipeline
