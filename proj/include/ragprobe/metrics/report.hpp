#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ragprobe/common/jsonl.hpp"

namespace ragprobe::metrics {

using Stratum = std::map<std::string, std::string>;

/// One reported number. An undefined metric (zero denominator and the like)
/// has no value and a reason instead; it is never coerced to 0 or 1.
struct MetricReport {
    std::string metric;
    std::optional<double> value;
    std::string undefined_reason;
    std::optional<double> ci_low;
    std::optional<double> ci_high;
    std::size_t n = 0;
    Stratum stratum;

    bool defined() const { return value.has_value(); }
};

MetricReport defined_metric(std::string metric, double value, std::size_t n, Stratum stratum = {});
MetricReport undefined_metric(std::string metric, std::string reason, std::size_t n = 0, Stratum stratum = {});

/// num/den, or undefined with `reason` when den == 0.
MetricReport ratio_metric(std::string metric, double num, double den, std::size_t n, const std::string& reason);

Json to_json(const MetricReport& r);
MetricReport metric_report_from_json(const Json& j);

/// Fixed-width text table: metric, stratum, value, 95% CI, n.
std::string render_table(const std::vector<MetricReport>& reports);

} // namespace ragprobe::metrics
