#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "ragprobe/metrics/resampling.hpp"

namespace ragprobe::metrics {

/// units[i][a]: category code given to item i by annotator a, nullopt if absent.
using ReliabilityData = std::vector<std::vector<std::optional<int>>>;

struct AgreementResult {
    std::optional<double> alpha; // nullopt when fewer than one pairable item
    bool zero_expected_disagreement = false; // alpha reported as 1 by convention
    std::size_t items_used = 0;
    std::size_t pairable_values = 0;
    std::optional<Interval> ci;
    std::string note;
};

/// Coincidence matrix over the categories present, in ascending code order.
Eigen::MatrixXd coincidence_matrix(const ReliabilityData& units, std::vector<int>* categories = nullptr);

/// Nominal Krippendorff alpha. Items with fewer than two labels are dropped.
AgreementResult krippendorff_alpha(const ReliabilityData& units);

/// Same, plus a percentile bootstrap interval over items.
AgreementResult krippendorff_alpha(const ReliabilityData& units, std::size_t replicates, std::uint64_t seed);

} // namespace ragprobe::metrics
