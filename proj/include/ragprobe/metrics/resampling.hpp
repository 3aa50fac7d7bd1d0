#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace ragprobe::metrics {

struct Interval {
    double low = 0.0;
    double high = 0.0;
};

/// splitmix64 finaliser.
std::uint64_t splitmix64(std::uint64_t x);

/// Counter-based stream: draw j of replicate r depends only on (seed, r, j),
/// so replicates are identical however they are scheduled.
class ReplicateStream {
public:
    ReplicateStream(std::uint64_t seed, std::uint64_t replicate);
    std::uint64_t next();
    /// Uniform in [0, n).
    std::size_t index(std::size_t n);

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Linear-interpolation percentile of an ascending-sorted sample, q in [0, 1].
double percentile_sorted(std::span<const double> sorted, double q);

/// Statistic over a resample given as item indices; nullopt when undefined.
using ResampleStatistic = std::function<std::optional<double>(std::span<const std::size_t>)>;

/// Percentile interval over `replicates` resamples of n items drawn with
/// replacement. Replicates whose statistic is undefined are skipped; nullopt
/// when every replicate is. Throws InvalidArgument when n == 0.
std::optional<Interval> bootstrap_ci(std::size_t n, const ResampleStatistic& statistic, std::size_t replicates,
                                     std::uint64_t seed, double confidence = 0.95);

/// Interval for the mean of `sample`.
Interval bootstrap_mean_ci(std::span<const double> sample, std::size_t replicates, std::uint64_t seed,
                           double confidence = 0.95);

struct SignificanceResult {
    std::size_t b = 0; // A correct, B wrong
    std::size_t c = 0; // A wrong, B correct
    double p_value = 1.0;
};

/// P(X <= k) for X ~ Binomial(n, 1/2).
double binomial_half_cdf(std::size_t k, std::size_t n);

SignificanceResult mcnemar_exact(std::size_t b, std::size_t c);
/// Throws InvalidArgument on length mismatch.
SignificanceResult mcnemar_exact(const std::vector<bool>& correct_a, const std::vector<bool>& correct_b);

} // namespace ragprobe::metrics
