#include "ragprobe/metrics/resampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ragprobe/common/error.hpp"

namespace ragprobe::metrics {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

ReplicateStream::ReplicateStream(std::uint64_t seed, std::uint64_t replicate)
    : key_(splitmix64(splitmix64(seed) ^ replicate))
{
}

std::uint64_t ReplicateStream::next()
{
    return splitmix64(key_ + 0x9E3779B97F4A7C15ULL * ++counter_);
}

std::size_t ReplicateStream::index(std::size_t n)
{
    const unsigned __int128 wide = static_cast<unsigned __int128>(next()) * n;
    return static_cast<std::size_t>(wide >> 64);
}

double percentile_sorted(std::span<const double> sorted, double q)
{
    if (sorted.empty()) throw InvalidArgument("percentile of an empty sample");
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

std::optional<Interval> bootstrap_ci(std::size_t n, const ResampleStatistic& statistic, std::size_t replicates,
                                     std::uint64_t seed, double confidence)
{
    if (n == 0) throw InvalidArgument("bootstrap over an empty sample");
    if (replicates == 0) throw InvalidArgument("bootstrap needs at least one replicate");
    if (!(confidence > 0.0 && confidence < 1.0)) throw InvalidArgument("confidence must lie in (0, 1)");
    std::vector<double> values;
    values.reserve(replicates);
    std::vector<std::size_t> idx(n);
    for (std::size_t r = 0; r < replicates; ++r) {
        ReplicateStream stream(seed, r);
        for (auto& i : idx) i = stream.index(n);
        if (auto v = statistic(idx)) values.push_back(*v);
    }
    if (values.empty()) return std::nullopt;
    std::sort(values.begin(), values.end());
    const double alpha = (1.0 - confidence) / 2.0;
    return Interval{percentile_sorted(values, alpha), percentile_sorted(values, 1.0 - alpha)};
}

Interval bootstrap_mean_ci(std::span<const double> sample, std::size_t replicates, std::uint64_t seed,
                           double confidence)
{
    auto mean_of = [&](std::span<const std::size_t> idx) -> std::optional<double> {
        double s = 0.0;
        for (auto i : idx) s += sample[i];
        return s / static_cast<double>(idx.size());
    };
    return *bootstrap_ci(sample.size(), mean_of, replicates, seed, confidence);
}

double binomial_half_cdf(std::size_t k, std::size_t n)
{
    if (k >= n) return 1.0;
    if (n <= 62) {
        std::uint64_t coeff = 1; // C(n, 0)
        std::uint64_t sum = 0;
        for (std::size_t i = 0; i <= k; ++i) {
            sum += coeff;
            coeff = coeff * (n - i) / (i + 1);
        }
        return std::ldexp(static_cast<double>(sum), -static_cast<int>(n));
    }
    const double log_half_n = static_cast<double>(n) * std::log(0.5);
    const double lg_n1 = std::lgamma(static_cast<double>(n) + 1.0);
    double sum = 0.0;
    for (std::size_t i = 0; i <= k; ++i) {
        const double lc = lg_n1 - std::lgamma(static_cast<double>(i) + 1.0) -
                          std::lgamma(static_cast<double>(n - i) + 1.0);
        sum += std::exp(lc + log_half_n);
    }
    return std::min(1.0, sum);
}

SignificanceResult mcnemar_exact(std::size_t b, std::size_t c)
{
    SignificanceResult r{b, c, 1.0};
    const std::size_t n = b + c;
    if (n == 0) return r;
    r.p_value = std::min(1.0, 2.0 * binomial_half_cdf(std::min(b, c), n));
    return r;
}

SignificanceResult mcnemar_exact(const std::vector<bool>& correct_a, const std::vector<bool>& correct_b)
{
    if (correct_a.size() != correct_b.size()) {
        throw InvalidArgument("paired samples differ in length (" + std::to_string(correct_a.size()) + " vs " +
                              std::to_string(correct_b.size()) + ")");
    }
    std::size_t b = 0, c = 0;
    for (std::size_t i = 0; i < correct_a.size(); ++i) {
        if (correct_a[i] && !correct_b[i]) ++b;
        if (!correct_a[i] && correct_b[i]) ++c;
    }
    return mcnemar_exact(b, c);
}

} // namespace ragprobe::metrics
