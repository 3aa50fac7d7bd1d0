#include "ragprobe/metrics/agreement.hpp"

#include <algorithm>
#include <map>

namespace ragprobe::metrics {
namespace {

struct AlphaParts {
    double observed = 0.0; // sum of off-diagonal coincidences
    double expected = 0.0; // sum of off-diagonal n_c * n_k
    double n = 0.0;
    std::size_t items = 0;
};

AlphaParts alpha_parts(const Eigen::MatrixXd& o, std::size_t items)
{
    AlphaParts p;
    p.items = items;
    const Eigen::VectorXd marginals = o.rowwise().sum();
    p.n = marginals.sum();
    p.observed = o.sum() - o.trace();
    p.expected = marginals.sum() * marginals.sum() - marginals.squaredNorm();
    return p;
}

std::optional<double> alpha_from(const AlphaParts& p, bool* degenerate = nullptr)
{
    if (p.items == 0 || p.n < 2.0) return std::nullopt;
    if (p.expected == 0.0) {
        if (degenerate) *degenerate = true;
        return 1.0;
    }
    return 1.0 - (p.n - 1.0) * p.observed / p.expected;
}

std::vector<int> categories_of(const ReliabilityData& units)
{
    std::vector<int> cats;
    for (const auto& u : units) {
        for (const auto& v : u) {
            if (v) cats.push_back(*v);
        }
    }
    std::sort(cats.begin(), cats.end());
    cats.erase(std::unique(cats.begin(), cats.end()), cats.end());
    return cats;
}

/// Adds one unit's pairable values to the coincidence matrix; returns false if it has fewer than two.
bool add_unit(Eigen::MatrixXd& o, const std::vector<std::optional<int>>& unit, const std::map<int, Eigen::Index>& index)
{
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(o.rows());
    double m = 0.0;
    for (const auto& v : unit) {
        if (!v) continue;
        counts[index.at(*v)] += 1.0;
        m += 1.0;
    }
    if (m < 2.0) return false;
    // Ordered pairs of distinct values: counts*counts^T minus self-pairs on the diagonal.
    Eigen::MatrixXd pairs = counts * counts.transpose();
    pairs.diagonal() -= counts;
    o += pairs / (m - 1.0);
    return true;
}

} // namespace

Eigen::MatrixXd coincidence_matrix(const ReliabilityData& units, std::vector<int>* categories)
{
    const auto cats = categories_of(units);
    std::map<int, Eigen::Index> index;
    for (std::size_t i = 0; i < cats.size(); ++i) index.emplace(cats[i], static_cast<Eigen::Index>(i));
    Eigen::MatrixXd o = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(cats.size()),
                                              static_cast<Eigen::Index>(cats.size()));
    for (const auto& u : units) add_unit(o, u, index);
    if (categories) *categories = cats;
    return o;
}

AgreementResult krippendorff_alpha(const ReliabilityData& units)
{
    const auto cats = categories_of(units);
    std::map<int, Eigen::Index> index;
    for (std::size_t i = 0; i < cats.size(); ++i) index.emplace(cats[i], static_cast<Eigen::Index>(i));
    Eigen::MatrixXd o = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(cats.size()),
                                              static_cast<Eigen::Index>(cats.size()));
    std::size_t used = 0;
    for (const auto& u : units) used += add_unit(o, u, index) ? 1 : 0;

    AgreementResult r;
    const AlphaParts parts = alpha_parts(o, used);
    r.items_used = used;
    r.pairable_values = static_cast<std::size_t>(parts.n + 0.5);
    r.alpha = alpha_from(parts, &r.zero_expected_disagreement);
    if (!r.alpha) {
        r.note = "no item carries two or more labels";
    } else if (r.zero_expected_disagreement) {
        r.note = "all pairable labels fall in one category; alpha set to 1 by convention";
    }
    return r;
}

AgreementResult krippendorff_alpha(const ReliabilityData& units, std::size_t replicates, std::uint64_t seed)
{
    AgreementResult r = krippendorff_alpha(units);
    if (!r.alpha) return r;

    // Only pairable items take part in the resampling.
    const auto cats = categories_of(units);
    std::map<int, Eigen::Index> index;
    for (std::size_t i = 0; i < cats.size(); ++i) index.emplace(cats[i], static_cast<Eigen::Index>(i));
    const auto k = static_cast<Eigen::Index>(cats.size());
    std::vector<Eigen::MatrixXd> per_unit;
    for (const auto& u : units) {
        Eigen::MatrixXd o = Eigen::MatrixXd::Zero(k, k);
        if (add_unit(o, u, index)) per_unit.push_back(std::move(o));
    }
    auto statistic = [&](std::span<const std::size_t> idx) -> std::optional<double> {
        Eigen::MatrixXd o = Eigen::MatrixXd::Zero(k, k);
        for (auto i : idx) o += per_unit[i];
        return alpha_from(alpha_parts(o, idx.size()));
    };
    r.ci = bootstrap_ci(per_unit.size(), statistic, replicates, seed);
    return r;
}

} // namespace ragprobe::metrics
