#pragma once

// Reference computations written from the textbook definitions, sharing no
// code with the library. Tests compare library output against these.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ragprobe/corpus/types.hpp"

namespace ragprobe::oracle {

inline std::vector<std::string> words(const std::string& text)
{
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char c : text) {
        const bool word_char = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
        if (word_char) {
            cur += static_cast<char>((c >= 'A' && c <= 'Z') ? c - 'A' + 'a' : c);
        } else if (!cur.empty()) {
            out.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

struct ScoredId {
    std::string id;
    double score = 0.0;
};

/// Okapi BM25 by exhaustive scan: every passage is scored against every
/// distinct query term, df counted by scanning the corpus.
inline std::vector<ScoredId> bm25_search(const std::vector<corpus::Passage>& passages, const std::string& query,
                                         std::size_t k, double k1 = 1.2, double b = 0.75)
{
    const double n = static_cast<double>(passages.size());
    std::vector<std::vector<std::string>> docs;
    double total_len = 0.0;
    for (const auto& p : passages) {
        docs.push_back(words(p.text));
        total_len += static_cast<double>(docs.back().size());
    }
    const double avg = total_len / n;
    const auto q = words(query);
    const std::set<std::string> terms(q.begin(), q.end());

    std::vector<ScoredId> scored;
    for (std::size_t d = 0; d < docs.size(); ++d) {
        double s = 0.0;
        for (const auto& t : terms) {
            double df = 0.0;
            for (const auto& other : docs) df += std::count(other.begin(), other.end(), t) > 0 ? 1.0 : 0.0;
            const double tf = static_cast<double>(std::count(docs[d].begin(), docs[d].end(), t));
            if (tf == 0.0) continue;
            const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
            const double len = static_cast<double>(docs[d].size());
            s += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * len / avg));
        }
        if (s > 0.0) scored.push_back({passages[d].passage_id, s});
    }
    std::stable_sort(scored.begin(), scored.end(), [](const ScoredId& x, const ScoredId& y) {
        return x.score != y.score ? x.score > y.score : x.id < y.id;
    });
    if (scored.size() > k) scored.resize(k);
    return scored;
}

/// Exhaustive inner-product ranking of unit-normalised rows.
inline std::vector<ScoredId> dense_search(const std::vector<std::string>& ids, const std::vector<std::vector<double>>& rows,
                                          const std::vector<double>& query, std::size_t k)
{
    std::vector<ScoredId> scored;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        double norm = 0.0;
        for (double x : rows[i]) norm += x * x;
        norm = std::sqrt(norm);
        double dot = 0.0;
        for (std::size_t j = 0; j < query.size(); ++j) dot += rows[i][j] / norm * query[j];
        scored.push_back({ids[i], dot});
    }
    std::sort(scored.begin(), scored.end(), [](const ScoredId& x, const ScoredId& y) {
        return x.score != y.score ? x.score > y.score : x.id < y.id;
    });
    if (scored.size() > k) scored.resize(k);
    return scored;
}

struct AlphaOracle {
    std::optional<double> alpha;     // nullopt: no pairable values or no expected disagreement
    bool zero_expected = false;
    std::size_t pairable = 0;
};

/// Nominal Krippendorff alpha from pair counts rather than a coincidence
/// matrix. Observed disagreement sums, per item, the ordered value pairs that
/// differ divided by m_u - 1. Expected disagreement counts differing ordered
/// pairs over all pairable values pooled.
inline AlphaOracle krippendorff_alpha(const std::vector<std::vector<std::optional<int>>>& units)
{
    double observed_pairs = 0.0;
    std::map<int, double> pooled;
    double n = 0.0;
    for (const auto& item : units) {
        std::vector<int> values;
        for (const auto& v : item) {
            if (v) values.push_back(*v);
        }
        if (values.size() < 2) continue;
        const double m = static_cast<double>(values.size());
        double differing = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            for (std::size_t j = 0; j < values.size(); ++j) {
                if (i != j && values[i] != values[j]) differing += 1.0;
            }
        }
        observed_pairs += differing / (m - 1.0);
        for (int v : values) pooled[v] += 1.0;
        n += m;
    }
    AlphaOracle out;
    out.pairable = static_cast<std::size_t>(n);
    if (n < 2.0) return out;
    double same = 0.0;
    for (const auto& [v, c] : pooled) same += c * (c - 1.0);
    const double expected_pairs = n * (n - 1.0) - same;
    if (expected_pairs == 0.0) {
        out.zero_expected = true;
        return out;
    }
    const double d_o = observed_pairs / n;
    const double d_e = expected_pairs / (n * (n - 1.0));
    out.alpha = 1.0 - d_o / d_e;
    return out;
}

inline std::uint64_t choose(std::uint64_t n, std::uint64_t r)
{
    std::uint64_t c = 1;
    for (std::uint64_t i = 1; i <= r; ++i) c = c * (n - r + i) / i;
    return c;
}

/// Two-sided exact McNemar p: min(1, 2 * P(X <= min(b, c))), X ~ Bin(b + c, 1/2),
/// summed in integers and divided once so small cases are exact.
inline double mcnemar_p(std::uint64_t b, std::uint64_t c)
{
    const std::uint64_t n = b + c;
    if (n == 0) return 1.0;
    std::uint64_t tail = 0;
    for (std::uint64_t i = 0; i <= std::min(b, c); ++i) tail += choose(n, i);
    const double p = 2.0 * static_cast<double>(tail) / std::ldexp(1.0, static_cast<int>(n));
    return std::min(1.0, p);
}

struct Prf {
    std::optional<double> precision, recall, f1;
};

inline Prf prf(std::size_t tp, std::size_t fp, std::size_t fn)
{
    Prf out;
    if (tp + fp) out.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    if (tp + fn) out.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    if (out.precision && out.recall) out.f1 = 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
    return out;
}

} // namespace ragprobe::oracle
