#pragma once

// A synthetic annotation export with known ground truth: queries with ranked
// passages and must-have statements, responses with references, statements
// and completeness grades. The brute-force expectations below are computed
// straight from this ground truth and never from the library's label
// builders.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ragprobe/common/jsonl.hpp"
#include "test_support.hpp"

namespace ragprobe::fixture {

enum class Level { full, partial, none };

inline const char* level_name(Level l)
{
    return l == Level::full ? "full" : l == Level::partial ? "partial" : "none";
}

struct FxQuery {
    std::string query_id;
    std::string query_type;
    std::vector<std::string> ranked;
    std::vector<std::string> must_have;
    std::map<std::string, std::map<std::string, Level>> support; // passage -> statement -> level
};

struct FxRef {
    int ordinal = 0;
    std::vector<std::string> matched; // empty: self-generated
};

struct FxStatement {
    std::string statement_id;
    std::vector<int> citations; // may name ordinals with no reference (unresolved)
    bool verdict = false;
};

struct FxResponse {
    std::string query_id;
    std::string model_id;
    std::vector<FxRef> refs;
    std::vector<FxStatement> statements;
    std::map<std::string, Level> completeness; // must-have statement -> level
};

struct MetricFixture {
    std::vector<FxQuery> queries;
    std::vector<FxResponse> responses;
    /// Second annotator on the first query's relevance grid, for agreement.
    bool second_annotator = false;
    std::size_t k = 0;

    const FxQuery& query(const std::string& id) const
    {
        for (const auto& q : queries) {
            if (q.query_id == id) return q;
        }
        throw std::out_of_range(id);
    }

    std::vector<Json> records() const;
};

inline MetricFixture make_metric_fixture(std::uint64_t seed, std::size_t n_queries = 5, std::size_t k = 8,
                                         std::size_t must_haves = 3, bool second_annotator = false)
{
    testing::Gen g(seed);
    MetricFixture fx;
    fx.k = k;
    fx.second_annotator = second_annotator;
    const std::vector<std::string> models{"model_a", "model_b"};
    for (std::size_t qi = 0; qi < n_queries; ++qi) {
        FxQuery q;
        q.query_id = "q" + std::to_string(qi + 1);
        q.query_type = qi % 2 == 0 ? "patient" : "usmle";
        for (std::size_t s = 0; s < must_haves; ++s) q.must_have.push_back("m" + std::to_string(s + 1));
        // Every query draws from its own pool so that ids never collide across queries.
        for (std::size_t r = 0; r < k; ++r) q.ranked.push_back(q.query_id + "-p" + std::to_string(r + 1));
        for (const auto& p : q.ranked) {
            for (const auto& s : q.must_have) {
                const double u = g.real(0.0, 1.0);
                q.support[p][s] = u < 0.72 ? Level::none : u < 0.86 ? Level::partial : Level::full;
            }
        }
        fx.queries.push_back(q);

        for (const auto& m : models) {
            FxResponse r;
            r.query_id = q.query_id;
            r.model_id = m;
            const std::size_t n_refs = g.uniform(1, 4);
            for (std::size_t o = 1; o <= n_refs; ++o) {
                FxRef ref;
                ref.ordinal = static_cast<int>(o);
                if (!g.coin(0.25)) {
                    const std::size_t n_matched = g.uniform(1, 2);
                    std::set<std::string> chosen;
                    while (chosen.size() < n_matched) chosen.insert(g.pick(q.ranked));
                    ref.matched.assign(chosen.begin(), chosen.end());
                }
                r.refs.push_back(ref);
            }
            const std::size_t n_statements = g.uniform(2, 5);
            for (std::size_t s = 0; s < n_statements; ++s) {
                FxStatement st;
                st.statement_id = "s" + std::to_string(s + 1);
                const std::size_t n_cites = g.uniform(0, 2);
                std::set<int> cites;
                for (std::size_t c = 0; c < n_cites; ++c) {
                    // Occasionally cite one past the list so that the unresolved path is exercised.
                    cites.insert(static_cast<int>(g.uniform(1, n_refs + (g.coin(0.15) ? 1 : 0))));
                }
                st.citations.assign(cites.begin(), cites.end());
                st.verdict = g.coin(0.75);
                r.statements.push_back(st);
            }
            for (const auto& s : q.must_have) {
                const double u = g.real(0.0, 1.0);
                r.completeness[s] = u < 0.3 ? Level::none : u < 0.55 ? Level::partial : Level::full;
            }
            fx.responses.push_back(r);
        }
    }
    return fx;
}

inline std::vector<Json> MetricFixture::records() const
{
    std::vector<Json> out;
    out.push_back(Json{{"type", "header"}, {"schema", "ragprobe.labels"}, {"version", 1}, {"stage", nullptr}});
    auto by = [](Json j, const std::string& annotator) {
        j["annotator_id"] = annotator;
        j["role"] = "annotator";
        return j;
    };
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
        const auto& q = queries[qi];
        for (std::size_t r = 0; r < q.ranked.size(); ++r) {
            for (const auto& s : q.must_have) {
                const Level level = q.support.at(q.ranked[r]).at(s);
                Json j{{"type", "relevance"}, {"query_id", q.query_id}, {"query_type", q.query_type},
                       {"passage_id", q.ranked[r]}, {"rank", r + 1}, {"statement_id", s},
                       {"level", level_name(level)}};
                out.push_back(by(j, "ann1"));
                if (second_annotator && qi == 0) {
                    // Flips every fifth grade between none and full.
                    Level other = level;
                    if ((r * q.must_have.size() + out.size()) % 5 == 0) other = level == Level::none ? Level::full : Level::none;
                    j["level"] = level_name(other);
                    out.push_back(by(j, "ann2"));
                }
            }
        }
    }
    for (const auto& r : responses) {
        for (const auto& ref : r.refs) {
            out.push_back(by(Json{{"type", "selection"}, {"query_id", r.query_id}, {"model_id", r.model_id},
                                  {"ref_ordinal", ref.ordinal}, {"matched_passage_ids", ref.matched}},
                             "ann1"));
        }
        for (const auto& s : r.statements) {
            out.push_back(by(Json{{"type", "factuality"}, {"query_id", r.query_id}, {"model_id", r.model_id},
                                  {"statement_id", s.statement_id}, {"verdict", s.verdict}, {"citations", s.citations}},
                             "ann1"));
        }
        for (const auto& [s, level] : r.completeness) {
            out.push_back(by(Json{{"type", "completeness"}, {"query_id", r.query_id}, {"model_id", r.model_id},
                                  {"must_have_statement_id", s}, {"level", level_name(level)}},
                             "ann1"));
        }
    }
    return out;
}

// ---- brute-force expectations ---------------------------------------------

inline bool relevant(const FxQuery& q, const std::string& p)
{
    for (const auto& s : q.must_have) {
        if (q.support.at(p).at(s) != Level::none) return true;
    }
    return false;
}

inline double precision_at(const MetricFixture& fx, std::size_t k, const std::string& type = "all")
{
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& q : fx.queries) {
        if (type != "all" && q.query_type != type) continue;
        std::size_t rel = 0;
        for (std::size_t r = 0; r < k; ++r) rel += relevant(q, q.ranked[r]);
        sum += static_cast<double>(rel) / static_cast<double>(k);
        ++n;
    }
    return sum / static_cast<double>(n);
}

inline double miss_at(const MetricFixture& fx, std::size_t k, const std::string& type = "all")
{
    std::size_t missed = 0, n = 0;
    for (const auto& q : fx.queries) {
        if (type != "all" && q.query_type != type) continue;
        bool any = false;
        for (std::size_t r = 0; r < k; ++r) any = any || relevant(q, q.ranked[r]);
        missed += any ? 0 : 1;
        ++n;
    }
    return static_cast<double>(missed) / static_cast<double>(n);
}

inline bool covered(const FxQuery& q, const std::string& s, std::size_t k)
{
    for (std::size_t r = 0; r < k; ++r) {
        if (q.support.at(q.ranked[r]).at(s) != Level::none) return true;
    }
    return false;
}

inline double coverage_at(const MetricFixture& fx, std::size_t k, const std::string& type = "all")
{
    std::size_t hit = 0, total = 0;
    for (const auto& q : fx.queries) {
        if (type != "all" && q.query_type != type) continue;
        for (const auto& s : q.must_have) {
            hit += covered(q, s, k);
            ++total;
        }
    }
    return static_cast<double>(hit) / static_cast<double>(total);
}

inline bool model_matches(const FxResponse& r, const std::string& model) { return model == "all" || r.model_id == model; }

struct Pr {
    std::optional<double> precision, recall;
};

inline Pr selection(const MetricFixture& fx, const std::string& model)
{
    std::size_t both = 0, cited_n = 0, rel_n = 0;
    for (const auto& r : fx.responses) {
        if (!model_matches(r, model)) continue;
        const auto& q = fx.query(r.query_id);
        std::set<std::string> cited;
        for (const auto& ref : r.refs) cited.insert(ref.matched.begin(), ref.matched.end());
        for (const auto& p : cited) both += relevant(q, p);
        cited_n += cited.size();
        for (const auto& p : q.ranked) rel_n += relevant(q, p);
    }
    Pr out;
    if (cited_n) out.precision = static_cast<double>(both) / static_cast<double>(cited_n);
    if (rel_n) out.recall = static_cast<double>(both) / static_cast<double>(rel_n);
    return out;
}

inline Pr selection_per_reference(const MetricFixture& fx, const std::string& model)
{
    std::size_t good_refs = 0, refs = 0, credited_n = 0, rel_n = 0;
    for (const auto& r : fx.responses) {
        if (!model_matches(r, model)) continue;
        const auto& q = fx.query(r.query_id);
        std::set<std::string> credited;
        for (const auto& ref : r.refs) {
            if (ref.matched.empty()) continue;
            ++refs;
            // Best-ranked relevant passage of this reference.
            for (const auto& p : q.ranked) {
                if (std::find(ref.matched.begin(), ref.matched.end(), p) != ref.matched.end() && relevant(q, p)) {
                    ++good_refs;
                    credited.insert(p);
                    break;
                }
            }
        }
        credited_n += credited.size();
        for (const auto& p : q.ranked) rel_n += relevant(q, p);
    }
    Pr out;
    if (refs) out.precision = static_cast<double>(good_refs) / static_cast<double>(refs);
    if (rel_n) out.recall = static_cast<double>(credited_n) / static_cast<double>(rel_n);
    return out;
}

struct Quality {
    double response = 0.0;
    double statement = 0.0;
};

inline Quality factuality(const MetricFixture& fx, const std::string& model)
{
    double resp = 0.0, stmt = 0.0;
    std::size_t n = 0, with = 0;
    for (const auto& r : fx.responses) {
        if (!model_matches(r, model)) continue;
        std::size_t t = 0;
        for (const auto& s : r.statements) t += s.verdict;
        resp += t == r.statements.size() ? 1.0 : 0.0;
        ++n;
        if (!r.statements.empty()) {
            stmt += static_cast<double>(t) / static_cast<double>(r.statements.size());
            ++with;
        }
    }
    return {resp / static_cast<double>(n), stmt / static_cast<double>(with)};
}

/// Bucket names follow the default precedence: true_positive > false_positive > self_generated.
inline std::string evidence_bucket(const MetricFixture& fx, const FxResponse& r, const FxStatement& s)
{
    if (s.citations.empty()) return "no_reference";
    const auto& q = fx.query(r.query_id);
    bool tp = false, fp = false, sg = false, pending = false;
    for (int c : s.citations) {
        const FxRef* ref = nullptr;
        for (const auto& x : r.refs) {
            if (x.ordinal == c) ref = &x;
        }
        if (!ref) {
            pending = true;
            continue;
        }
        if (ref->matched.empty()) {
            sg = true;
            continue;
        }
        bool any = false;
        for (const auto& p : ref->matched) any = any || relevant(q, p);
        (any ? tp : fp) = true;
    }
    if (tp) return "true_positive";
    if (pending) return "unresolved";
    if (fp) return "false_positive";
    if (sg) return "self_generated";
    return "unresolved";
}

inline std::map<std::string, std::pair<std::size_t, std::size_t>> evidence_tally(const MetricFixture& fx,
                                                                                  const std::string& model)
{
    std::map<std::string, std::pair<std::size_t, std::size_t>> tally;
    for (const auto& r : fx.responses) {
        if (!model_matches(r, model)) continue;
        for (const auto& s : r.statements) {
            auto& t = tally[evidence_bucket(fx, r, s)];
            t.first += s.verdict;
            ++t.second;
        }
    }
    return tally;
}

inline double credit(Level l, double partial_weight)
{
    return l == Level::full ? 1.0 : l == Level::partial ? partial_weight : 0.0;
}

inline Quality completeness(const MetricFixture& fx, const std::string& model, double w = 1.0)
{
    double resp = 0.0, stmt = 0.0;
    std::size_t n = 0;
    for (const auto& r : fx.responses) {
        if (!model_matches(r, model)) continue;
        double sum = 0.0;
        bool all = true;
        for (const auto& [s, l] : r.completeness) {
            sum += credit(l, w);
            all = all && credit(l, w) == 1.0;
        }
        resp += all ? 1.0 : 0.0;
        stmt += sum / static_cast<double>(r.completeness.size());
        ++n;
    }
    return {resp / static_cast<double>(n), stmt / static_cast<double>(n)};
}

inline std::map<std::string, std::pair<double, std::size_t>> support_tally(const MetricFixture& fx,
                                                                           const std::string& model, double w = 1.0)
{
    std::map<std::string, std::pair<double, std::size_t>> tally;
    for (const auto& r : fx.responses) {
        if (!model_matches(r, model)) continue;
        const auto& q = fx.query(r.query_id);
        std::set<std::string> cited;
        for (const auto& ref : r.refs) cited.insert(ref.matched.begin(), ref.matched.end());
        for (const auto& [s, l] : r.completeness) {
            bool supported = false, referenced = false;
            for (const auto& p : q.ranked) {
                if (q.support.at(p).at(s) == Level::none) continue;
                supported = true;
                referenced = referenced || cited.contains(p);
            }
            const std::string bucket =
                !supported ? "unsupported" : referenced ? "supported_referenced" : "supported_missed";
            tally[bucket].first += credit(l, w);
            ++tally[bucket].second;
        }
    }
    return tally;
}

} // namespace ragprobe::fixture
