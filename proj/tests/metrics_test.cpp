#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "metric_fixture.hpp"
#include "oracles.hpp"
#include "ragprobe/common/error.hpp"
#include "ragprobe/metrics/agreement.hpp"
#include "ragprobe/metrics/classifier.hpp"
#include "ragprobe/metrics/evaluate.hpp"
#include "ragprobe/metrics/labels.hpp"
#include "ragprobe/metrics/resampling.hpp"
#include "test_support.hpp"

namespace ragprobe::metrics {
namespace {

using ragprobe::testing::Gen;
using ragprobe::testing::TempDir;
using L = SupportLevel;

QueryRelevance query(std::vector<bool> relevance, std::string type = "patient", std::string id = "q")
{
    QueryRelevance q;
    q.query_id = std::move(id);
    q.query_type = std::move(type);
    q.must_have_statements = {"m1"};
    for (std::size_t i = 0; i < relevance.size(); ++i) {
        const std::string p = q.query_id + "-p" + std::to_string(i + 1);
        q.ranked_passages.push_back(p);
        q.support[p]["m1"] = relevance[i] ? L::full : L::none;
    }
    return q;
}

// ---- relevance ------------------------------------------------------------

TEST(PassageRelevant, Examples)
{
    const std::vector<std::string> ms{"m1", "m2", "m3"};
    EXPECT_TRUE(passage_relevant({{"m1", L::none}, {"m2", L::none}, {"m3", L::partial}}, ms));
    EXPECT_FALSE(passage_relevant({{"m1", L::none}, {"m2", L::none}, {"m3", L::none}}, ms));
    EXPECT_TRUE(passage_relevant({{"m1", L::full}, {"m2", L::none}}, {"m1", "m2"}));
    try {
        passage_relevant({{"m1", L::none}}, ms);
        FAIL();
    } catch (const InvalidArgument& e) {
        EXPECT_NE(std::string(e.what()).find("m2"), std::string::npos);
    }
}

TEST(RetrievalMetrics, PrecisionHandCount)
{
    const std::vector<QueryRelevance> qs{query({true, false, false, true})};
    EXPECT_DOUBLE_EQ(*precision_at_k(qs, 4).value, 0.5);
    EXPECT_EQ(precision_at_k(qs, 4).metric, "precision@4");
    EXPECT_EQ(precision_at_k(qs, 4).stratum.at("k"), "4");
    const std::vector<QueryRelevance> all{query({true, true, true})};
    EXPECT_DOUBLE_EQ(*precision_at_k(all, 3).value, 1.0);
    EXPECT_THROW(precision_at_k(qs, 5), InvalidArgument);
    EXPECT_THROW(miss_at_k(qs, 0), InvalidArgument);
}

TEST(RetrievalMetrics, MissContributions)
{
    const std::vector<QueryRelevance> none{query({false, false})};
    EXPECT_DOUBLE_EQ(*miss_at_k(none, 2).value, 1.0);
    const std::vector<QueryRelevance> one{query({false, true})};
    EXPECT_DOUBLE_EQ(*miss_at_k(one, 2).value, 0.0);
    const std::vector<QueryRelevance> mixed{query({false, false}, "patient", "a"), query({true, false}, "usmle", "b")};
    EXPECT_DOUBLE_EQ(*miss_at_k(mixed, 2).value, 0.5);
}

TEST(RetrievalMetrics, CoverageHandCount)
{
    QueryRelevance q;
    q.query_id = "q";
    q.must_have_statements = {"s1", "s2", "s3"};
    q.ranked_passages = {"p1", "p2"};
    q.support["p1"] = {{"s1", L::full}, {"s2", L::none}, {"s3", L::none}};
    q.support["p2"] = {{"s1", L::none}, {"s2", L::none}, {"s3", L::partial}};
    const std::vector<QueryRelevance> qs{q};
    EXPECT_DOUBLE_EQ(*coverage_at_k(qs, 2).value, 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(*coverage_at_k(qs, 1).value, 1.0 / 3.0);
    q.support["p1"]["s1"] = L::none;
    q.support["p2"]["s3"] = L::none;
    const std::vector<QueryRelevance> unsupported{q};
    EXPECT_DOUBLE_EQ(*coverage_at_k(unsupported, 2).value, 0.0);
}

TEST(RetrievalMetrics, PooledAndMacroCoverageDiffer)
{
    QueryRelevance a = query({true}, "patient", "a");
    QueryRelevance b;
    b.query_id = "b";
    b.must_have_statements = {"x", "y", "z"};
    b.ranked_passages = {"b-p1"};
    b.support["b-p1"] = {{"x", L::none}, {"y", L::none}, {"z", L::none}};
    const std::vector<QueryRelevance> qs{a, b};
    EXPECT_DOUBLE_EQ(*coverage_at_k(qs, 1).value, 1.0 / 4.0);
    EXPECT_DOUBLE_EQ(*coverage_at_k_macro(qs, 1).value, 0.5);
}

TEST(RetrievalMetrics, StratifiedByQueryType)
{
    const std::vector<QueryRelevance> qs{query({true, false}, "patient", "a"), query({false, false}, "usmle", "b"),
                                         query({true, true}, "usmle", "c")};
    const auto out = stratify_by_query_type(qs, 2, precision_at_k);
    ASSERT_EQ(out.size(), 3u);
    EXPECT_EQ(out[0].stratum.at("query_type"), "all");
    EXPECT_DOUBLE_EQ(*out[0].value, (0.5 + 0.0 + 1.0) / 3.0);
    for (const auto& m : out) {
        if (m.stratum.at("query_type") == "patient") {
            EXPECT_DOUBLE_EQ(*m.value, 0.5);
        }
        if (m.stratum.at("query_type") == "usmle") {
            EXPECT_DOUBLE_EQ(*m.value, 0.5);
        }
        EXPECT_EQ(m.stratum.at("k"), "2");
    }
}

std::vector<QueryRelevance> random_queries(Gen& g, std::size_t depth)
{
    std::vector<QueryRelevance> qs;
    const std::size_t n = g.uniform(1, 12);
    for (std::size_t i = 0; i < n; ++i) {
        QueryRelevance q;
        q.query_id = "q" + std::to_string(i);
        q.query_type = g.coin() ? "patient" : "usmle";
        const std::size_t ms = g.uniform(1, 4);
        for (std::size_t s = 0; s < ms; ++s) q.must_have_statements.push_back("m" + std::to_string(s));
        for (std::size_t r = 0; r < depth; ++r) {
            const std::string p = q.query_id + "-" + std::to_string(r);
            q.ranked_passages.push_back(p);
            for (const auto& s : q.must_have_statements) {
                const double u = g.real(0, 1);
                q.support[p][s] = u < 0.8 ? L::none : u < 0.9 ? L::partial : L::full;
            }
        }
        qs.push_back(std::move(q));
    }
    return qs;
}

TEST(RetrievalMetricsProperty, MissPrecisionRelationAndCoverageMonotone)
{
    Gen g(5);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t depth = g.uniform(1, 16);
        const auto qs = random_queries(g, depth);
        for (const auto& q : qs) {
            const std::vector<QueryRelevance> one{q};
            EXPECT_DOUBLE_EQ(*precision_at_k(one, 1).value, 1.0 - *miss_at_k(one, 1).value);
            for (std::size_t k = 1; k <= depth; ++k) {
                EXPECT_EQ(*miss_at_k(one, k).value == 1.0, relevant_in_top_k(q, k) == 0);
            }
        }
        double previous = -1.0;
        for (std::size_t k = 1; k <= depth; ++k) {
            const double c = *coverage_at_k(qs, k).value;
            EXPECT_GE(c, previous);
            previous = c;
            const double p = *precision_at_k(qs, k).value;
            EXPECT_GE(p, 0.0);
            EXPECT_LE(p, 1.0);
        }
        auto shuffled = qs;
        std::shuffle(shuffled.begin(), shuffled.end(), g.rng());
        EXPECT_DOUBLE_EQ(*precision_at_k(shuffled, depth).value, *precision_at_k(qs, depth).value);
    }
}

// ---- selection ------------------------------------------------------------

ResponseSelection selection_response(std::vector<std::string> retrieved, std::set<std::string> relevant,
                                     std::vector<CitedReference> refs)
{
    return {"q", "m", std::move(retrieved), std::move(relevant), std::move(refs)};
}

TEST(Selection, HandCount)
{
    const std::vector<ResponseSelection> rs{
        selection_response({"p1", "p2", "p3", "p4", "p5"}, {"p1", "p5"}, {{1, {"p1"}, false}, {2, {"p3"}, false}})};
    const auto out = selection_metrics(rs);
    EXPECT_DOUBLE_EQ(*out.precision.value, 0.5);
    EXPECT_DOUBLE_EQ(*out.recall.value, 0.5);
    EXPECT_EQ(out.precision.metric, "selection_precision");
}

TEST(Selection, ExactRelevantSet)
{
    const std::vector<ResponseSelection> rs{
        selection_response({"p1", "p2", "p5"}, {"p1", "p5"}, {{1, {"p1", "p5"}, false}, {2, {}, false}})};
    const auto out = selection_metrics(rs);
    EXPECT_DOUBLE_EQ(*out.precision.value, 1.0);
    EXPECT_DOUBLE_EQ(*out.recall.value, 1.0);
}

TEST(Selection, ZeroDenominatorsAreUndefined)
{
    const std::vector<ResponseSelection> rs{selection_response({"p1"}, {}, {{1, {}, false}, {2, {"p1"}, true}})};
    const auto out = selection_metrics(rs);
    EXPECT_FALSE(out.precision.defined());
    EXPECT_FALSE(out.recall.defined());
    EXPECT_FALSE(out.precision.undefined_reason.empty());
}

TEST(Selection, PerReferenceVariant)
{
    // One reference matching two relevant passages: distinct-passage recall
    // credits both, per-reference recall credits only the better-ranked one.
    const std::vector<ResponseSelection> rs{
        selection_response({"p1", "p2", "p3"}, {"p1", "p2"}, {{1, {"p2", "p1"}, false}, {2, {"p3"}, false}})};
    const auto distinct = selection_metrics(rs);
    const auto per_ref = selection_metrics_per_reference(rs);
    EXPECT_DOUBLE_EQ(*distinct.precision.value, 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(*distinct.recall.value, 1.0);
    EXPECT_DOUBLE_EQ(*per_ref.precision.value, 0.5);
    EXPECT_DOUBLE_EQ(*per_ref.recall.value, 0.5);
    EXPECT_EQ(per_ref.precision.metric, "selection_precision_per_reference");
}

TEST(SelectionProperty, MicroPrecisionMatchesBruteForce)
{
    Gen g(9);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<ResponseSelection> rs;
        std::size_t cited_total = 0, cited_relevant = 0, relevant_retrieved = 0;
        for (std::size_t i = 0, n = g.uniform(1, 6); i < n; ++i) {
            ResponseSelection r;
            r.query_id = "q" + std::to_string(i);
            r.model_id = "m";
            for (std::size_t p = 0; p < 8; ++p) {
                r.retrieved.push_back(r.query_id + "p" + std::to_string(p));
                if (g.coin(0.3)) r.relevant.insert(r.retrieved.back());
            }
            if (g.coin(0.2)) r.relevant.insert(r.query_id + "elsewhere");
            std::set<std::string> cited;
            for (int o = 1, nr = static_cast<int>(g.uniform(0, 4)); o <= nr; ++o) {
                CitedReference ref{o, {}, g.coin(0.1)};
                if (g.coin(0.75)) {
                    for (std::size_t m = 0, nm = g.uniform(1, 3); m < nm; ++m) ref.matched_passages.push_back(g.pick(r.retrieved));
                    if (g.coin(0.1)) ref.matched_passages.push_back(r.query_id + "outside");
                }
                if (!ref.unresolved) {
                    for (const auto& p : ref.matched_passages) {
                        if (std::find(r.retrieved.begin(), r.retrieved.end(), p) != r.retrieved.end()) cited.insert(p);
                    }
                }
                r.references.push_back(ref);
            }
            cited_total += cited.size();
            for (const auto& p : cited) cited_relevant += r.relevant.contains(p);
            for (const auto& p : r.retrieved) relevant_retrieved += r.relevant.contains(p);
            rs.push_back(std::move(r));
        }
        const auto out = selection_metrics(rs);
        EXPECT_EQ(out.precision.defined(), cited_total > 0);
        EXPECT_EQ(out.recall.defined(), relevant_retrieved > 0);
        if (cited_total) {
            EXPECT_DOUBLE_EQ(*out.precision.value, double(cited_relevant) / double(cited_total));
        }
        if (relevant_retrieved) {
            EXPECT_DOUBLE_EQ(*out.recall.value, double(cited_relevant) / double(relevant_retrieved));
        }
        for (const auto* m : {&out.precision, &out.recall}) {
            if (m->value) {
                EXPECT_GE(*m->value, 0.0);
                EXPECT_LE(*m->value, 1.0);
            }
        }
    }
}

// ---- factuality -----------------------------------------------------------

ResponseFactuality facts(std::string q, std::vector<bool> verdicts)
{
    ResponseFactuality r;
    r.query_id = std::move(q);
    r.model_id = "m";
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        r.statement_ids.push_back("s" + std::to_string(i));
        r.verdicts["s" + std::to_string(i)] = verdicts[i];
    }
    return r;
}

TEST(Factuality, AllTrue)
{
    const std::vector<ResponseFactuality> rs{facts("q", {true, true, true})};
    const auto s = factuality_scores(rs);
    EXPECT_DOUBLE_EQ(*s.response_level.value, 1.0);
    EXPECT_DOUBLE_EQ(*s.statement_level.value, 1.0);
}

TEST(Factuality, OneFalseAmongFive)
{
    const std::vector<ResponseFactuality> rs{facts("q", {true, true, false, true, true})};
    const auto s = factuality_scores(rs);
    EXPECT_DOUBLE_EQ(*s.response_level.value, 0.0);
    EXPECT_DOUBLE_EQ(*s.statement_level.value, 0.8);
}

TEST(Factuality, StatementLevelIsMacroOverQueries)
{
    const std::vector<ResponseFactuality> rs{facts("a", {true, true}), facts("b", {true, false, true, false})};
    EXPECT_DOUBLE_EQ(*factuality_scores(rs).statement_level.value, 0.75);
}

TEST(Factuality, UnlabeledStatementAndResponseLabels)
{
    auto r = facts("q", {true});
    r.statement_ids.push_back("s_missing");
    std::vector<ResponseFactuality> rs{r};
    EXPECT_THROW(factuality_scores(rs), InvalidArgument);
    auto ok = facts("q", {true, true});
    ok.response_label = false;
    std::vector<ResponseFactuality> with_label{ok};
    EXPECT_DOUBLE_EQ(*factuality_scores(with_label).response_level.value, 1.0);
    EXPECT_DOUBLE_EQ(*factuality_scores(with_label, true).response_level.value, 0.0);
}

// ---- evidence buckets -----------------------------------------------------

EvidenceResponse evidence_fixture()
{
    EvidenceResponse r;
    r.query_id = "q";
    r.model_id = "m";
    r.relevant = {"rel"};
    r.references = {{1, {"rel"}, false}, {2, {"irr"}, false}, {3, {}, false}, {4, {}, true}};
    return r;
}

TEST(EvidenceBucket, Examples)
{
    const auto r = evidence_fixture();
    using B = EvidenceBucket;
    EXPECT_EQ(evidence_bucket({"s", {1}, true}, r), B::true_positive);
    EXPECT_EQ(evidence_bucket({"s", {}, true}, r), B::no_reference);
    EXPECT_EQ(evidence_bucket({"s", {1, 2}, true}, r), B::true_positive);
    EXPECT_EQ(evidence_bucket({"s", {2}, true}, r), B::false_positive);
    EXPECT_EQ(evidence_bucket({"s", {3}, true}, r), B::self_generated);
    EXPECT_EQ(evidence_bucket({"s", {2, 3}, true}, r), B::false_positive);
    EXPECT_EQ(evidence_bucket({"s", {4}, true}, r), B::unresolved);
    EXPECT_EQ(evidence_bucket({"s", {1, 4}, true}, r), B::true_positive);
    EXPECT_EQ(evidence_bucket({"s", {2, 4}, true}, r), B::unresolved);
    EXPECT_EQ(evidence_bucket({"s", {9}, true}, r), B::no_reference);
}

TEST(EvidenceBucket, PrecedenceIsConfigurableAndReported)
{
    const auto r = evidence_fixture();
    BucketPrecedence p;
    p.order = {EvidenceBucket::self_generated, EvidenceBucket::false_positive, EvidenceBucket::true_positive};
    EXPECT_EQ(evidence_bucket({"s", {1, 3}, true}, r, p), EvidenceBucket::self_generated);
    EXPECT_EQ(evidence_bucket({"s", {1, 2}, true}, r, p), EvidenceBucket::false_positive);
    const std::vector<EvidenceResponse> rs{r};
    const auto reports = factuality_by_evidence(rs, p);
    for (const auto& m : reports) {
        EXPECT_EQ(m.stratum.at("precedence"), "self_generated>false_positive>true_positive");
    }
    BucketPrecedence bad;
    bad.order = {EvidenceBucket::true_positive, EvidenceBucket::true_positive, EvidenceBucket::self_generated};
    EXPECT_THROW(factuality_by_evidence(rs, bad), InvalidArgument);
}

TEST(EvidenceBucketProperty, BucketsPartitionStatements)
{
    Gen g(13);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<EvidenceResponse> rs;
        std::size_t statements = 0, true_statements = 0;
        for (std::size_t i = 0, n = g.uniform(1, 5); i < n; ++i) {
            EvidenceResponse r = evidence_fixture();
            for (std::size_t s = 0, ns = g.uniform(0, 6); s < ns; ++s) {
                EvidenceStatement st{"s" + std::to_string(s), {}, g.coin(0.7)};
                std::set<int> c;
                for (std::size_t k = 0, nc = g.uniform(0, 3); k < nc; ++k) c.insert(static_cast<int>(g.uniform(1, 5)));
                st.citations.assign(c.begin(), c.end());
                r.statements.push_back(st);
                ++statements;
                true_statements += st.verdict;
            }
            rs.push_back(std::move(r));
        }
        const auto reports = factuality_by_evidence(rs);
        EXPECT_EQ(reports.size(), 5u);
        std::size_t n = 0;
        double trues = 0.0;
        for (const auto& m : reports) {
            n += m.n;
            if (m.value) trues += *m.value * static_cast<double>(m.n);
        }
        EXPECT_EQ(n, statements);
        EXPECT_NEAR(trues, static_cast<double>(true_statements), 1e-9);
    }
}

// ---- completeness ---------------------------------------------------------

ResponseCompleteness grades(std::vector<SupportLevel> levels)
{
    ResponseCompleteness r;
    r.query_id = "q";
    r.model_id = "m";
    for (std::size_t i = 0; i < levels.size(); ++i) {
        r.must_have_ids.push_back("m" + std::to_string(i));
        r.levels["m" + std::to_string(i)] = levels[i];
    }
    return r;
}

TEST(Completeness, Examples)
{
    const std::vector<ResponseCompleteness> full{grades({L::full, L::full})};
    EXPECT_DOUBLE_EQ(*completeness_scores(full).response_level.value, 1.0);
    EXPECT_DOUBLE_EQ(*completeness_scores(full).statement_level.value, 1.0);

    const std::vector<ResponseCompleteness> mixed{grades({L::full, L::none, L::partial})};
    const auto covered = completeness_scores(mixed);
    EXPECT_DOUBLE_EQ(*covered.statement_level.value, 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(*covered.response_level.value, 0.0);
    const auto weighted = completeness_scores(mixed, 0.5);
    EXPECT_DOUBLE_EQ(*weighted.statement_level.value, 0.5);
    EXPECT_EQ(weighted.statement_level.stratum.count("partial_weight"), 1u);
    EXPECT_EQ(covered.statement_level.stratum.count("partial_weight"), 0u);

    EXPECT_THROW(completeness_scores(mixed, 1.5), InvalidArgument);
    auto missing = grades({L::full});
    missing.must_have_ids.push_back("m_missing");
    const std::vector<ResponseCompleteness> bad{missing};
    EXPECT_THROW(completeness_scores(bad), InvalidArgument);
}

TEST(CompletenessBySupport, Buckets)
{
    SupportResponse r;
    r.completeness = grades({L::full, L::partial, L::none});
    r.supporting_passages = {{"m0", {"p2"}}, {"m1", {"p2"}}, {"m2", {}}};
    r.cited_passages = {"p2"};
    EXPECT_EQ(support_bucket(r, "m0"), SupportBucket::supported_referenced);
    EXPECT_EQ(support_bucket(r, "m2"), SupportBucket::unsupported);
    r.cited_passages = {"p9"};
    EXPECT_EQ(support_bucket(r, "m0"), SupportBucket::supported_missed);

    const std::vector<SupportResponse> rs{r};
    const auto reports = completeness_by_support(rs);
    ASSERT_EQ(reports.size(), 3u);
    std::size_t n = 0;
    for (const auto& m : reports) {
        n += m.n;
        if (m.stratum.at("support") == "supported_missed") {
            EXPECT_DOUBLE_EQ(*m.value, 1.0);
        }
        if (m.stratum.at("support") == "unsupported") {
            EXPECT_DOUBLE_EQ(*m.value, 0.0);
        }
        if (m.stratum.at("support") == "supported_referenced") {
            EXPECT_FALSE(m.defined());
        }
    }
    EXPECT_EQ(n, 3u);
}

// ---- classifier -----------------------------------------------------------

TEST(Classifier, Examples)
{
    const std::vector<bool> gold{true, false, true, false, false};
    const auto perfect = classifier_prf(gold, gold);
    EXPECT_DOUBLE_EQ(*perfect.precision.value, 1.0);
    EXPECT_DOUBLE_EQ(*perfect.recall.value, 1.0);
    EXPECT_DOUBLE_EQ(*perfect.f1.value, 1.0);

    std::vector<bool> g20(50, false);
    for (std::size_t i = 0; i < 10; ++i) g20[i * 5] = true;
    const auto all_pos = classifier_prf(std::vector<bool>(50, true), g20);
    EXPECT_DOUBLE_EQ(*all_pos.precision.value, 0.2);
    EXPECT_DOUBLE_EQ(*all_pos.recall.value, 1.0);
    EXPECT_DOUBLE_EQ(*all_pos.f1.value, 1.0 / 3.0);

    const auto counts = classifier_prf(ConfusionCounts{2, 1, 2, 0});
    EXPECT_DOUBLE_EQ(*counts.precision.value, 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(*counts.recall.value, 0.5);
    EXPECT_DOUBLE_EQ(*counts.f1.value, 4.0 / 7.0);

    const auto no_pos = classifier_prf(std::vector<bool>{true, false}, std::vector<bool>{false, false});
    EXPECT_FALSE(no_pos.recall.defined());
    EXPECT_FALSE(no_pos.f1.defined());
    EXPECT_THROW(classifier_prf(std::vector<bool>{true}, std::vector<bool>{true, false}), InvalidArgument);
}

TEST(Classifier, KeyedPairs)
{
    using P = std::pair<PairKey, bool>;
    const std::vector<P> gold{{{"q1", "a"}, true}, {{"q1", "b"}, false}, {{"q2", "a"}, true}};
    const std::vector<P> pred{{{"q2", "a"}, false}, {{"q1", "b"}, true}, {{"q1", "a"}, true}};
    const auto out = classifier_prf(pred, gold);
    EXPECT_EQ(out.counts.tp, 1u);
    EXPECT_EQ(out.counts.fp, 1u);
    EXPECT_EQ(out.counts.fn, 1u);
    const std::vector<P> short_pred{{{"q1", "a"}, true}};
    EXPECT_THROW(classifier_prf(short_pred, gold), InvalidArgument);
    const std::vector<P> dup{{{"q1", "a"}, true}, {{"q1", "a"}, true}, {{"q2", "a"}, true}};
    EXPECT_THROW(classifier_prf(dup, gold), InvalidArgument);
}

TEST(ClassifierProperty, MatchesClosedForm)
{
    Gen g(3);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = g.uniform(1, 60);
        std::vector<bool> pred(n), gold(n);
        std::size_t tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < n; ++i) {
            pred[i] = g.coin();
            gold[i] = g.coin(0.3);
            tp += pred[i] && gold[i];
            fp += pred[i] && !gold[i];
            fn += !pred[i] && gold[i];
        }
        const auto want = oracle::prf(tp, fp, fn);
        const auto got = classifier_prf(pred, gold);
        EXPECT_EQ(got.precision.value.has_value(), want.precision.has_value());
        EXPECT_EQ(got.recall.value.has_value(), want.recall.has_value());
        if (want.precision) {
            EXPECT_NEAR(*got.precision.value, *want.precision, 1e-12);
        }
        if (want.recall) {
            EXPECT_NEAR(*got.recall.value, *want.recall, 1e-12);
        }
        if (want.f1 && got.f1.value) {
            EXPECT_NEAR(*got.f1.value, *want.f1, 1e-12);
        }
    }
}

// ---- agreement ------------------------------------------------------------

ReliabilityData two_columns(const std::vector<int>& a, const std::vector<int>& b)
{
    ReliabilityData u;
    for (std::size_t i = 0; i < a.size(); ++i) u.push_back({a[i], b[i]});
    return u;
}

TEST(Agreement, PerfectAgreement)
{
    const auto u = two_columns({0, 1, 1, 0, 1, 0, 0, 1, 1, 0}, {0, 1, 1, 0, 1, 0, 0, 1, 1, 0});
    const auto a = krippendorff_alpha(u);
    ASSERT_TRUE(a.alpha);
    EXPECT_DOUBLE_EQ(*a.alpha, 1.0);
    EXPECT_EQ(a.items_used, 10u);
}

TEST(Agreement, TotalDisagreementIsNegative)
{
    const auto u = two_columns({0, 1, 0, 1, 0, 1}, {1, 0, 1, 0, 1, 0});
    const auto a = krippendorff_alpha(u);
    const auto want = oracle::krippendorff_alpha(u);
    ASSERT_TRUE(a.alpha && want.alpha);
    EXPECT_LT(*a.alpha, 0.0);
    EXPECT_NEAR(*a.alpha, *want.alpha, 1e-12);
    // Coincidence matrix: 6 off-diagonal pairs each way, none on the diagonal.
    std::vector<int> cats;
    const auto m = coincidence_matrix(u, &cats);
    EXPECT_EQ(cats, (std::vector<int>{0, 1}));
    EXPECT_DOUBLE_EQ(m(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(m(0, 1), 6.0);
    EXPECT_DOUBLE_EQ(m(1, 0), 6.0);
}

TEST(Agreement, MergedSupportFixtureMatchesIndependentComputation)
{
    Gen g(77);
    ReliabilityData u;
    for (int i = 0; i < 20; ++i) {
        // Levels 0 full, 1 partial, 2 none merged to supported(1)/none(0).
        const int a = static_cast<int>(g.uniform(0, 2));
        const int b = g.coin(0.7) ? a : static_cast<int>(g.uniform(0, 2));
        std::vector<std::optional<int>> row{a == 2 ? 0 : 1, b == 2 ? 0 : 1};
        if (i % 7 == 3) row.push_back(g.coin() ? 1 : 0);
        else row.push_back(std::nullopt);
        u.push_back(row);
    }
    const auto got = krippendorff_alpha(u);
    const auto want = oracle::krippendorff_alpha(u);
    ASSERT_TRUE(got.alpha && want.alpha);
    EXPECT_NEAR(*got.alpha, *want.alpha, 1e-9);
    EXPECT_EQ(got.pairable_values, want.pairable);
}

TEST(Agreement, ZeroExpectedDisagreementIsFlagged)
{
    const auto a = krippendorff_alpha(two_columns({1, 1, 1}, {1, 1, 1}));
    EXPECT_TRUE(a.zero_expected_disagreement);
    ASSERT_TRUE(a.alpha);
    EXPECT_DOUBLE_EQ(*a.alpha, 1.0);
    const auto none = krippendorff_alpha(ReliabilityData{{1, std::nullopt}, {std::nullopt, 2}});
    EXPECT_FALSE(none.alpha);
    EXPECT_EQ(none.items_used, 0u);
}

TEST(AgreementProperty, OracleRelabelingAndColumnPermutation)
{
    Gen g(101);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t items = g.uniform(2, 40), raters = g.uniform(2, 5), cats = g.uniform(2, 4);
        ReliabilityData u;
        for (std::size_t i = 0; i < items; ++i) {
            std::vector<std::optional<int>> row(raters);
            const int base = static_cast<int>(g.uniform(0, cats - 1));
            for (auto& v : row) {
                if (g.coin(0.2)) continue;
                v = g.coin(0.6) ? base : static_cast<int>(g.uniform(0, cats - 1));
            }
            u.push_back(row);
        }
        const auto got = krippendorff_alpha(u);
        const auto want = oracle::krippendorff_alpha(u);
        EXPECT_EQ(got.pairable_values, want.pairable);
        if (want.alpha) {
            ASSERT_TRUE(got.alpha);
            EXPECT_NEAR(*got.alpha, *want.alpha, 1e-9);
        } else if (want.zero_expected) {
            EXPECT_TRUE(got.zero_expected_disagreement);
        } else {
            EXPECT_FALSE(got.alpha);
        }
        if (!got.alpha) continue;

        std::vector<int> perm(cats);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), g.rng());
        ReliabilityData relabeled = u;
        for (auto& row : relabeled)
            for (auto& v : row)
                if (v) v = perm[static_cast<std::size_t>(*v)] * 10 + 3;
        EXPECT_NEAR(*krippendorff_alpha(relabeled).alpha, *got.alpha, 1e-9);

        std::vector<std::size_t> cols(raters);
        std::iota(cols.begin(), cols.end(), 0);
        std::shuffle(cols.begin(), cols.end(), g.rng());
        ReliabilityData permuted;
        for (const auto& row : u) {
            std::vector<std::optional<int>> r(raters);
            for (std::size_t c = 0; c < raters; ++c) r[c] = row[cols[c]];
            permuted.push_back(r);
        }
        EXPECT_NEAR(*krippendorff_alpha(permuted).alpha, *got.alpha, 1e-9);
    }
}

TEST(Agreement, BootstrapIntervalIsDeterministicAndContainsAlpha)
{
    Gen g(8);
    ReliabilityData u;
    for (int i = 0; i < 60; ++i) {
        const int a = g.coin() ? 1 : 0;
        u.push_back({a, g.coin(0.8) ? a : 1 - a});
    }
    const auto a = krippendorff_alpha(u, 2000, 42);
    const auto b = krippendorff_alpha(u, 2000, 42);
    ASSERT_TRUE(a.ci && a.alpha);
    EXPECT_EQ(a.ci->low, b.ci->low);
    EXPECT_EQ(a.ci->high, b.ci->high);
    EXPECT_LE(a.ci->low, *a.alpha);
    EXPECT_GE(a.ci->high, *a.alpha);
}

// ---- resampling -----------------------------------------------------------

TEST(Bootstrap, ConstantSample)
{
    const std::vector<double> c(25, 0.37);
    const auto ci = bootstrap_mean_ci(c, 1000, 1);
    EXPECT_DOUBLE_EQ(ci.low, 0.37);
    EXPECT_DOUBLE_EQ(ci.high, 0.37);
}

TEST(Bootstrap, CoinSampleIntervalContainsMean)
{
    Gen g(2);
    std::vector<double> s(100);
    for (auto& x : s) x = g.coin() ? 1.0 : 0.0;
    const double mean = std::accumulate(s.begin(), s.end(), 0.0) / 100.0;
    const auto ci = bootstrap_mean_ci(s, 10000, 7);
    EXPECT_LE(ci.low, mean);
    EXPECT_GE(ci.high, mean);
    EXPECT_GT(ci.high - ci.low, 0.05);
    EXPECT_LT(ci.high - ci.low, 0.4);
}

TEST(Bootstrap, FixedSeedIsReproducible)
{
    std::vector<double> s{0.1, 0.5, 0.2, 0.9, 0.3};
    const auto a = bootstrap_mean_ci(s, 500, 99);
    const auto b = bootstrap_mean_ci(s, 500, 99);
    EXPECT_EQ(a.low, b.low);
    EXPECT_EQ(a.high, b.high);
    EXPECT_THROW(bootstrap_ci(0, [](std::span<const std::size_t>) { return std::optional<double>(0.0); }, 10, 1),
                 InvalidArgument);
}

TEST(Bootstrap, ReplicateStreamsAreIndependentOfScheduling)
{
    ReplicateStream a(5, 17), b(5, 17), c(5, 18);
    std::vector<std::uint64_t> xa, xb, xc;
    for (int i = 0; i < 8; ++i) {
        xa.push_back(a.next());
        xc.push_back(c.next());
    }
    for (int i = 0; i < 8; ++i) xb.push_back(b.next());
    EXPECT_EQ(xa, xb);
    EXPECT_NE(xa, xc);
    ReplicateStream d(5, 3);
    for (int i = 0; i < 1000; ++i) EXPECT_LT(d.index(7), 7u);
}

TEST(Bootstrap, PercentileInterpolation)
{
    const std::vector<double> s{1.0, 2.0, 3.0, 4.0};
    EXPECT_DOUBLE_EQ(percentile_sorted(s, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(percentile_sorted(s, 1.0), 4.0);
    EXPECT_DOUBLE_EQ(percentile_sorted(s, 0.5), 2.5);
}

TEST(McNemar, Examples)
{
    EXPECT_DOUBLE_EQ(mcnemar_exact(4, 4).p_value, 1.0);
    EXPECT_DOUBLE_EQ(mcnemar_exact(5, 0).p_value, 0.0625);
    EXPECT_DOUBLE_EQ(mcnemar_exact(0, 0).p_value, 1.0);
    const auto r = mcnemar_exact(std::vector<bool>{true, true, false, true}, std::vector<bool>{false, true, true, false});
    EXPECT_EQ(r.b, 2u);
    EXPECT_EQ(r.c, 1u);
    EXPECT_THROW(mcnemar_exact(std::vector<bool>{true}, std::vector<bool>{}), InvalidArgument);
}

TEST(McNemarProperty, MatchesExactOracle)
{
    for (std::size_t b = 0; b <= 30; ++b) {
        for (std::size_t c = 0; c <= 30; ++c) {
            EXPECT_NEAR(mcnemar_exact(b, c).p_value, oracle::mcnemar_p(b, c), 1e-12) << b << "," << c;
        }
    }
    // Large discordant counts stay finite and symmetric.
    EXPECT_NEAR(mcnemar_exact(400, 520).p_value, mcnemar_exact(520, 400).p_value, 1e-15);
    EXPECT_GT(mcnemar_exact(400, 520).p_value, 0.0);
}

// ---- labels and evaluate --------------------------------------------------

EvalOptions no_bootstrap(std::vector<std::size_t> ks = {1, 2, 4, 8, 16, 32})
{
    EvalOptions o;
    o.ks = std::move(ks);
    o.bootstrap_replicates = 0;
    return o;
}

LabelSet labels_from(const std::vector<Json>& records)
{
    LabelSet set;
    for (const auto& r : records) add_label_record(r, set);
    return set;
}

bool stratum_matches(const Stratum& have, const Stratum& want)
{
    for (const auto& [k, v] : want) {
        auto it = have.find(k);
        if (it == have.end() || it->second != v) return false;
    }
    return true;
}

const MetricReport& find_report(const EvalResult& r, const std::string& metric, const Stratum& want)
{
    const MetricReport* found = nullptr;
    for (const auto& m : r.reports) {
        if (m.metric == metric && stratum_matches(m.stratum, want)) {
            if (found) throw std::logic_error("ambiguous report " + metric);
            found = &m;
        }
    }
    if (!found) throw std::logic_error("no report " + metric);
    return *found;
}

void expect_value(const MetricReport& m, std::optional<double> want, const std::string& what)
{
    EXPECT_EQ(m.value.has_value(), want.has_value()) << what;
    if (m.value && want) {
        EXPECT_NEAR(*m.value, *want, 1e-12) << what;
    }
}

TEST(EvaluateFixture, EveryMetricMatchesBruteForce)
{
    for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u, 6u, 7u, 8u}) {
        SCOPED_TRACE("seed " + std::to_string(seed));
        const auto fx = fixture::make_metric_fixture(seed);
        EvalOptions o;
        o.bootstrap_replicates = 0;
        const auto result = evaluate_labels(labels_from(fx.records()), o);

        for (std::size_t k : {1u, 2u, 4u, 8u}) {
            for (std::string type : {"all", "patient", "usmle"}) {
                const Stratum s{{"k", std::to_string(k)}, {"query_type", type}};
                const auto ks = std::to_string(k);
                expect_value(find_report(result, "precision@" + ks, s), fixture::precision_at(fx, k, type), "p" + ks);
                expect_value(find_report(result, "miss@" + ks, s), fixture::miss_at(fx, k, type), "m" + ks);
                expect_value(find_report(result, "coverage@" + ks, s), fixture::coverage_at(fx, k, type), "c" + ks);
                double macro = 0.0;
                std::size_t nq = 0;
                for (const auto& q : fx.queries) {
                    if (type != "all" && q.query_type != type) continue;
                    std::size_t hit = 0;
                    for (const auto& st : q.must_have) hit += fixture::covered(q, st, k);
                    macro += static_cast<double>(hit) / static_cast<double>(q.must_have.size());
                    ++nq;
                }
                expect_value(find_report(result, "coverage_macro@" + ks, s), macro / double(nq), "cm" + ks);
            }
        }
        EXPECT_NE(std::find_if(result.missing.begin(), result.missing.end(),
                               [](const std::string& m) { return m.find("k=16") != std::string::npos; }),
                  result.missing.end());

        for (std::string model : {"all", "model_a", "model_b"}) {
            const Stratum s{{"model", model}};
            const auto sel = fixture::selection(fx, model);
            expect_value(find_report(result, "selection_precision", s), sel.precision, "sel p " + model);
            expect_value(find_report(result, "selection_recall", s), sel.recall, "sel r " + model);
            const auto per = fixture::selection_per_reference(fx, model);
            expect_value(find_report(result, "selection_precision_per_reference", s), per.precision, "per p");
            expect_value(find_report(result, "selection_recall_per_reference", s), per.recall, "per r");

            const auto f = fixture::factuality(fx, model);
            expect_value(find_report(result, "factuality_response", s), f.response, "fact r");
            expect_value(find_report(result, "factuality_statement", s), f.statement, "fact s");

            const auto tally = fixture::evidence_tally(fx, model);
            for (std::string bucket : {"true_positive", "false_positive", "self_generated", "no_reference", "unresolved"}) {
                const auto& m = find_report(result, "factuality_by_evidence", {{"model", model}, {"evidence", bucket}});
                auto it = tally.find(bucket);
                std::optional<double> want;
                if (it != tally.end() && it->second.second) want = double(it->second.first) / double(it->second.second);
                expect_value(m, want, "evidence " + bucket + " " + model);
                EXPECT_EQ(m.n, it == tally.end() ? 0u : it->second.second) << bucket;
            }

            const auto c = fixture::completeness(fx, model);
            expect_value(find_report(result, "completeness_response", s), c.response, "comp r");
            expect_value(find_report(result, "completeness_statement", s), c.statement, "comp s");

            const auto support = fixture::support_tally(fx, model);
            for (std::string bucket : {"supported_referenced", "supported_missed", "unsupported"}) {
                const auto& m = find_report(result, "completeness_by_support", {{"model", model}, {"support", bucket}});
                auto it = support.find(bucket);
                std::optional<double> want;
                if (it != support.end() && it->second.second) want = it->second.first / double(it->second.second);
                expect_value(m, want, "support " + bucket + " " + model);
            }
        }
    }
}

TEST(EvaluateFixture, PartialWeightIsApplied)
{
    const auto fx = fixture::make_metric_fixture(11);
    EvalOptions o;
    o.bootstrap_replicates = 0;
    o.partial_weight = 0.5;
    const auto result = evaluate_labels(labels_from(fx.records()), o);
    for (std::string model : {"all", "model_a", "model_b"}) {
        const auto c = fixture::completeness(fx, model, 0.5);
        expect_value(find_report(result, "completeness_statement", {{"model", model}}), c.statement, model);
        expect_value(find_report(result, "completeness_response", {{"model", model}}), c.response, model);
        for (const auto& [bucket, t] : fixture::support_tally(fx, model, 0.5)) {
            expect_value(find_report(result, "completeness_by_support", {{"model", model}, {"support", bucket}}),
                         t.first / double(t.second), bucket);
        }
    }
}

TEST(EvaluateFixture, AgreementFromSecondAnnotator)
{
    const auto fx = fixture::make_metric_fixture(21, 5, 8, 3, true);
    const auto records = fx.records();
    // Independent reliability data straight from the raw records.
    std::map<std::string, std::map<std::string, int>> by_item;
    for (const auto& r : records) {
        if (r["type"] != "relevance") continue;
        const std::string key = r["query_id"].get<std::string>() + "|" + r["passage_id"].get<std::string>() + "|" +
                                r["statement_id"].get<std::string>();
        by_item[key][r["annotator_id"].get<std::string>()] = r["level"] == "none" ? 0 : 1;
    }
    ReliabilityData units;
    for (const auto& [key, by] : by_item) {
        if (by.size() == 2) units.push_back({by.at("ann1"), by.at("ann2")});
    }
    ASSERT_EQ(units.size(), 8u * 3u);
    const auto want = oracle::krippendorff_alpha(units);

    EvalOptions o;
    o.bootstrap_replicates = 500;
    const auto result = evaluate_labels(labels_from(records), o);
    const auto& m = find_report(result, "krippendorff_alpha", {{"stage", "relevance"}});
    if (want.alpha) {
        ASSERT_TRUE(m.value);
        EXPECT_NEAR(*m.value, *want.alpha, 1e-9);
    }
    EXPECT_EQ(m.n, 24u);
    // The primary label stays ann1's, so retrieval metrics are unchanged.
    expect_value(find_report(result, "precision@8", {{"query_type", "all"}}), fixture::precision_at(fx, 8), "p8");
}

TEST(EvaluateFixture, PureUnderRecordOrderAndCiBracketsValue)
{
    const auto fx = fixture::make_metric_fixture(31);
    auto records = fx.records();
    EvalOptions o;
    o.bootstrap_replicates = 300;
    const auto a = to_json(evaluate_labels(labels_from(records), o));
    std::mt19937_64 rng(4);
    std::shuffle(records.begin() + 1, records.end(), rng);
    const auto shuffled = evaluate_labels(labels_from(records), o);
    EXPECT_EQ(to_json(shuffled), a);
    for (const auto& m : shuffled.reports) {
        if (!m.value) {
            EXPECT_FALSE(m.undefined_reason.empty()) << m.metric;
            continue;
        }
        if (m.ci_low) {
            EXPECT_LE(*m.ci_low, *m.value) << m.metric;
            EXPECT_GE(*m.ci_high, *m.value) << m.metric;
        }
    }
}

TEST(EvaluateFixture, AdjudicatorOverridesAnnotators)
{
    const auto fx = fixture::make_metric_fixture(41);
    auto records = fx.records();
    // Flip one factuality verdict through an adjudication and a later-sorted annotator.
    Json target;
    for (const auto& r : records) {
        if (r["type"] == "factuality") {
            target = r;
            break;
        }
    }
    Json zed = target;
    zed["annotator_id"] = "zed";
    zed["verdict"] = !target["verdict"].get<bool>();
    records.push_back(zed);
    const auto base = evaluate_labels(labels_from(records), no_bootstrap({1}));
    Json adj = zed;
    adj["annotator_id"] = "lead";
    adj["role"] = "adjudicator";
    records.push_back(adj);
    const auto adjudicated = evaluate_labels(labels_from(records), no_bootstrap({1}));

    const auto& before = find_report(base, "factuality_statement", {{"model", "all"}});
    const auto& after = find_report(adjudicated, "factuality_statement", {{"model", "all"}});
    EXPECT_NEAR(*before.value, fixture::factuality(fx, "all").statement, 1e-12);
    EXPECT_NE(*after.value, *before.value);
    // Adjudications never enter agreement.
    EXPECT_EQ(agreement_units(labels_from(records), Stage::factuality).size(), 1u);
}

TEST(EvaluateFixture, MissingInputsAreReportedNotInvented)
{
    const auto fx = fixture::make_metric_fixture(51);
    std::vector<Json> relevance_only;
    for (const auto& r : fx.records()) {
        if (r["type"] == "relevance" || r["type"] == "header") relevance_only.push_back(r);
    }
    const auto result = evaluate_labels(labels_from(relevance_only), no_bootstrap());
    for (const auto& m : result.reports) {
        EXPECT_TRUE(m.metric.find('@') != std::string::npos) << m.metric;
    }
    auto mentions = [&](const std::string& s) {
        return std::any_of(result.missing.begin(), result.missing.end(),
                           [&](const std::string& m) { return m.find(s) != std::string::npos; });
    };
    EXPECT_TRUE(mentions("selection"));
    EXPECT_TRUE(mentions("factuality"));
    EXPECT_TRUE(mentions("completeness"));
    const auto empty = evaluate_labels(LabelSet{}, no_bootstrap());
    EXPECT_TRUE(empty.reports.empty());
    EXPECT_GE(empty.missing.size(), 4u);
}

TEST(Labels, SchemaViolationsAreCollected)
{
    TempDir dir;
    testing::write_text(dir / "labels.jsonl",
                        "{\"type\":\"header\",\"schema\":\"ragprobe.labels\",\"version\":1,\"stage\":null}\n"
                        "{\"type\":\"factuality\",\"query_id\":\"q\",\"model_id\":\"m\",\"statement_id\":\"s1\","
                        "\"verdict\":true,\"annotator_id\":\"a\"}\n"
                        "{\"type\":\"factuality\",\"query_id\":\"q\",\"model_id\":\"m\",\"statement_id\":\"s2\","
                        "\"annotator_id\":\"a\"}\n"
                        "{\"type\":\"relevance\",\"query_id\":\"q\",\"passage_id\":\"p\",\"rank\":1,"
                        "\"statement_id\":\"m1\",\"level\":\"somewhat\",\"annotator_id\":\"a\"}\n"
                        "not json\n");
    std::vector<SchemaViolation> v;
    const auto set = read_label_file(dir / "labels.jsonl", v);
    EXPECT_EQ(set.factuality.size(), 1u);
    ASSERT_EQ(v.size(), 3u);
    EXPECT_NE(v[0].location.find(":3"), std::string::npos);
    EXPECT_NE(v[0].message.find("verdict"), std::string::npos);
    EXPECT_NE(v[2].location.find(":5"), std::string::npos);

    Json wrong_version = header_record(Stage::relevance);
    wrong_version["version"] = 2;
    LabelSet s;
    EXPECT_THROW(add_label_record(wrong_version, s), SchemaError);
    EXPECT_THROW(read_label_dir(dir / "absent", v), NotFound);
}

TEST(Labels, RecordsRoundTrip)
{
    RelevanceLabel r{"q", "patient", "p", 3, "m1", L::partial, {"ann", AnnotatorRole::adjudicator, "t1"}};
    SelectionLabel s{"q", "m", 2, {"p", "p2"}, {"ann", AnnotatorRole::annotator, ""}};
    FactualityLabel f{"q", "m", "s1", true, {1, 2}, {"ann", AnnotatorRole::annotator, ""}};
    CompletenessLabel c{"q", "m", "m1", L::none, {"ann", AnnotatorRole::annotator, ""}};
    LabelSet set;
    for (const auto& j : {to_json(r), to_json(s), to_json(f), to_json(c)}) add_label_record(j, set);
    EXPECT_EQ(to_json(set.relevance.at(0)), to_json(r));
    EXPECT_EQ(to_json(set.selection.at(0)), to_json(s));
    EXPECT_EQ(to_json(set.factuality.at(0)), to_json(f));
    EXPECT_EQ(to_json(set.completeness.at(0)), to_json(c));
}

TEST(Report, UndefinedIsNeverCoerced)
{
    const auto m = ratio_metric("x", 0.0, 0.0, 0, "empty");
    EXPECT_FALSE(m.defined());
    EXPECT_EQ(m.undefined_reason, "empty");
    const auto j = to_json(m);
    EXPECT_TRUE(j["value"].is_null());
    const auto back = metric_report_from_json(j);
    EXPECT_FALSE(back.defined());
    const auto table = render_table({m, defined_metric("precision@4", 0.25, 10, {{"k", "4"}})});
    EXPECT_NE(table.find("precision@4"), std::string::npos);
    EXPECT_NE(table.find("0.250"), std::string::npos);
    EXPECT_NE(table.find("empty"), std::string::npos);
}

TEST(Report, AttachCiWidensToContainValue)
{
    auto m = defined_metric("x", 0.5, 10);
    attach_ci(m, {0.6, 0.7});
    EXPECT_EQ(*m.ci_low, 0.5);
    EXPECT_EQ(*m.ci_high, 0.7);
}

} // namespace
} // namespace ragprobe::metrics
