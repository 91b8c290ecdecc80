#include "bugloc/errors.hpp"
#include "bugloc/evaluation.hpp"

#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace bugloc;
using Ranking = std::vector<std::string>;
using Relevant = std::set<std::string>;

namespace {

RunMetrics run_with_ap1(std::initializer_list<std::pair<const char*, double>> values) {
    RunMetrics run;
    for (const auto& [task, ap] : values) {
        TaskMetrics m;
        m.ap[1] = ap;
        m.hit[1] = ap > 0;
        run[task] = m;
    }
    return run;
}

}  // namespace

TEST(AveragePrecision, Basics) {
    EXPECT_DOUBLE_EQ(average_precision_at_k(Ranking{"r"}, {"r"}, 1), 1.0);
    EXPECT_DOUBLE_EQ(average_precision_at_k(Ranking{"x", "x2", "r"}, {"r"}, 1), 0.0);
    EXPECT_DOUBLE_EQ(average_precision_at_k(Ranking{}, {"r"}, 5), 0.0);
}

TEST(AveragePrecision, TwoRelevantFiles) {
    const Ranking ranking = {"a", "x", "b"};
    const Relevant relevant = {"a", "b"};
    EXPECT_DOUBLE_EQ(oracle::average_precision(ranking, relevant, 5), (1.0 + 2.0 / 3.0) / 2.0);
    EXPECT_NEAR(average_precision_at_k(ranking, relevant, 5), 0.8333333333333334, 1e-12);
}

TEST(AveragePrecision, Errors) {
    EXPECT_THROW(average_precision_at_k(Ranking{"a"}, {}, 1), EmptyRelevant);
    EXPECT_THROW(average_precision_at_k(Ranking{"a"}, {"a"}, 0), std::invalid_argument);
}

TEST(AveragePrecision, BoundedAndMatchesOracle) {
    std::mt19937 rng(99);
    for (int trial = 0; trial < 300; ++trial) {
        Ranking ranking;
        for (std::size_t i = 0, n = rng() % 12; i < n; ++i) ranking.push_back("f" + std::to_string(rng() % 15));
        std::sort(ranking.begin(), ranking.end());
        ranking.erase(std::unique(ranking.begin(), ranking.end()), ranking.end());
        std::shuffle(ranking.begin(), ranking.end(), rng);
        Relevant relevant;
        for (std::size_t i = 0, n = 1 + rng() % 4; i < n; ++i) relevant.insert("f" + std::to_string(rng() % 15));
        for (std::size_t k : {1u, 5u, 10u}) {
            const double ap = average_precision_at_k(ranking, relevant, k);
            EXPECT_GE(ap, 0.0);
            EXPECT_LE(ap, 1.0);
            EXPECT_NEAR(ap, oracle::average_precision(ranking, relevant, k), 1e-12);
            EXPECT_EQ(hit_at_k(ranking, relevant, k), oracle::hit(ranking, relevant, k));
        }
    }
}

TEST(HitAtK, Basics) {
    EXPECT_TRUE(hit_at_k(Ranking{"r", "x"}, {"r"}, 1));
    EXPECT_FALSE(hit_at_k(Ranking{"a", "b", "c", "d", "e", "r"}, {"r"}, 5));
    EXPECT_FALSE(hit_at_k(Ranking{}, {"r"}, 10));
}

TEST(Aggregate, MeanOverTasks) {
    const auto report = aggregate({run_with_ap1({{"t1", 1.0}, {"t2", 0.0}})}, {1});
    EXPECT_DOUBLE_EQ(report.aggregate.at(1).map, 0.5);
    EXPECT_DOUBLE_EQ(report.aggregate.at(1).hit_rate, 0.5);
}

TEST(Aggregate, IdenticalRunsHaveZeroStd) {
    const auto run = run_with_ap1({{"t1", 1.0}, {"t2", 0.25}});
    const auto report = aggregate({run, run, run}, {1});
    EXPECT_EQ(report.aggregate.at(1).map_std, 0.0);
    EXPECT_EQ(report.aggregate.at(1).hit_rate_std, 0.0);
    EXPECT_EQ(report.runs(), 3u);
}

TEST(Aggregate, IdenticalInexactRunsHaveZeroStd) {
    const auto run = run_with_ap1({{"t1", 0.8}, {"t2", 0.7}, {"t3", 0.1}});
    const auto report = aggregate({run, run, run}, {1});
    EXPECT_EQ(report.aggregate.at(1).map_std, 0.0);
}

TEST(Aggregate, MeanOverRuns) {
    const auto report =
        aggregate({run_with_ap1({{"t", 0.50}}), run_with_ap1({{"t", 0.51}}), run_with_ap1({{"t", 0.52}})}, {1});
    EXPECT_NEAR(report.aggregate.at(1).map, 0.51, 1e-12);
    EXPECT_NEAR(report.aggregate.at(1).map_std, std::sqrt(2.0 / 3.0) * 0.01, 1e-12);
}

TEST(Aggregate, TaskSetsMustMatch) {
    EXPECT_THROW(aggregate({run_with_ap1({{"t1", 1.0}}), run_with_ap1({{"t2", 1.0}})}, {1}), MismatchedTaskSets);
}

TEST(Report, JsonRoundTrip) {
    const auto report = aggregate({run_with_ap1({{"t1", 1.0}, {"t2", 0.0}}), run_with_ap1({{"t1", 0.5}, {"t2", 0.0}})},
                                  {1}, "baseline");
    const auto j = report_to_json(report);
    EXPECT_EQ(j["config"], "baseline");
    EXPECT_TRUE(j.contains("std_dev"));
    const auto back = report_from_json(j);
    EXPECT_EQ(back.per_run, report.per_run);
    EXPECT_EQ(back.k_values, report.k_values);
    EXPECT_DOUBLE_EQ(back.aggregate.at(1).map, report.aggregate.at(1).map);
    EXPECT_THROW(report_from_json(nlohmann::json::object()), FormatError);
}

TEST(Compare, ReportAgainstItself) {
    const auto report = aggregate({run_with_ap1({{"t1", 1.0}, {"t2", 0.0}, {"t3", 0.5}})}, {1});
    const auto ap = compare_reports(report, report, Metric::ap, 1);
    EXPECT_EQ(ap.test, TestKind::mann_whitney);
    EXPECT_DOUBLE_EQ(ap.p, 1.0);
    EXPECT_DOUBLE_EQ(ap.effect.delta, 0.0);
    const auto hit = compare_reports(report, report, Metric::hit, 1);
    EXPECT_EQ(hit.test, TestKind::mcnemar);
    EXPECT_DOUBLE_EQ(hit.p, 1.0);
}

TEST(Compare, KnownDiscordantCounts) {
    RunMetrics a, b;
    for (int i = 0; i < 14; ++i) {
        const auto id = "t" + std::to_string(i);
        TaskMetrics ma, mb;
        ma.ap[1] = i < 12 ? 1.0 : 0.0;
        mb.ap[1] = i < 2 ? 1.0 : 0.0;
        ma.hit[1] = ma.ap[1] > 0;
        mb.hit[1] = mb.ap[1] > 0;
        a[id] = ma;
        b[id] = mb;
    }
    const auto cmp = compare_reports(aggregate({a}, {1}), aggregate({b}, {1}), Metric::hit, 1);
    ASSERT_TRUE(cmp.mcnemar.has_value());
    EXPECT_EQ(cmp.mcnemar->b, 10u);
    EXPECT_EQ(cmp.mcnemar->c, 0u);
    EXPECT_EQ(cmp.p, 0.001953125);
    EXPECT_TRUE(cmp.significant());
}

TEST(Compare, PairingRuleAndTaskSets) {
    const auto report = aggregate({run_with_ap1({{"t1", 1.0}})}, {1});
    EXPECT_THROW(compare_reports(report, report, Metric::ap, 1, TestKind::mcnemar), ConfigError);
    EXPECT_THROW(compare_reports(report, report, Metric::hit, 1, TestKind::mann_whitney), ConfigError);
    const auto other = aggregate({run_with_ap1({{"t2", 1.0}})}, {1});
    EXPECT_THROW(compare_reports(report, other, Metric::ap, 1), MismatchedTaskSets);
    EXPECT_EQ(metric_from_string("hit"), Metric::hit);
    EXPECT_THROW(metric_from_string("ndcg"), ConfigError);
}

TEST(Render, MarkdownAndCsv) {
    const auto base = aggregate({run_with_ap1({{"t1", 1.0}, {"t2", 0.0}})}, {1}, "baseline");
    const auto best = aggregate({run_with_ap1({{"t1", 1.0}, {"t2", 1.0}})}, {1}, "group:G5");
    const std::vector<ReportRow> rows = {{"baseline", &base, {}}, {"G5", &best, {{"MAP@1", "†"}}}};
    const auto md = render_markdown(rows);
    EXPECT_NE(md.find("| Configuration | MAP@1 | Hit@1 |"), std::string::npos);
    EXPECT_NE(md.find("| baseline | 0.500 | 0.500 |"), std::string::npos);
    EXPECT_NE(md.find("| G5 | 1.000<sup>†</sup> | 1.000 |"), std::string::npos);
    const auto csv = render_csv(rows);
    EXPECT_TRUE(csv.starts_with("configuration,"));
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}
