#pragma once

#include "bugloc/stats.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace bugloc {

inline const std::vector<std::size_t> kDefaultKValues = {1, 5, 10};

/// AP@K = sum_{i <= min(K, |ranking|)} Prec@i * rel_i / min(|relevant|, K).
/// Throws EmptyRelevant; k must be >= 1.
double average_precision_at_k(std::span<const std::string> ranking,
                              const std::set<std::string>& relevant, std::size_t k);

/// True iff one of the first k entries is relevant.
bool hit_at_k(std::span<const std::string> ranking, const std::set<std::string>& relevant,
              std::size_t k);

struct TaskMetrics {
    std::map<std::size_t, double> ap;
    std::map<std::size_t, bool> hit;

    bool operator==(const TaskMetrics&) const = default;
};

TaskMetrics evaluate_task(std::span<const std::string> ranking, const std::set<std::string>& relevant,
                          std::span<const std::size_t> k_values);

/// task_id -> metrics, for one run.
using RunMetrics = std::map<std::string, TaskMetrics>;

struct AggregateMetrics {
    double map = 0.0;
    double hit_rate = 0.0;
    double map_std = 0.0;  // population std over runs
    double hit_rate_std = 0.0;
};

struct EvalReport {
    std::string config;
    std::vector<std::size_t> k_values;
    std::vector<RunMetrics> per_run;
    std::map<std::size_t, AggregateMetrics> aggregate;

    [[nodiscard]] std::size_t runs() const { return per_run.size(); }
    [[nodiscard]] std::set<std::string> task_ids() const;
    /// Per-task metrics of one run, averaged over runs for AP.
    [[nodiscard]] std::map<std::string, double> mean_ap(std::size_t k) const;
};

/// Mean over tasks within each run, then mean and population standard
/// deviation over runs. Throws MismatchedTaskSets when runs cover different tasks.
EvalReport aggregate(std::vector<RunMetrics> runs, std::vector<std::size_t> k_values,
                     std::string config = {});

nlohmann::json report_to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);

enum class Metric { ap, hit };
enum class TestKind { mann_whitney, mcnemar };

Metric metric_from_string(std::string_view name);
TestKind test_from_string(std::string_view name);
/// AP distributions pair with Mann-Whitney, binary Hit outcomes with McNemar.
TestKind paired_test(Metric metric);

struct Comparison {
    Metric metric = Metric::ap;
    std::size_t k = 1;
    TestKind test = TestKind::mann_whitney;
    double statistic = 0.0;
    double p = 1.0;
    bool exact = false;
    CliffsDelta effect;
    std::optional<McNemarResult> mcnemar;
    std::optional<MannWhitneyResult> mann_whitney;

    [[nodiscard]] bool significant() const { return p < kSignificanceLevel; }
};

/// Compares two reports over the same task set. Hit pairs (run r, task t)
/// of A with the same cell of B; AP compares the pooled per-cell values.
/// Throws MismatchedTaskSets, and ConfigError when `requested` breaks the
/// metric/test pairing.
Comparison compare_reports(const EvalReport& a, const EvalReport& b, Metric metric, std::size_t k,
                           std::optional<TestKind> requested = std::nullopt);

struct ReportRow {
    std::string name;
    const EvalReport* report = nullptr;
    std::map<std::string, std::string> markers;  // column ("MAP@1", "Hit@5") -> superscript
};

/// Rows are configurations; columns MAP@K then Hit@K.
std::string render_markdown(std::span<const ReportRow> rows);
std::string render_csv(std::span<const ReportRow> rows);

}  // namespace bugloc
