#include "bugloc/evaluation.hpp"

#include "bugloc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace bugloc {

namespace {

double mean(std::span<const double> xs) {
    if (!xs.empty() && std::ranges::all_of(xs, [&](double x) { return x == xs.front(); }))
        return xs.front();
    double s = 0.0;
    for (double x : xs) s += x;
    return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

double population_std(std::span<const double> xs) {
    if (xs.size() < 2 || std::ranges::all_of(xs, [&](double x) { return x == xs.front(); }))
        return 0.0;
    const double m = mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(xs.size()));
}

std::string fmt3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

std::vector<std::string> columns(const std::vector<std::size_t>& ks) {
    std::vector<std::string> cols;
    for (auto k : ks) cols.push_back("MAP@" + std::to_string(k));
    for (auto k : ks) cols.push_back("Hit@" + std::to_string(k));
    return cols;
}

}  // namespace

double average_precision_at_k(std::span<const std::string> ranking,
                              const std::set<std::string>& relevant, std::size_t k) {
    if (relevant.empty()) throw EmptyRelevant();
    if (k == 0) throw std::invalid_argument("average_precision_at_k: k must be >= 1");
    const std::size_t depth = std::min(k, ranking.size());
    std::size_t hits = 0;
    double sum = 0.0;
    for (std::size_t i = 0; i < depth; ++i) {
        if (!relevant.contains(ranking[i])) continue;
        ++hits;
        sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
    return sum / static_cast<double>(std::min(relevant.size(), k));
}

bool hit_at_k(std::span<const std::string> ranking, const std::set<std::string>& relevant,
              std::size_t k) {
    const std::size_t depth = std::min(k, ranking.size());
    for (std::size_t i = 0; i < depth; ++i)
        if (relevant.contains(ranking[i])) return true;
    return false;
}

TaskMetrics evaluate_task(std::span<const std::string> ranking, const std::set<std::string>& relevant,
                          std::span<const std::size_t> k_values) {
    TaskMetrics m;
    for (auto k : k_values) {
        m.ap[k] = average_precision_at_k(ranking, relevant, k);
        m.hit[k] = hit_at_k(ranking, relevant, k);
    }
    return m;
}

std::set<std::string> EvalReport::task_ids() const {
    std::set<std::string> ids;
    if (!per_run.empty())
        for (const auto& [id, _] : per_run.front()) ids.insert(id);
    return ids;
}

std::map<std::string, double> EvalReport::mean_ap(std::size_t k) const {
    std::map<std::string, double> out;
    for (const auto& run : per_run)
        for (const auto& [id, m] : run) out[id] += m.ap.at(k) / static_cast<double>(per_run.size());
    return out;
}

EvalReport aggregate(std::vector<RunMetrics> runs, std::vector<std::size_t> k_values, std::string config) {
    if (runs.empty()) throw std::invalid_argument("aggregate: no runs");
    if (k_values.empty()) throw std::invalid_argument("aggregate: no k values");
    const auto same_tasks = [&](const RunMetrics& r) {
        return r.size() == runs.front().size() &&
               std::equal(r.begin(), r.end(), runs.front().begin(),
                          [](const auto& x, const auto& y) { return x.first == y.first; });
    };
    for (const auto& run : runs)
        if (!same_tasks(run)) throw MismatchedTaskSets("runs cover different task sets");

    EvalReport report;
    report.config = std::move(config);
    report.k_values = std::move(k_values);
    report.per_run = std::move(runs);
    for (const auto k : report.k_values) {
        std::vector<double> maps;
        std::vector<double> hits;
        for (const auto& run : report.per_run) {
            double ap_sum = 0.0;
            double hit_sum = 0.0;
            for (const auto& [_, m] : run) {
                ap_sum += m.ap.at(k);
                hit_sum += m.hit.at(k) ? 1.0 : 0.0;
            }
            const auto n = static_cast<double>(std::max<std::size_t>(run.size(), 1));
            maps.push_back(ap_sum / n);
            hits.push_back(hit_sum / n);
        }
        report.aggregate[k] = {mean(maps), mean(hits), population_std(maps), population_std(hits)};
    }
    return report;
}

nlohmann::json report_to_json(const EvalReport& report) {
    nlohmann::json agg = nlohmann::json::object();
    nlohmann::json std_dev = nlohmann::json::object();
    for (const auto& [k, a] : report.aggregate) {
        agg[std::to_string(k)] = {{"map", a.map},
                                  {"hit_rate", a.hit_rate},
                                  {"map_std", a.map_std},
                                  {"hit_rate_std", a.hit_rate_std}};
        std_dev[std::to_string(k)] = a.map_std;
    }
    nlohmann::json per_run = nlohmann::json::array();
    for (const auto& run : report.per_run) {
        nlohmann::json tasks = nlohmann::json::object();
        for (const auto& [id, m] : run) {
            nlohmann::json ap = nlohmann::json::object();
            nlohmann::json hit = nlohmann::json::object();
            for (const auto& [k, v] : m.ap) ap[std::to_string(k)] = v;
            for (const auto& [k, v] : m.hit) hit[std::to_string(k)] = v;
            tasks[id] = {{"ap_at_k", ap}, {"hit_at_k", hit}};
        }
        per_run.push_back(tasks);
    }
    return {{"config", report.config}, {"k_values", report.k_values}, {"runs", report.runs()},
            {"aggregate", agg},        {"std_dev", std_dev},          {"per_run", per_run}};
}

EvalReport report_from_json(const nlohmann::json& j) {
    try {
        std::vector<RunMetrics> runs;
        for (const auto& run : j.at("per_run")) {
            RunMetrics rm;
            for (const auto& [id, m] : run.items()) {
                TaskMetrics tm;
                for (const auto& [k, v] : m.at("ap_at_k").items()) tm.ap[std::stoul(k)] = v.get<double>();
                for (const auto& [k, v] : m.at("hit_at_k").items()) tm.hit[std::stoul(k)] = v.get<bool>();
                rm[id] = std::move(tm);
            }
            runs.push_back(std::move(rm));
        }
        return aggregate(std::move(runs), j.at("k_values").get<std::vector<std::size_t>>(),
                         j.value("config", std::string{}));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("report: ") + e.what());
    }
}

Metric metric_from_string(std::string_view name) {
    if (name == "ap" || name == "map" || name == "AP" || name == "MAP") return Metric::ap;
    if (name == "hit" || name == "Hit") return Metric::hit;
    throw ConfigError("unknown metric: " + std::string(name));
}

TestKind test_from_string(std::string_view name) {
    if (name == "mann-whitney" || name == "mannwhitney" || name == "mwu") return TestKind::mann_whitney;
    if (name == "mcnemar") return TestKind::mcnemar;
    throw ConfigError("unknown test: " + std::string(name));
}

TestKind paired_test(Metric metric) { return metric == Metric::ap ? TestKind::mann_whitney : TestKind::mcnemar; }

Comparison compare_reports(const EvalReport& a, const EvalReport& b, Metric metric, std::size_t k,
                           std::optional<TestKind> requested) {
    const auto test = paired_test(metric);
    if (requested && *requested != test) {
        throw ConfigError(metric == Metric::ap ? "AP distributions are compared with Mann-Whitney U, not McNemar"
                                               : "binary Hit outcomes are compared with McNemar, not Mann-Whitney U");
    }
    if (a.task_ids() != b.task_ids()) throw MismatchedTaskSets("reports cover different task sets");
    const auto has_k = [k](const EvalReport& r) {
        return std::find(r.k_values.begin(), r.k_values.end(), k) != r.k_values.end();
    };
    if (!has_k(a) || !has_k(b)) throw ConfigError("k=" + std::to_string(k) + " is missing from a report");

    Comparison cmp;
    cmp.metric = metric;
    cmp.k = k;
    cmp.test = test;
    const std::size_t runs = std::min(a.runs(), b.runs());
    std::vector<double> xs;
    std::vector<double> ys;
    std::vector<std::pair<bool, bool>> paired;
    for (std::size_t r = 0; r < runs; ++r) {
        for (const auto& [id, ma] : a.per_run[r]) {
            const auto& mb = b.per_run[r].at(id);
            if (metric == Metric::ap) {
                xs.push_back(ma.ap.at(k));
                ys.push_back(mb.ap.at(k));
            } else {
                paired.emplace_back(ma.hit.at(k), mb.hit.at(k));
                xs.push_back(ma.hit.at(k) ? 1.0 : 0.0);
                ys.push_back(mb.hit.at(k) ? 1.0 : 0.0);
            }
        }
    }
    if (xs.empty()) throw MismatchedTaskSets("reports have no tasks");
    if (metric == Metric::ap) {
        const auto mw = mann_whitney_u(xs, ys);
        cmp.statistic = mw.u;
        cmp.p = mw.p;
        cmp.exact = mw.exact;
        cmp.mann_whitney = mw;
    } else {
        const auto mc = mcnemar(paired);
        cmp.statistic = mc.statistic;
        cmp.p = mc.p;
        cmp.exact = mc.exact;
        cmp.mcnemar = mc;
    }
    cmp.effect = cliffs_delta(xs, ys);
    return cmp;
}

std::string render_markdown(std::span<const ReportRow> rows) {
    if (rows.empty()) return {};
    const auto cols = columns(rows.front().report->k_values);
    std::ostringstream out;
    out << "| Configuration |";
    for (const auto& c : cols) out << ' ' << c << " |";
    out << "\n|---|";
    for (std::size_t i = 0; i < cols.size(); ++i) out << "---:|";
    out << '\n';
    for (const auto& row : rows) {
        out << "| " << row.name << " |";
        for (const auto& c : cols) {
            const auto k = std::stoul(c.substr(c.find('@') + 1));
            const auto& agg = row.report->aggregate.at(k);
            const double v = c.starts_with("MAP") ? agg.map : agg.hit_rate;
            out << ' ' << fmt3(v);
            if (auto it = row.markers.find(c); it != row.markers.end()) out << "<sup>" << it->second << "</sup>";
            out << " |";
        }
        out << '\n';
    }
    return out.str();
}

std::string render_csv(std::span<const ReportRow> rows) {
    if (rows.empty()) return {};
    const auto cols = columns(rows.front().report->k_values);
    std::ostringstream out;
    out << "configuration";
    for (const auto& c : cols) out << ',' << c << ',' << c << "_std";
    out << '\n';
    for (const auto& row : rows) {
        out << row.name;
        for (const auto& c : cols) {
            const auto k = std::stoul(c.substr(c.find('@') + 1));
            const auto& agg = row.report->aggregate.at(k);
            const bool is_map = c.starts_with("MAP");
            out << ',' << fmt3(is_map ? agg.map : agg.hit_rate) << ','
                << fmt3(is_map ? agg.map_std : agg.hit_rate_std);
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace bugloc
