// Exit-criteria suite. Prints one PASS/FAIL/SKIP line per criterion.
//
//   bugloc_acceptance                 run everything
//   bugloc_acceptance <name>...       run the named criteria only
//
// Exit status: 0 when nothing failed, 1 on any failure, 77 when every selected
// criterion was skipped.

#include "bugloc/agent.hpp"
#include "bugloc/errors.hpp"
#include "bugloc/evaluation.hpp"
#include "bugloc/stats.hpp"
#include "commands.hpp"

#include "support/oracles.hpp"
#include "support/pipenv_example.hpp"
#include "support/toy_fixture.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

using namespace bugloc;
using Clock = std::chrono::steady_clock;

namespace {

enum class Verdict { pass, fail, skip };

struct Outcome {
    Verdict verdict = Verdict::pass;
    std::string detail;
};

struct Criterion {
    std::string name;
    std::function<Outcome()> run;
};

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, double value) {
    char buf[128];
    std::snprintf(buf, sizeof buf, format, value);
    return buf;
}

std::string collapse_spaces(const std::string& s) {
    std::string out;
    for (char c : s) {
        const bool space = c == ' ' || c == '\n' || c == '\t';
        if (space && (out.empty() || out.back() == ' ')) continue;
        out += space ? ' ' : c;
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

// --- retrieval --------------------------------------------------------------

Outcome bm25_oracle() {
    constexpr int kCorpora = 200, kQueries = 50;
    constexpr double kTolerance = 1e-9, kBudgetSeconds = 60.0;
    std::mt19937 rng(20240901);
    const auto start = Clock::now();
    std::size_t mismatches = 0, compared = 0;
    double worst = 0;
    for (int c = 0; c < kCorpora; ++c) {
        const std::size_t n_docs = 1 + rng() % 200;
        const std::size_t vocab = 5 + rng() % 300;
        std::vector<std::string> paths;
        std::vector<std::vector<std::string>> docs;
        for (std::size_t d = 0; d < n_docs; ++d) {
            paths.push_back("src/m" + std::to_string(d) + ".py");
            std::vector<std::string> doc;
            for (std::size_t t = 0, len = 1 + rng() % 50; t < len; ++t)
                doc.push_back("t" + std::to_string(rng() % vocab));
            docs.push_back(std::move(doc));
        }
        const auto index = Bm25Index::from_tokens(paths, docs);
        for (int q = 0; q < kQueries; ++q) {
            std::vector<std::string> query;
            for (std::size_t t = 0, len = 1 + rng() % 8; t < len; ++t)
                query.push_back("t" + std::to_string(rng() % (vocab + 20)));
            const std::size_t k = std::array<std::size_t, 4>{1, 10, 30, 200}[rng() % 4];
            const auto got = index.search_tokens(query, k);
            const auto want = oracle::bm25_rank(paths, docs, query, k);
            ++compared;
            bool same = got.entries.size() == want.size();
            for (std::size_t i = 0; same && i < want.size(); ++i) {
                const double delta = std::abs(got.entries[i].score - want[i].score);
                worst = std::max(worst, delta);
                same = got.entries[i].path == want[i].path && delta <= kTolerance;
            }
            if (!same) ++mismatches;
        }
    }
    const double elapsed = seconds_since(start);
    const bool ok = mismatches == 0 && elapsed < kBudgetSeconds;
    return {ok ? Verdict::pass : Verdict::fail,
            std::to_string(compared) + " queries, " + std::to_string(mismatches) + " mismatches, max |d| " +
                fmt("%.2e", worst) + ", " + fmt("%.1f s", elapsed) + " (budget 60 s)"};
}

// --- reformulation ----------------------------------------------------------

Outcome query_fidelity() {
    const auto built = build_query(pipenv_example::fields(), field_group(GroupId::G1_full));
    const bool example_ok = collapse_spaces(built) == collapse_spaces(pipenv_example::kRenderedQuery);

    std::mt19937 rng(77);
    const std::string alphabet = "abcdefXYZ_0189 .,:'\"[]()\n";
    auto text = [&](std::size_t max_len) {
        std::string s;
        for (std::size_t i = 0, n = rng() % (max_len + 1); i < n; ++i) s += alphabet[rng() % alphabet.size()];
        return s;
    };
    std::size_t violations = 0;
    for (int i = 0; i < 1000; ++i) {
        ExtractedFields f;
        f.explanation = text(60);
        for (std::size_t j = 0, n = rng() % 5; j < n; ++j) f.identifiers.push_back(text(15));
        for (std::size_t j = 0, n = rng() % 3; j < n; ++j) f.paths.push_back(text(15));
        for (std::size_t j = 0, n = rng() % 3; j < n; ++j) f.filenames.push_back(text(10));
        f.code_snippet = text(40);
        f.stacktrace = text(40);
        f.error_message = text(30);
        const auto g2 = build_query(f, field_group(GroupId::G2_explanation));
        const auto g4 = build_query(f, field_group(GroupId::G4_id_snippets));
        const auto g5 = build_query(f, field_group(GroupId::G5_exp_id_snippets));
        const auto joined = g2.empty() ? g4 : g4.empty() ? g2 : g2 + " " + g4;
        if (g5 != joined) ++violations;
    }

    std::string detail = "G5 = G2 ++ G4 on 1000 random inputs: " + std::to_string(violations) + " violations";
    if (!example_ok) {
        detail += "; pipenv example differs from the rendered query:\n      built:    " + collapse_spaces(built) +
                  "\n      rendered: " + collapse_spaces(pipenv_example::kRenderedQuery);
    } else {
        detail += "; pipenv example reproduced";
    }
    return {example_ok && violations == 0 ? Verdict::pass : Verdict::fail, detail};
}

// --- evaluation -------------------------------------------------------------

Outcome metric_identity() {
    std::mt19937 rng(500);
    std::size_t violations = 0;
    for (int set = 0; set < 500; ++set) {
        RunMetrics run;
        for (std::size_t t = 0, n = 1 + rng() % 40; t < n; ++t) {
            std::vector<std::string> ranking;
            for (std::size_t i = 0, len = rng() % 12; i < len; ++i) ranking.push_back("f" + std::to_string(i));
            std::shuffle(ranking.begin(), ranking.end(), rng);
            const std::set<std::string> relevant = {"f" + std::to_string(rng() % 12)};
            run["task" + std::to_string(t)] = evaluate_task(ranking, relevant, kDefaultKValues);
        }
        const auto report = aggregate({run}, kDefaultKValues);
        if (report.aggregate.at(1).map != report.aggregate.at(1).hit_rate) ++violations;
    }
    return {violations == 0 ? Verdict::pass : Verdict::fail,
            "500 single-relevant task sets, " + std::to_string(violations) + " with MAP@1 != Hit@1"};
}

Outcome metric_oracle() {
    std::mt19937 rng(1000);
    std::size_t hit_mismatch = 0, ap_mismatch = 0;
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
        std::vector<std::string> pool;
        for (int f = 0; f < 25; ++f) pool.push_back("pkg/f" + std::to_string(f) + ".py");
        std::shuffle(pool.begin(), pool.end(), rng);
        const std::vector<std::string> ranking(pool.begin(), pool.begin() + static_cast<long>(rng() % 16));
        std::set<std::string> relevant;
        for (std::size_t r = 0, n = 1 + rng() % 5; r < n; ++r) relevant.insert(pool[rng() % pool.size()]);
        const std::size_t k = 1 + rng() % 15;
        if (hit_at_k(ranking, relevant, k) != oracle::hit(ranking, relevant, k)) ++hit_mismatch;
        const double delta =
            std::abs(average_precision_at_k(ranking, relevant, k) - oracle::average_precision(ranking, relevant, k));
        worst = std::max(worst, delta);
        if (delta > 1e-12) ++ap_mismatch;
    }
    return {hit_mismatch == 0 && ap_mismatch == 0 ? Verdict::pass : Verdict::fail,
            "1000 instances, Hit mismatches " + std::to_string(hit_mismatch) + ", AP beyond 1e-12 " +
                std::to_string(ap_mismatch) + " (max |d| " + fmt("%.2e", worst) + ")"};
}

Outcome statistical_tests() {
    std::mt19937 rng(8);
    std::size_t mw_checked = 0, mw_bad = 0;
    double mw_worst = 0;
    for (std::size_t na = 1; na <= 8; ++na)
        for (std::size_t nb = 1; nb <= 8; ++nb)
            for (int rep = 0; rep < 4; ++rep) {
                std::vector<double> a, b;
                const unsigned levels = rep == 0 ? 1000 : 3 + rep;  // rep 0: ties are rare
                for (std::size_t i = 0; i < na; ++i) a.push_back(static_cast<double>(rng() % levels) / levels);
                for (std::size_t i = 0; i < nb; ++i) b.push_back(static_cast<double>(rng() % levels) / levels);
                const double delta = std::abs(mann_whitney_u(a, b).p - oracle::mann_whitney_exact_p(a, b));
                mw_worst = std::max(mw_worst, delta);
                ++mw_checked;
                if (delta > 1e-9) ++mw_bad;
            }

    const double mcnemar_p = mcnemar(10, 0).p;
    const bool mcnemar_ok = mcnemar_p == 0.001953125;

    std::size_t cliff_checked = 0, cliff_bad = 0;
    for (std::size_t na = 1; na <= 20; ++na)
        for (std::size_t nb = 1; nb <= 20; ++nb) {
            std::vector<double> a, b;
            for (std::size_t i = 0; i < na; ++i) a.push_back(static_cast<double>(rng() % 6));
            for (std::size_t i = 0; i < nb; ++i) b.push_back(static_cast<double>(rng() % 6));
            ++cliff_checked;
            if (std::abs(cliffs_delta(a, b).delta - oracle::cliffs_delta(a, b)) > 1e-12) ++cliff_bad;
        }

    const bool ok = mw_bad == 0 && mcnemar_ok && cliff_bad == 0;
    return {ok ? Verdict::pass : Verdict::fail,
            "Mann-Whitney " + std::to_string(mw_checked) + " cases, " + std::to_string(mw_bad) +
                " beyond 1e-9 (max |d| " + fmt("%.2e", mw_worst) + "); McNemar(10,0) p=" + fmt("%.9f", mcnemar_p) +
                "; Cliff's delta " + std::to_string(cliff_checked) + " cases, " + std::to_string(cliff_bad) +
                " mismatches"};
}

// --- agent ------------------------------------------------------------------

const testutil::ToyRepo& toy() {
    static const testutil::ToyRepo repo;
    return repo;
}

// Ten tasks over the toy repository with a scripted backend, three runs.
// Returns an empty string on success.
std::string deterministic_runs() {
    testutil::TempDir dir;
    const auto& base = toy().tasks;
    std::string tasks;
    nlohmann::json book = nlohmann::json::object();
    for (int i = 0; i < 10; ++i) {
        const auto& t = base[static_cast<std::size_t>(i) % base.size()];
        auto record = task_to_json(t);
        const auto id = "acc-" + std::to_string(i);
        record["task_id"] = id;
        tasks += record.dump() + "\n";
        const auto& truth = t.ground_truth_files.front();
        const std::string other = i % 2 ? "toyshop/cart.py" : "toyshop/orders.py";
        book[id] = {nlohmann::json{{"reply", nlohmann::json::parse(testutil::extraction_reply())}},
                    nlohmann::json{{"reply", {{"tool", "bm25_topk"}, {"args", {{"k", 20}, {"query", "stock units order"}}}}}},
                    nlohmann::json{{"reply", {{"tool", "view_file"}, {"args", {{"path", truth}}}}}},
                    nlohmann::json{{"reply", {{"tool", "view_file"}, {"args", {{"path", other}}}}}},
                    nlohmann::json{{"reply", {{"tool", "final_answer"}, {"args", {{"files", {other, truth}}}}}}},
                    nlohmann::json{{"reply", {{"files", i % 3 ? nlohmann::json{truth, other} : nlohmann::json{other, truth}}}}}};
    }
    dir.write("tasks.jsonl", tasks);
    dir.write("script.json", book.dump(2));

    cli::RunConfig config;
    config.tasks_file = dir.path() / "tasks.jsonl";
    config.repos_dir = testutil::fixture_dir();
    config.mode = "agent:best_at_top";
    config.runs = 3;
    config.parallelism = 4;
    config.backend.script_file = dir.path() / "script.json";
    config.output_dir = dir.path() / "out";
    std::ostringstream out, err;
    if (cli::cmd_run(config, out, err) != cli::kExitOk) return "cmd_run failed: " + err.str();
    if (!err.str().empty()) return "task errors: " + err.str();

    const auto report = cli::load_report(config.output_dir);
    for (const auto& [k, agg] : report.aggregate)
        if (agg.map_std != 0.0 || agg.hit_rate_std != 0.0) return "nonzero std at k=" + std::to_string(k);
    for (int i = 0; i < 10; ++i) {
        const auto name = "acc-" + std::to_string(i) + ".jsonl";
        const auto first = testutil::read_file(config.output_dir / "transcripts" / "run-1" / name);
        if (first.empty()) return "missing transcript " + name;
        for (int run = 2; run <= 3; ++run)
            if (testutil::read_file(config.output_dir / "transcripts" / ("run-" + std::to_string(run)) / name) != first)
                return "transcript bytes differ for " + name;
    }
    return {};
}

Outcome agent_mechanisms() {
    using testutil::call;
    using testutil::extraction_reply;
    using testutil::script;
    const auto start = Clock::now();
    const auto& task = toy().tasks[1];
    const auto ctx = toy().context();
    AgentConfig config;
    config.self_evaluation = false;
    std::vector<std::string> failures;

    if (auto why = deterministic_runs(); !why.empty()) failures.push_back("(a) " + why);

    {
        ScriptedBackend backend(script({extraction_reply(), "{oops", "{oops", "{oops", "{oops"}));
        const auto r = run_agent(task, config, backend, ctx);
        const bool ok = r.transcript.outcome == AgentOutcome::aborted_invalid_json &&
                        r.transcript.error_counters.aborted_invalid_json == 1 && r.ranking.files.empty() &&
                        r.transcript.max_correction_attempt() == 3 && backend.remaining() == 0;
        if (!ok) failures.push_back("(b) correction bound or abort record wrong");
    }
    {
        std::vector<std::string> replies = {extraction_reply()};
        for (int i = 0; i < 6; ++i) replies.push_back(call("view_file", {{"path", "toyshop/inventory.py"}}));
        replies.push_back(call("final_answer", {{"files", {"toyshop/inventory.py"}}}));
        ScriptedBackend backend(script(replies));
        const auto r = run_agent(task, config, backend, ctx);
        std::size_t blocked_at = 0, views = 0;
        for (const auto& e : r.transcript.events) {
            if (!e.parsed_tool_call || e.parsed_tool_call->tool != ToolName::view_file || !e.tool_result) continue;
            ++views;
            if (e.tool_result->value("blocked", false) && !blocked_at) blocked_at = views;
        }
        if (blocked_at != 6 || r.transcript.error_counters.aborted_file_views != 1)
            failures.push_back("(c) duplicate view blocked at request " + std::to_string(blocked_at));
    }
    {
        ScriptedBackend unused(script({"-"}));
        AgentState state(task, config, ctx, unused);
        std::size_t wrong = 0;
        for (int k = 0; k <= 40; ++k) {
            const bool allowed = k == 10 || k == 20 || k == 30;
            const bool valid =
                std::holds_alternative<Validated>(validate_output(call("bm25_topk", {{"k", k}}), state));
            if (valid != allowed) ++wrong;
        }
        if (wrong) failures.push_back("(d) " + std::to_string(wrong) + " k values misclassified");
    }
    {
        ScriptedBackend backend(
            script({extraction_reply(), call("final_answer", {{"files", {"toyshop/inventory.py"}}})}));
        const auto r = run_agent(task, config, backend, ctx);
        const auto expected =
            build_query(parse_extraction(extraction_reply()), field_group(GroupId::G5_exp_id_snippets));
        if (r.transcript.seeded_query != expected) failures.push_back("(e) seeded query differs from G5 query");
    }

    const double elapsed = seconds_since(start);
    if (elapsed >= 30.0) failures.push_back("runtime " + fmt("%.1f s", elapsed));
    std::string detail = "(a)-(e) in " + fmt("%.2f s", elapsed) + " (budget 30 s)";
    for (const auto& f : failures) detail += "; " + f;
    return {failures.empty() ? Verdict::pass : Verdict::fail, detail};
}

Outcome timeout_contract() {
    constexpr auto kTimeout = std::chrono::seconds(2);
    AgentConfig config;
    config.self_evaluation = false;
    config.timeout = kTimeout;
    auto entries = testutil::script({testutil::extraction_reply()});
    entries.push_back({std::nullopt, testutil::call("view_readme"), std::chrono::milliseconds(60'000)});
    ScriptedBackend backend(entries);

    const auto start = Clock::now();
    const auto r = run_agent(toy().tasks[0], config, backend, toy().context());
    const double elapsed = seconds_since(start);

    const bool reason = !r.transcript.events.empty() && r.transcript.events.back().finish_reason == "timeout";
    const bool counted = r.transcript.error_counters.timeouts == 1;
    const bool in_time = elapsed <= static_cast<double>(kTimeout.count()) + 5.0;
    return {reason && counted && in_time ? Verdict::pass : Verdict::fail,
            std::string("finish_reason=") + (reason ? "timeout" : "other") +
                ", timeouts=" + std::to_string(r.transcript.error_counters.timeouts) + ", returned after " +
                fmt("%.2f s", elapsed) + " (limit " + std::to_string(kTimeout.count() + 5) + " s)"};
}

Outcome live_smoke() {
    const auto env = HttpBackendConfig::from_env();
    if (!env) return {Verdict::skip, "BUGLOC_BACKEND_URL not set"};
    testutil::TempDir dir;
    auto run = [&](const std::string& mode) {
        cli::RunConfig config;
        config.tasks_file = testutil::fixture_dir() / "tasks.jsonl";
        config.repos_dir = testutil::fixture_dir();
        config.mode = mode;
        config.runs = 1;
        config.k_values = {5};
        config.backend.url = env->url;
        config.backend.model = env->model;
        config.backend.api_key = env->api_key;
        config.output_dir = dir.path() / (mode == "baseline" ? "baseline" : "agent");
        std::ostringstream out, err;
        if (cli::cmd_run(config, out, err) != cli::kExitOk) throw std::runtime_error(err.str());
        return cli::load_report(config.output_dir).aggregate.at(5).hit_rate;
    };
    try {
        const double baseline = run("baseline");
        const double agent = run("agent:best_at_top");
        return {agent >= baseline ? Verdict::pass : Verdict::fail,
                "Hit@5 agent " + fmt("%.3f", agent) + " vs baseline " + fmt("%.3f", baseline) + " on " + env->url};
    } catch (const std::exception& e) {
        return {Verdict::fail, e.what()};
    }
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria = {
        {"bm25_oracle", bm25_oracle},
        {"query_fidelity", query_fidelity},
        {"metric_identity", metric_identity},
        {"metric_oracle", metric_oracle},
        {"statistical_tests", statistical_tests},
        {"agent_mechanisms", agent_mechanisms},
        {"timeout_contract", timeout_contract},
        {"live_smoke", live_smoke},
    };
    const std::set<std::string> selected(argv + 1, argv + argc);
    for (const auto& name : selected) {
        if (std::none_of(criteria.begin(), criteria.end(), [&](const Criterion& c) { return c.name == name; })) {
            std::cerr << "unknown criterion: " << name << "\n";
            return 2;
        }
    }

    std::size_t ran = 0, failed = 0, skipped = 0;
    for (const auto& c : criteria) {
        if (!selected.empty() && !selected.count(c.name)) continue;
        ++ran;
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {Verdict::fail, std::string("exception: ") + e.what()};
        }
        const char* tag = o.verdict == Verdict::pass ? "PASS" : o.verdict == Verdict::fail ? "FAIL" : "SKIP";
        if (o.verdict == Verdict::fail) ++failed;
        if (o.verdict == Verdict::skip) ++skipped;
        std::cout << tag << "  " << c.name << "  " << o.detail << std::endl;
    }
    if (failed) return 1;
    return ran > 0 && skipped == ran ? 77 : 0;
}
