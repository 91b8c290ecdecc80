#include "commands.hpp"

#include "bugloc/errors.hpp"
#include "bugloc/llm.hpp"
#include "bugloc/reformulation.hpp"
#include "bugloc/task.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <thread>

namespace bugloc::cli {

namespace fs = std::filesystem;

namespace {

void write_atomically(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp);
        out << content;
    }
    fs::rename(tmp, path);
}

std::string fixed(double v, int precision = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

struct RepoData {
    FileManifest manifest;
    std::optional<Bm25Index> index;
    std::string error;
};

struct TaskOutcome {
    std::vector<std::string> ranking;
    std::string error;  // empty on success
    std::string transcript;
    ErrorCounters counters;
    ToolUsage usage;
};

// Extraction for group modes without a cache entry: one request plus the
// same bounded corrections the agent uses.
std::optional<ExtractedFields> extract_live(const BugTask& task, Backend& backend, const RunConfig& config) {
    const auto prompt = extraction_prompt(task.bug_description);
    std::vector<ChatMessage> conversation = {{Role::system, prompt.system}, {Role::user, prompt.user}};
    ChatRequest params;
    params.seed = config.seed;
    params.timeout = std::chrono::seconds(config.backend.timeout_seconds);
    ChatRequest req = params;
    req.messages = conversation;
    auto response = complete(req, backend);
    for (int attempt = 0;; ++attempt) {
        if (response.finish_reason == FinishReason::timeout || response.finish_reason == FinishReason::error)
            return std::nullopt;
        try {
            return parse_extraction(response.content);
        } catch (const FormatError& e) {
            if (attempt >= 3) return std::nullopt;
            conversation.push_back({Role::assistant, response.content});
            response = self_correct({ValidationKind::json, e.what(), {}}, attempt + 1, backend, conversation, params);
        }
    }
}

}  // namespace

int cmd_index(const fs::path& repo_root, const fs::path& out_index, const IndexOptions& options,
              std::ostream& out, std::ostream& err) {
    try {
        const auto manifest = scan_repository(repo_root, options.extensions, options.exclude_tests);
        const auto index = Bm25Index::build(manifest, options.tokenizer, options.params);
        if (out_index.has_parent_path()) fs::create_directories(out_index.parent_path());
        index.save_file(out_index);
        out << "N=" << index.doc_count() << " avg_doc_len=" << fixed(index.avg_doc_len(), 4)
            << " excluded=" << manifest.excluded_count << " -> " << out_index.string() << '\n';
        return kExitOk;
    } catch (const EmptyCorpus&) {
        err << "error: empty corpus: no indexable files under " << repo_root.string() << '\n';
        return kExitDataError;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitDataError;
    }
}

int cmd_search(const fs::path& index_file, const std::string& query, std::size_t k, std::ostream& out,
               std::ostream& err) {
    try {
        if (k == 0) throw ConfigError("--k must be >= 1");
        const auto index = Bm25Index::load_file(index_file);
        const auto results = index.search(query, k);
        for (const auto& e : results.entries) out << fixed(e.score, 6) << '\t' << e.path << '\n';
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitDataError;
    }
}

RunMode RunMode::parse(std::string_view text) {
    RunMode mode;
    if (text == "baseline") return mode;
    if (text.starts_with("group:")) {
        mode.kind = PipelineKind::group;
        try {
            mode.group = group_from_string(text.substr(6));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        return mode;
    }
    if (text.starts_with("agent:")) {
        mode.kind = PipelineKind::agent;
        mode.agent_mode = mode_from_string(text.substr(6));
        return mode;
    }
    throw ConfigError("unknown mode '" + std::string(text) +
                      "' (expected baseline, group:G1..G5, agent:all_at_top, agent:best_at_top)");
}

std::string RunMode::name() const {
    switch (kind) {
        case PipelineKind::baseline: return "baseline";
        case PipelineKind::group: return "group:" + std::string(to_string(group));
        case PipelineKind::agent: return "agent:" + std::string(to_string(agent_mode));
    }
    return "baseline";
}

void validate(const RunConfig& config) {
    if (config.runs < 1) throw ConfigError("--runs must be >= 1");
    if (config.k_values.empty()) throw ConfigError("--k needs at least one value");
    for (auto k : config.k_values)
        if (k != 1 && k != 5 && k != 10) throw ConfigError("--k values must be drawn from {1, 5, 10}");
    if (config.parallelism < 1) throw ConfigError("--parallelism must be >= 1");
    if (config.backend.timeout_seconds < 1) throw ConfigError("--timeout must be >= 1");
    if (config.tasks_file.empty()) throw ConfigError("--tasks is required");
    if (config.repos_dir.empty()) throw ConfigError("--repos is required");
    if (config.output_dir.empty()) throw ConfigError("--out is required");
    if (config.answer_k != 0 && config.answer_k != 1 && config.answer_k != 5 && config.answer_k != 10)
        throw ConfigError("--answer-k must be 1, 5 or 10");
    const auto mode = RunMode::parse(config.mode);
    const bool has_backend = !config.backend.url.empty() || !config.backend.script_file.empty();
    if (mode.kind == PipelineKind::agent && !has_backend)
        throw ConfigError("agent modes need --backend-url or --script");
    if (mode.kind == PipelineKind::group && !has_backend && config.extractions_cache.empty())
        throw ConfigError("group modes need --extractions-cache, --backend-url or --script");
}

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err) {
    RunMode mode;
    ScriptBook scripts;
    std::map<std::string, ExtractedFields> cache;
    std::unique_ptr<HttpBackend> live;
    try {
        validate(config);
        mode = RunMode::parse(config.mode);
        if (!config.backend.script_file.empty()) {
            scripts = load_script_book(config.backend.script_file);
        } else if (!config.backend.url.empty()) {
            live = std::make_unique<HttpBackend>(
                HttpBackendConfig{config.backend.url, config.backend.model, config.backend.api_key, {}});
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const Error& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfigError;
    }

    std::vector<BugTask> tasks;
    try {
        tasks = load_tasks(config.tasks_file, config.repos_dir);
        if (!config.extractions_cache.empty()) cache = load_extraction_cache(config.extractions_cache);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitDataError;
    }
    if (tasks.empty()) {
        err << "error: no tasks in " << config.tasks_file.string() << '\n';
        return kExitDataError;
    }

    auto k_values = config.k_values;
    std::sort(k_values.begin(), k_values.end());
    k_values.erase(std::unique(k_values.begin(), k_values.end()), k_values.end());
    const std::size_t depth = config.answer_k ? config.answer_k : k_values.back();

    // Index every repository once; failures become per-task errors.
    std::map<std::string, RepoData> repos;
    for (const auto& task : tasks) {
        if (repos.contains(task.repo)) continue;
        auto& data = repos[task.repo];
        try {
            data.manifest = scan_repository(task.repo_root, config.index.extensions, config.index.exclude_tests);
            data.index = Bm25Index::build(data.manifest, config.index.tokenizer, config.index.params);
            fs::create_directories(config.output_dir / "index");
            data.index->save_file(config.output_dir / "index" / (task.repo + ".jsonl"));
        } catch (const Error& e) {
            data.error = e.what();
        }
    }

    auto run_task = [&](const BugTask& task, int run) -> TaskOutcome {
        TaskOutcome outcome;
        const auto& repo = repos.at(task.repo);
        if (!repo.index) {
            outcome.error = "index_error: " + repo.error;
            return outcome;
        }
        std::unique_ptr<ScriptedBackend> scripted;
        Backend* backend = live.get();
        if (!scripts.empty()) {
            auto it = scripts.find(task.task_id);
            if (it == scripts.end()) it = scripts.find("*");
            if (it != scripts.end()) {
                scripted = std::make_unique<ScriptedBackend>(it->second);
                backend = scripted.get();
            }
        }
        try {
            switch (mode.kind) {
                case PipelineKind::baseline:
                    outcome.ranking = repo.index->search(baseline_query(task.bug_description), depth).paths();
                    break;
                case PipelineKind::group: {
                    std::optional<ExtractedFields> fields;
                    if (auto it = cache.find(task.task_id); it != cache.end()) {
                        fields = it->second;
                    } else if (backend) {
                        fields = extract_live(task, *backend, config);
                    }
                    if (!fields) {
                        outcome.error = "extraction_failed";
                        break;
                    }
                    const auto query = build_query(*fields, field_group(mode.group));
                    if (query.empty()) {
                        outcome.error = "empty_query";
                        break;
                    }
                    outcome.ranking = repo.index->search(query, depth).paths();
                    break;
                }
                case PipelineKind::agent: {
                    if (!backend) {
                        outcome.error = "no_script_for_task";
                        break;
                    }
                    AgentConfig agent;
                    agent.mode = mode.agent_mode;
                    agent.answer_k = depth;
                    agent.max_steps = config.max_steps;
                    agent.timeout = std::chrono::seconds(config.backend.timeout_seconds);
                    agent.seed = config.seed;
                    const RepositoryContext ctx{repo.manifest, *repo.index};
                    auto result = run_agent(task, agent, *backend, ctx);
                    outcome.ranking = result.ranking.files;
                    if (result.transcript.outcome != AgentOutcome::completed)
                        outcome.error = std::string(to_string(result.transcript.outcome));
                    outcome.counters = result.transcript.error_counters;
                    outcome.usage = result.transcript.tool_usage;
                    outcome.transcript = transcript_to_jsonl(result.transcript);
                    write_atomically(config.output_dir / "transcripts" / ("run-" + std::to_string(run)) /
                                         (task.task_id + ".jsonl"),
                                     outcome.transcript);
                    break;
                }
            }
        } catch (const std::exception& e) {
            outcome.ranking.clear();
            outcome.error = std::string("task_error: ") + e.what();
        }
        return outcome;
    };

    std::vector<RunMetrics> per_run;
    ErrorCounters totals;
    ToolUsage usage_totals;
    std::size_t agent_tasks = 0;
    for (int run = 1; run <= config.runs; ++run) {
        std::vector<TaskOutcome> outcomes(tasks.size());
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (auto i = next++; i < tasks.size(); i = next++) outcomes[i] = run_task(tasks[i], run);
        };
        {
            std::vector<std::jthread> pool;
            const auto n = std::min<std::size_t>(static_cast<std::size_t>(config.parallelism), tasks.size());
            for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
            worker();
        }

        std::string rankings;
        RunMetrics metrics;
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            const auto& task = tasks[i];
            const auto& o = outcomes[i];
            nlohmann::json row = {{"task_id", task.task_id},
                                  {"ranking", o.ranking},
                                  {"error", o.error.empty() ? nlohmann::json(nullptr) : nlohmann::json(o.error)}};
            rankings += row.dump() + '\n';
            const std::set<std::string> relevant(task.ground_truth_files.begin(), task.ground_truth_files.end());
            metrics[task.task_id] = evaluate_task(o.ranking, relevant, k_values);
            if (mode.kind == PipelineKind::agent) {
                ++agent_tasks;
                totals.aborted_file_views += o.counters.aborted_file_views;
                totals.timeouts += o.counters.timeouts;
                totals.aborted_invalid_json += o.counters.aborted_invalid_json;
                totals.duplicate_view_warnings += o.counters.duplicate_view_warnings;
                usage_totals.extract_relevant += o.usage.extract_relevant;
                usage_totals.bm25_topk += o.usage.bm25_topk;
                usage_totals.view_file += o.usage.view_file;
                usage_totals.view_file_unique += o.usage.view_file_unique;
                usage_totals.view_readme += o.usage.view_readme;
            }
            if (!o.error.empty()) err << "run " << run << " task " << task.task_id << ": " << o.error << '\n';
        }
        write_atomically(config.output_dir / "rankings" / ("run-" + std::to_string(run) + ".jsonl"), rankings);
        per_run.push_back(std::move(metrics));
    }

    const auto report = aggregate(std::move(per_run), k_values, mode.name());
    auto report_json = report_to_json(report);
    if (mode.kind == PipelineKind::agent && agent_tasks > 0) {
        const auto n = static_cast<double>(agent_tasks);
        report_json["agent"] = {
            {"tool_call_averages",
             {{"bm25_topk", usage_totals.bm25_topk / n},
              {"extract_relevant", usage_totals.extract_relevant / n},
              {"view_file", usage_totals.view_file / n},
              {"view_file_unique", usage_totals.view_file_unique / n},
              {"view_readme", usage_totals.view_readme / n}}},
            {"error_counts",
             {{"aborted_file_views_pct",
               usage_totals.view_file ? 100.0 * static_cast<double>(totals.aborted_file_views) /
                                            static_cast<double>(usage_totals.view_file)
                                      : 0.0},
              {"model_timeouts", totals.timeouts},
              {"aborted_invalid_json", totals.aborted_invalid_json},
              {"duplicate_view_warnings", totals.duplicate_view_warnings}}}};
    }
    write_atomically(config.output_dir / "report.json", report_json.dump(2) + '\n');
    const ReportRow row{mode.name(), &report, {}};
    const auto table = render_markdown(std::span<const ReportRow>(&row, 1));
    write_atomically(config.output_dir / "report.md", table);
    write_atomically(config.output_dir / "report.csv", render_csv(std::span<const ReportRow>(&row, 1)));

    out << table;
    out << "runs=" << report.runs() << " tasks=" << tasks.size();
    for (const auto& [k, a] : report.aggregate) out << " std(MAP@" << k << ")=" << fixed(a.map_std, 4);
    out << '\n';
    return kExitOk;
}

EvalReport load_report(const fs::path& path) {
    const auto file = fs::is_directory(path) ? path / "report.json" : path;
    std::ifstream in(file);
    if (!in) throw FormatError("cannot read report " + file.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("report " + file.string() + ": " + e.what());
    }
    return report_from_json(j);
}

int cmd_compare(const fs::path& report_a, const fs::path& report_b, const std::string& metric, std::size_t k,
                const std::optional<std::string>& test, std::ostream& out, std::ostream& err) {
    Metric m;
    std::optional<TestKind> requested;
    try {
        m = metric_from_string(metric);
        if (test) requested = test_from_string(*test);
        if (requested && *requested != paired_test(m)) {
            throw ConfigError(m == Metric::ap ? "refused: AP is compared with Mann-Whitney U, not McNemar"
                                              : "refused: Hit@K is compared with McNemar, not Mann-Whitney U");
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfigError;
    }
    try {
        const auto a = load_report(report_a);
        const auto b = load_report(report_b);
        const auto cmp = compare_reports(a, b, m, k, requested);
        const std::string label = (m == Metric::ap ? "MAP@" : "Hit@") + std::to_string(k);
        out << label << ' ' << a.config << " vs " << b.config << '\n';
        if (cmp.test == TestKind::mann_whitney) {
            out << "test=mann-whitney U=" << fixed(cmp.statistic, 1);
        } else {
            out << "test=mcnemar b=" << cmp.mcnemar->b << " c=" << cmp.mcnemar->c
                << " statistic=" << fixed(cmp.statistic, 4);
        }
        out << " p=" << fixed(cmp.p, 6) << (cmp.exact ? " (exact)" : " (approx)") << '\n';
        out << "cliffs_delta=" << fixed(cmp.effect.delta, 4) << " (" << to_string(cmp.effect.magnitude) << ")\n";
        out << (cmp.significant() ? "significant at p<0.05 †" : "not significant at p<0.05") << '\n';
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitDataError;
    }
}

}  // namespace bugloc::cli
