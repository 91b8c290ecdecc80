#include "commands.hpp"

#include "bugloc/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

std::vector<std::size_t> parse_k_list(const std::string& text) {
    std::vector<std::size_t> ks;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = text.find(',', pos);
        const auto item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (item.empty()) throw bugloc::ConfigError("--k: empty item in '" + text + "'");
        try {
            std::size_t used = 0;
            const auto value = std::stoul(item, &used);
            if (used != item.size()) throw std::invalid_argument(item);
            ks.push_back(value);
        } catch (const std::logic_error&) {
            throw bugloc::ConfigError("--k: not an integer: '" + item + "'");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return ks;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace bugloc::cli;

    CLI::App app{"bugloc: BM25 and agent-based bug localization experiments"};
    app.require_subcommand(1);

    std::string repo, out_index;
    auto* index = app.add_subcommand("index", "Build a BM25 index over a repository");
    index->add_option("repo", repo, "Repository root")->required();
    index->add_option("--out", out_index, "Index file (JSONL)")->required();
    bool keep_tests = false;
    index->add_flag("--keep-tests", keep_tests, "Index test files too");

    std::string index_file, query;
    std::size_t search_k = 10;
    auto* search = app.add_subcommand("search", "Query a persisted index");
    search->add_option("--index", index_file, "Index file")->required();
    search->add_option("--query", query, "Query text")->required();
    search->add_option("--k", search_k, "Number of results");

    RunConfig run_config;
    std::string k_text = "1,5,10";
    std::string script, answer_k_text;
    auto* run = app.add_subcommand("run", "Run an experiment configuration over a task set");
    run->add_option("--tasks", run_config.tasks_file, "Tasks JSONL")->required();
    run->add_option("--repos", run_config.repos_dir, "Directory holding the repositories")->required();
    run->add_option("--mode", run_config.mode, "baseline | group:G1..G5 | agent:all_at_top | agent:best_at_top");
    run->add_option("--k", k_text, "Comma-separated cutoffs from {1,5,10}");
    run->add_option("--runs", run_config.runs, "Repetitions");
    run->add_option("--backend-url", run_config.backend.url, "Chat completions endpoint (http://)");
    run->add_option("--model", run_config.backend.model, "Model name sent to the endpoint");
    run->add_option("--api-key", run_config.backend.api_key, "Bearer token for the endpoint");
    run->add_option("--timeout", run_config.backend.timeout_seconds, "Per-request timeout in seconds");
    run->add_option("--script", run_config.backend.script_file, "Scripted replies (JSON) instead of a live model");
    run->add_option("--out", run_config.output_dir, "Output directory")->required();
    run->add_option("--extractions-cache", run_config.extractions_cache, "Cached extraction JSONL");
    run->add_option("--parallelism", run_config.parallelism, "Tasks processed concurrently");
    run->add_option("--seed", run_config.seed, "Sampling seed forwarded to the model");
    run->add_option("--answer-k", run_config.answer_k, "Files the agent returns (default: largest --k)");
    run->add_option("--max-steps", run_config.max_steps, "Model turns in the agent tool loop");

    std::string report_a, report_b, metric = "ap", test;
    std::size_t compare_k = 1;
    auto* compare = app.add_subcommand("compare", "Significance test between two reports");
    compare->add_option("report_a", report_a, "report.json or run directory")->required();
    compare->add_option("report_b", report_b, "report.json or run directory")->required();
    compare->add_option("--metric", metric, "ap | hit");
    compare->add_option("--k", compare_k, "Cutoff");
    compare->add_option("--test", test, "mann-whitney | mcnemar (must match the metric)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfigError;
    }

    if (*index) {
        IndexOptions options;
        options.exclude_tests = !keep_tests;
        return cmd_index(repo, out_index, options, std::cout, std::cerr);
    }
    if (*search) return cmd_search(index_file, query, search_k, std::cout, std::cerr);
    if (*run) {
        try {
            run_config.k_values = parse_k_list(k_text);
        } catch (const bugloc::ConfigError& e) {
            std::cerr << "config error: " << e.what() << '\n';
            return kExitConfigError;
        }
        return cmd_run(run_config, std::cout, std::cerr);
    }
    if (*compare) {
        return cmd_compare(report_a, report_b, metric, compare_k,
                           test.empty() ? std::nullopt : std::optional<std::string>(test), std::cout, std::cerr);
    }
    return kExitConfigError;
}
