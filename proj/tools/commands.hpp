#pragma once

#include "bugloc/agent.hpp"
#include "bugloc/bm25.hpp"
#include "bugloc/evaluation.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace bugloc::cli {

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitConfigError = 2;

struct IndexOptions {
    std::set<std::string> extensions = default_extensions();
    bool exclude_tests = true;
    TokenizerConfig tokenizer;
    Bm25Params params;
};

int cmd_index(const std::filesystem::path& repo_root, const std::filesystem::path& out_index,
              const IndexOptions& options, std::ostream& out, std::ostream& err);

int cmd_search(const std::filesystem::path& index_file, const std::string& query, std::size_t k,
               std::ostream& out, std::ostream& err);

enum class PipelineKind { baseline, group, agent };

struct RunMode {
    PipelineKind kind = PipelineKind::baseline;
    GroupId group = GroupId::G1_full;
    ExperimentMode agent_mode = ExperimentMode::best_at_top;

    /// "baseline", "group:G1".."group:G5", "agent:all_at_top", "agent:best_at_top".
    static RunMode parse(std::string_view text);
    [[nodiscard]] std::string name() const;
};

struct BackendOptions {
    std::string url;
    std::string model;
    std::string api_key;
    int timeout_seconds = 600;
    std::filesystem::path script_file;  // scripted replies instead of a live endpoint
};

struct RunConfig {
    std::filesystem::path tasks_file;
    std::filesystem::path repos_dir;
    std::string mode = "baseline";
    std::vector<std::size_t> k_values = kDefaultKValues;
    int runs = 3;
    BackendOptions backend;
    std::filesystem::path output_dir;
    std::filesystem::path extractions_cache;
    int parallelism = 1;
    std::int64_t seed = kDefaultSeed;
    std::size_t answer_k = 0;  // 0: the largest of k_values
    std::size_t max_steps = 20;
    IndexOptions index;
};

/// Throws ConfigError describing the first invalid setting.
void validate(const RunConfig& config);

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err);

int cmd_compare(const std::filesystem::path& report_a, const std::filesystem::path& report_b,
                const std::string& metric, std::size_t k, const std::optional<std::string>& test,
                std::ostream& out, std::ostream& err);

/// Loads report.json, or <dir>/report.json when given a run directory.
EvalReport load_report(const std::filesystem::path& path);

}  // namespace bugloc::cli
