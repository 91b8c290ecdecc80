#pragma once

#include "bugloc/bm25.hpp"
#include "bugloc/corpus.hpp"
#include "bugloc/llm.hpp"
#include "bugloc/reformulation.hpp"
#include "bugloc/task.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <chrono>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace bugloc {

enum class ToolName { extract_relevant, bm25_topk, view_file, view_readme, final_answer };

std::string_view to_string(ToolName tool);
std::optional<ToolName> tool_from_string(std::string_view name);

/// k values the retrieval tool accepts.
inline constexpr std::array<std::size_t, 3> kToolTopK = {10, 20, 30};

struct ToolCall {
    ToolName tool = ToolName::final_answer;
    nlohmann::json args = nlohmann::json::object();
};

enum class ExperimentMode { all_at_top, best_at_top };

std::string_view to_string(ExperimentMode mode);
ExperimentMode mode_from_string(std::string_view name);

struct AgentConfig {
    ExperimentMode mode = ExperimentMode::best_at_top;
    std::size_t answer_k = 10;             // 1, 5 or 10
    std::size_t max_steps = 20;            // model turns in the tool loop
    int max_corrections = 3;
    std::size_t view_budget_tokens = kDefaultViewBudget;
    std::size_t duplicate_view_limit = 5;  // views served per path
    std::size_t seed_k = 10;               // k of the harness-issued first retrieval
    bool self_evaluation = true;
    std::chrono::seconds timeout = kDefaultTimeout;
    std::size_t max_context_tokens = kDefaultContextTokens;
    std::int64_t seed = kDefaultSeed;

    /// G1 for all-at-top, G5 for best-at-top.
    [[nodiscard]] GroupId seed_group() const {
        return mode == ExperimentMode::all_at_top ? GroupId::G1_full : GroupId::G5_exp_id_snippets;
    }
};

enum class ValidationKind { json, tool, path };

std::string_view to_string(ValidationKind kind);

struct ValidationError {
    ValidationKind kind = ValidationKind::json;
    std::string detail;
    std::string offending_path;  // set for path errors
};

struct Validated {
    ToolCall call;
};

using ValidationOutcome = std::variant<Validated, ValidationError>;

/// Error taxonomy reported per task.
struct ErrorCounters {
    std::size_t aborted_file_views = 0;
    std::size_t timeouts = 0;
    std::size_t aborted_invalid_json = 0;
    std::size_t duplicate_view_warnings = 0;

    bool operator==(const ErrorCounters&) const = default;
};

struct ToolUsage {
    std::size_t extract_relevant = 0;
    std::size_t bm25_topk = 0;
    std::size_t view_file = 0;
    std::size_t view_file_unique = 0;
    std::size_t view_readme = 0;
    std::size_t final_answer = 0;
};

struct AgentEvent {
    std::size_t step = 0;
    std::string phase;   // "extraction", "tool_loop"
    std::string origin;  // "model" or "harness"
    std::string prompt_sent;
    std::string raw_reply;
    std::string finish_reason;
    std::optional<ToolCall> parsed_tool_call;
    std::optional<nlohmann::json> tool_result;
    std::string validation_outcome;  // "ok" or "<kind>: <detail>"
    int correction_attempt = 0;
};

enum class AgentOutcome { completed, step_budget_exhausted, timeout, aborted_invalid_json, backend_error };

std::string_view to_string(AgentOutcome outcome);

struct SelfEvaluationRecord {
    bool performed = false;
    std::string prompt;
    std::string raw_reply;
    std::string result;  // "revised", "unchanged", "kept_original", "timeout"
};

struct AgentTranscript {
    std::string task_id;
    ExperimentMode mode = ExperimentMode::best_at_top;
    std::size_t answer_k = 10;
    std::string seeded_query;
    std::vector<AgentEvent> events;
    std::vector<std::string> final_ranking;
    std::vector<std::string> self_eval_ranking;
    SelfEvaluationRecord self_evaluation;
    ErrorCounters error_counters;
    ToolUsage tool_usage;
    AgentOutcome outcome = AgentOutcome::completed;
    std::vector<std::string> notes;

    [[nodiscard]] bool aborted() const { return outcome == AgentOutcome::aborted_invalid_json; }
    [[nodiscard]] int max_correction_attempt() const;
};

/// One JSON object per line: header, events, self_evaluation, summary.
std::string transcript_to_jsonl(const AgentTranscript& transcript);
nlohmann::json event_to_json(const AgentEvent& event);

/// Final ranked answer. Paths are unique, exist in the manifest, length <= k.
struct RankedFiles {
    std::vector<std::string> files;
    std::size_t k = 0;
};

struct AgentResult {
    RankedFiles ranking;
    AgentTranscript transcript;
};

/// Repository view shared read-only by concurrent agent runs.
struct RepositoryContext {
    const FileManifest& manifest;
    const Bm25Index& index;

    /// A path exists when it is in the manifest and on disk under the root.
    [[nodiscard]] bool exists(std::string_view relative_path) const;
};

/// Mutable per-run state. Exposed so that tools and validation can be tested
/// in isolation.
struct AgentState {
    AgentState(const BugTask& task, const AgentConfig& config, const RepositoryContext& repo, Backend& backend);

    const BugTask& task;
    const AgentConfig& config;
    const RepositoryContext& repo;
    Backend& backend;

    std::vector<ChatMessage> messages;
    std::optional<ExtractedFields> fields;
    std::string seeded_query;
    std::optional<RankedResults> last_bm25;
    std::map<std::string, std::size_t> view_counts;
    std::vector<std::string> viewed;  // unique, first-view order
    AgentTranscript transcript;
    std::size_t step = 0;

    [[nodiscard]] ChatRequest request(std::vector<ChatMessage> msgs) const;
};

struct ToolResult {
    nlohmann::json data;
    std::string text;  // rendered for the conversation
    bool blocked = false;
};

/// Checks that `raw` holds a tool call: parseable JSON, a known tool with valid
/// arguments, and existing repository paths. Never throws.
ValidationOutcome validate_output(std::string_view raw, const AgentState& state);

/// Executes a validated call. Throws std::invalid_argument for a call that
/// does not satisfy the tool invariants.
ToolResult dispatch_tool(const ToolCall& call, AgentState& state);

/// Correction message naming the error kind, its detail and any offending path.
std::string correction_prompt(const ValidationError& error, int attempt, int max_attempts = 3);

/// Appends a correction message to `conversation` and asks the model again.
/// `attempt` must be in [1, max_attempts]; otherwise std::out_of_range.
ChatResponse self_correct(const ValidationError& error, int attempt, Backend& backend,
                          std::vector<ChatMessage>& conversation, const ChatRequest& params,
                          int max_attempts = 3);

/// Fresh-context review of the final ranking. The reply must be a permutation
/// of `ranking`; otherwise the original order is kept and the deviation noted.
RankedFiles self_evaluate(AgentState& state, const RankedFiles& ranking);

/// Runs the full localization workflow for one task.
AgentResult run_agent(const BugTask& task, const AgentConfig& config, Backend& backend,
                      const RepositoryContext& repo);

/// System prompt of the tool loop.
std::string agent_system_prompt(const AgentConfig& config);

}  // namespace bugloc
