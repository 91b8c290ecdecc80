#include "bugloc/agent.hpp"

#include "bugloc/errors.hpp"
#include "bugloc/json_extract.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <stdexcept>

namespace bugloc {

namespace fs = std::filesystem;

namespace {

ValidationError json_error(std::string detail) { return {ValidationKind::json, std::move(detail), {}}; }
ValidationError tool_error(std::string detail) { return {ValidationKind::tool, std::move(detail), {}}; }
ValidationError path_error(std::string detail, std::string path) {
    return {ValidationKind::path, std::move(detail), std::move(path)};
}

std::string describe(const ValidationError& e) { return std::string(to_string(e.kind)) + ": " + e.detail; }

const nlohmann::json* member(const nlohmann::json& obj, std::initializer_list<const char*> keys) {
    for (const char* k : keys) {
        auto it = obj.find(k);
        if (it != obj.end()) return &*it;
    }
    return nullptr;
}

std::string render_bm25(const RankedResults& results) {
    if (results.entries.empty()) return "(no matching files)";
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(4);
    for (std::size_t i = 0; i < results.entries.size(); ++i) {
        out << i + 1 << ". " << results.entries[i].path << " (score " << results.entries[i].score << ")\n";
    }
    return out.str();
}

nlohmann::json bm25_json(const RankedResults& results) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& e : results.entries) list.push_back({{"path", e.path}, {"score", e.score}});
    return {{"k", results.k_requested}, {"results", list}};
}

// Extracted fields restricted to the members of `group`, keyed as in the schema.
nlohmann::json visible_fields(const ExtractedFields& fields, GroupId group) {
    const nlohmann::json all = fields;
    nlohmann::json out = nlohmann::json::object();
    for (const auto f : field_group(group).members) {
        const auto key = std::string(json_key(f));
        out[key] = all.at(key);
    }
    return out;
}

std::optional<fs::path> find_readme(const fs::path& root) {
    std::vector<fs::path> candidates;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(root, ec)) {
        if (entry.is_symlink(ec) || !entry.is_regular_file(ec)) continue;
        auto stem = entry.path().stem().string();
        std::transform(stem.begin(), stem.end(), stem.begin(), [](unsigned char c) { return std::tolower(c); });
        if (stem == "readme") candidates.push_back(entry.path());
    }
    if (candidates.empty()) return std::nullopt;
    std::sort(candidates.begin(), candidates.end());
    return candidates.front();
}

std::vector<std::string> best_effort(const AgentState& state) {
    std::vector<std::string> out;
    if (!state.last_bm25) return out;
    for (const auto& e : state.last_bm25->entries) {
        if (out.size() == state.config.answer_k) break;
        out.push_back(e.path);
    }
    return out;
}

std::optional<std::vector<std::string>> files_from_reply(std::string_view raw) {
    auto obj = extract_first_json_object(raw);
    if (!obj) return std::nullopt;
    const nlohmann::json* files = member(*obj, {"files", "ranking"});
    if (!files) {
        if (const auto* args = member(*obj, {"args", "arguments", "parameters"}); args && args->is_object())
            files = member(*args, {"files", "ranking"});
    }
    if (!files || !files->is_array()) return std::nullopt;
    std::vector<std::string> out;
    for (const auto& f : *files) {
        if (!f.is_string()) return std::nullopt;
        out.push_back(normalize_relative_path(f.get<std::string>()));
    }
    return out;
}

}  // namespace

std::string_view to_string(ToolName tool) {
    switch (tool) {
        case ToolName::extract_relevant: return "extract_relevant";
        case ToolName::bm25_topk: return "bm25_topk";
        case ToolName::view_file: return "view_file";
        case ToolName::view_readme: return "view_readme";
        case ToolName::final_answer: return "final_answer";
    }
    return "final_answer";
}

std::optional<ToolName> tool_from_string(std::string_view name) {
    for (auto t : {ToolName::extract_relevant, ToolName::bm25_topk, ToolName::view_file, ToolName::view_readme,
                   ToolName::final_answer}) {
        if (name == to_string(t)) return t;
    }
    return std::nullopt;
}

std::string_view to_string(ExperimentMode mode) {
    return mode == ExperimentMode::all_at_top ? "all_at_top" : "best_at_top";
}

ExperimentMode mode_from_string(std::string_view name) {
    if (name == "all_at_top" || name == "all-at-top") return ExperimentMode::all_at_top;
    if (name == "best_at_top" || name == "best-at-top") return ExperimentMode::best_at_top;
    throw ConfigError("unknown agent mode: " + std::string(name));
}

std::string_view to_string(ValidationKind kind) {
    switch (kind) {
        case ValidationKind::json: return "json";
        case ValidationKind::tool: return "tool";
        case ValidationKind::path: return "path";
    }
    return "json";
}

std::string_view to_string(AgentOutcome outcome) {
    switch (outcome) {
        case AgentOutcome::completed: return "completed";
        case AgentOutcome::step_budget_exhausted: return "step_budget_exhausted";
        case AgentOutcome::timeout: return "timeout";
        case AgentOutcome::aborted_invalid_json: return "aborted_invalid_json";
        case AgentOutcome::backend_error: return "backend_error";
    }
    return "completed";
}

int AgentTranscript::max_correction_attempt() const {
    int m = 0;
    for (const auto& e : events) m = std::max(m, e.correction_attempt);
    return m;
}

bool RepositoryContext::exists(std::string_view relative_path) const {
    if (!manifest.contains(relative_path)) return false;
    std::error_code ec;
    return fs::is_regular_file(manifest.root / fs::path(std::string(relative_path)), ec);
}

AgentState::AgentState(const BugTask& t, const AgentConfig& c, const RepositoryContext& r, Backend& b)
    : task(t), config(c), repo(r), backend(b) {
    transcript.task_id = t.task_id;
    transcript.mode = c.mode;
    transcript.answer_k = c.answer_k;
}

ChatRequest AgentState::request(std::vector<ChatMessage> msgs) const {
    ChatRequest req;
    req.messages = std::move(msgs);
    req.temperature = 0.0;
    req.seed = config.seed;
    req.max_context_tokens = config.max_context_tokens;
    req.timeout = config.timeout;
    return req;
}

std::string agent_system_prompt(const AgentConfig& config) {
    std::ostringstream out;
    out << "You are a bug localization agent. Given a bug report and a repository, you find the source "
           "files that must be changed to fix the bug.\n\n"
           "Every reply must contain exactly one JSON object of the form "
           "{\"tool\": <name>, \"args\": {...}}. Available tools:\n"
           "- extract_relevant: {} returns the information extracted from the bug report.\n"
           "- bm25_topk: {\"k\": 10 | 20 | 30, \"query\": optional text} returns the k best files of a "
           "lexical search. Without a query the extracted-information query is used.\n"
           "- view_file: {\"path\": \"relative/path\"} shows the first "
        << config.view_budget_tokens
        << " tokens of a file without license headers and imports. View each file at most once.\n"
           "- view_readme: {} shows the top-level README.\n"
           "- final_answer: {\"files\": [\"path\", ...]} ends the task with at most "
        << config.answer_k
        << " files ranked by their likelihood of containing the fix, most likely first.\n\n"
           "Use only paths that exist in the repository, relative to its root.";
    return out.str();
}

ValidationOutcome validate_output(std::string_view raw, const AgentState& state) {
    const auto obj = extract_first_json_object(raw);
    if (!obj) return json_error("no JSON object found in the reply");

    const auto* name = member(*obj, {"tool", "name", "action"});
    if (!name) {
        // A bare {"files": [...]} is read as a final answer.
        if (member(*obj, {"files"})) {
            return validate_output(nlohmann::json{{"tool", "final_answer"}, {"args", *obj}}.dump(), state);
        }
        return tool_error("missing \"tool\" field");
    }
    if (!name->is_string()) return tool_error("\"tool\" must be a string");
    const auto tool = tool_from_string(name->get<std::string>());
    if (!tool) return tool_error("unknown tool '" + name->get<std::string>() + "'");

    nlohmann::json args = nlohmann::json::object();
    if (const auto* a = member(*obj, {"args", "arguments", "parameters"})) {
        if (a->is_null()) {
            args = nlohmann::json::object();
        } else if (!a->is_object()) {
            return tool_error("\"args\" must be a JSON object");
        } else {
            args = *a;
        }
    }

    switch (*tool) {
        case ToolName::extract_relevant:
        case ToolName::view_readme:
            break;
        case ToolName::bm25_topk: {
            if (!args.contains("k")) return tool_error("bm25_topk requires \"k\" (10, 20 or 30)");
            const auto& k = args["k"];
            const bool allowed = k.is_number_integer() &&
                                 std::find(kToolTopK.begin(), kToolTopK.end(), k.get<std::int64_t>()) !=
                                     kToolTopK.end();
            if (!allowed) return tool_error("bm25_topk k must be one of 10, 20, 30, got " + k.dump());
            if (args.contains("query") && !args["query"].is_string() && !args["query"].is_null())
                return tool_error("bm25_topk query must be a string");
            break;
        }
        case ToolName::view_file: {
            if (!args.contains("path") || !args["path"].is_string())
                return tool_error("view_file requires a string \"path\"");
            const auto raw_path = args["path"].get<std::string>();
            const auto rel = normalize_relative_path(raw_path);
            if (rel.empty()) return path_error("'" + raw_path + "' is not a repository-relative path", raw_path);
            if (!state.repo.exists(rel)) return path_error("file '" + rel + "' does not exist in the repository", rel);
            args["path"] = rel;
            break;
        }
        case ToolName::final_answer: {
            if (!args.contains("files") || !args["files"].is_array())
                return tool_error("final_answer requires a \"files\" array");
            if (args["files"].empty()) return tool_error("final_answer \"files\" must not be empty");
            nlohmann::json files = nlohmann::json::array();
            for (const auto& f : args["files"]) {
                if (!f.is_string()) return tool_error("final_answer \"files\" must contain strings");
                const auto raw_path = f.get<std::string>();
                const auto rel = normalize_relative_path(raw_path);
                if (rel.empty()) return path_error("'" + raw_path + "' is not a repository-relative path", raw_path);
                if (!state.repo.exists(rel))
                    return path_error("file '" + rel + "' does not exist in the repository", rel);
                files.push_back(rel);
            }
            args["files"] = files;
            break;
        }
    }
    return Validated{ToolCall{*tool, args}};
}

namespace {

// One extraction exchange with bounded corrections. Returns nullopt when the
// task must stop; the outcome is already recorded in that case.
std::optional<ExtractedFields> run_extraction(AgentState& state) {
    const auto prompt = extraction_prompt(state.task.bug_description);
    std::vector<ChatMessage> conversation = {{Role::system, prompt.system}, {Role::user, prompt.user}};
    auto& transcript = state.transcript;
    ++transcript.tool_usage.extract_relevant;

    std::string last_prompt = prompt.user;
    ChatResponse response = complete(state.request(conversation), state.backend);
    for (int attempt = 0;; ++attempt) {
        AgentEvent event;
        event.step = state.step;
        event.phase = "extraction";
        event.origin = "model";
        event.prompt_sent = last_prompt;
        event.raw_reply = response.content;
        event.finish_reason = std::string(to_string(response.finish_reason));
        event.parsed_tool_call = ToolCall{ToolName::extract_relevant, nlohmann::json::object()};
        event.correction_attempt = attempt;

        if (response.finish_reason == FinishReason::timeout) {
            event.validation_outcome = "timeout";
            transcript.events.push_back(std::move(event));
            ++transcript.error_counters.timeouts;
            transcript.outcome = AgentOutcome::timeout;
            return std::nullopt;
        }
        if (response.finish_reason == FinishReason::error) {
            event.validation_outcome = "backend error: " + response.error;
            transcript.events.push_back(std::move(event));
            transcript.outcome = AgentOutcome::backend_error;
            transcript.notes.push_back("extraction failed: " + response.error);
            return std::nullopt;
        }

        std::optional<ValidationError> error;
        ExtractedFields fields;
        try {
            fields = parse_extraction(response.content);
        } catch (const FormatError& e) {
            error = json_error(e.what());
        }
        if (!error) {
            event.validation_outcome = "ok";
            event.tool_result = nlohmann::json(fields);
            transcript.events.push_back(std::move(event));
            return fields;
        }
        event.validation_outcome = describe(*error);
        transcript.events.push_back(std::move(event));
        if (attempt >= state.config.max_corrections) {
            ++transcript.error_counters.aborted_invalid_json;
            transcript.outcome = AgentOutcome::aborted_invalid_json;
            return std::nullopt;
        }
        conversation.push_back({Role::assistant, response.content});
        last_prompt = correction_prompt(*error, attempt + 1, state.config.max_corrections);
        response = self_correct(*error, attempt + 1, state.backend, conversation,
                                state.request({}), state.config.max_corrections);
    }
}

}  // namespace

ToolResult dispatch_tool(const ToolCall& call, AgentState& state) {
    auto& usage = state.transcript.tool_usage;
    auto& counters = state.transcript.error_counters;
    ToolResult result;
    switch (call.tool) {
        case ToolName::extract_relevant: {
            if (!state.fields) {
                auto fields = run_extraction(state);
                if (!fields) {
                    result.text = "Extraction failed.";
                    result.data = nullptr;
                    return result;
                }
                state.fields = std::move(*fields);
            } else {
                ++usage.extract_relevant;
            }
            const auto visible = visible_fields(*state.fields, state.config.seed_group());
            result.data = visible;
            result.text = "Extracted information:\n" + visible.dump(2);
            return result;
        }
        case ToolName::bm25_topk: {
            const auto k = call.args.value("k", std::int64_t{0});
            if (std::find(kToolTopK.begin(), kToolTopK.end(), k) == kToolTopK.end())
                throw std::invalid_argument("bm25_topk: k must be one of 10, 20, 30");
            ++usage.bm25_topk;
            std::string query = state.seeded_query;
            if (call.args.contains("query") && call.args["query"].is_string() &&
                !call.args["query"].get<std::string>().empty())
                query = call.args["query"].get<std::string>();
            auto results = state.repo.index.search(query, static_cast<std::size_t>(k));
            result.data = bm25_json(results);
            result.data["query"] = query;
            result.text = "BM25 top-" + std::to_string(k) + " results:\n" + render_bm25(results);
            state.last_bm25 = std::move(results);
            return result;
        }
        case ToolName::view_file: {
            const auto rel = normalize_relative_path(call.args.value("path", std::string{}));
            const auto* file = state.repo.manifest.find(rel);
            if (!file) throw std::invalid_argument("view_file: unknown path " + rel);
            ++usage.view_file;
            const auto count = ++state.view_counts[rel];
            if (count == 1) {
                ++usage.view_file_unique;
                state.viewed.push_back(rel);
            }
            if (count > state.config.duplicate_view_limit) {
                ++counters.aborted_file_views;
                result.blocked = true;
                result.data = {{"path", rel}, {"blocked", true}, {"views", count}};
                result.text = "BlockedDuplicate: '" + rel + "' was already viewed " +
                              std::to_string(count - 1) + " times; further access is blocked.";
                return result;
            }
            const auto chunk = clean_view(*file, state.config.view_budget_tokens);
            std::string header = "File " + rel + (chunk.truncated ? " (truncated)" : "") + ":\n";
            if (count > 1) {
                ++counters.duplicate_view_warnings;
                header = "Warning: you already viewed '" + rel + "' " + std::to_string(count - 1) +
                         " time(s). Access is blocked after " + std::to_string(state.config.duplicate_view_limit) +
                         " views.\n" + header;
            }
            result.data = {{"path", rel},
                           {"token_count", chunk.token_count},
                           {"truncated", chunk.truncated},
                           {"views", count}};
            result.text = header + chunk.text;
            return result;
        }
        case ToolName::view_readme: {
            ++usage.view_readme;
            const auto readme = find_readme(state.repo.manifest.root);
            if (!readme) {
                result.data = {{"found", false}};
                result.text = "No README file found at the repository root.";
                return result;
            }
            std::ifstream in(*readme, std::ios::binary);
            const std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
            const auto chunk = chunk_head(content, state.config.view_budget_tokens, readme->filename().string());
            result.data = {{"found", true},
                           {"path", chunk.relative_path},
                           {"token_count", chunk.token_count},
                           {"truncated", chunk.truncated}};
            result.text = "README " + chunk.relative_path + ":\n" + chunk.text;
            return result;
        }
        case ToolName::final_answer: {
            ++usage.final_answer;
            result.data = call.args;
            result.text = "Final answer received.";
            return result;
        }
    }
    return result;
}

std::string correction_prompt(const ValidationError& error, int attempt, int max_attempts) {
    std::ostringstream out;
    out << "Your previous reply was invalid (" << to_string(error.kind) << " error): " << error.detail << ".\n";
    if (!error.offending_path.empty()) {
        out << "The path '" << error.offending_path
            << "' does not exist. Use a path exactly as listed in the search results.\n";
    }
    out << "Correction attempt " << attempt << " of " << max_attempts
        << ". Reply with exactly one JSON object of the form {\"tool\": <name>, \"args\": {...}}.";
    return out.str();
}

ChatResponse self_correct(const ValidationError& error, int attempt, Backend& backend,
                          std::vector<ChatMessage>& conversation, const ChatRequest& params, int max_attempts) {
    if (attempt < 1 || attempt > max_attempts)
        throw std::out_of_range("self_correct: attempt must be in [1, " + std::to_string(max_attempts) + "]");
    conversation.push_back({Role::user, correction_prompt(error, attempt, max_attempts)});
    ChatRequest req = params;
    req.messages = conversation;
    return complete(req, backend);
}

RankedFiles self_evaluate(AgentState& state, const RankedFiles& ranking) {
    auto& record = state.transcript.self_evaluation;
    record.performed = true;

    std::ostringstream user;
    user << "Repository: " << state.task.repo << "\n\nBug description:\n" << state.task.bug_description << "\n\n";
    user << "BM25 results:\n" << (state.last_bm25 ? render_bm25(*state.last_bm25) : "(none)\n") << "\n";
    user << "Files viewed:\n";
    if (state.viewed.empty()) user << "(none)\n";
    for (const auto& v : state.viewed) user << "- " << v << "\n";
    user << "\nFinal ranking:\n";
    for (std::size_t i = 0; i < ranking.files.size(); ++i) user << i + 1 << ". " << ranking.files[i] << "\n";
    user << "\nReview the final ranking against the information above. Return the same files in a revised "
            "order, most likely to contain the fix first, as one JSON object: {\"files\": [\"path\", ...]}.";
    record.prompt = user.str();

    const std::vector<ChatMessage> fresh = {
        {Role::system, "You review bug localization results. You answer with a single JSON object."},
        {Role::user, record.prompt}};
    const auto response = complete(state.request(fresh), state.backend);
    record.raw_reply = response.content;

    if (response.finish_reason == FinishReason::timeout) {
        ++state.transcript.error_counters.timeouts;
        record.result = "timeout";
        state.transcript.notes.push_back("self-evaluation timed out; original ranking kept");
        return ranking;
    }
    const auto revised = files_from_reply(response.content);
    const std::set<std::string> original(ranking.files.begin(), ranking.files.end());
    const bool permutation = revised && revised->size() == ranking.files.size() &&
                             std::set<std::string>(revised->begin(), revised->end()) == original;
    if (!permutation) {
        record.result = "kept_original";
        state.transcript.notes.push_back(
            response.finish_reason == FinishReason::error
                ? "self-evaluation failed (" + response.error + "); original ranking kept"
                : "self-evaluation reply is not a permutation of the final ranking; original ranking kept");
        return ranking;
    }
    record.result = (*revised == ranking.files) ? "unchanged" : "revised";
    return {*revised, ranking.k};
}

namespace {

enum class TurnStatus { ok, stop };

// Asks the model for its next tool call, with bounded self-correction.
// Returns the validated call, or nullopt when the turn produced none.
std::optional<ToolCall> model_turn(AgentState& state, TurnStatus& status) {
    auto& transcript = state.transcript;
    const auto params = state.request({});
    std::string last_prompt = state.messages.back().content;
    ChatResponse response = complete(state.request(state.messages), state.backend);

    for (int attempt = 0;; ++attempt) {
        AgentEvent event;
        event.step = state.step;
        event.phase = "tool_loop";
        event.origin = "model";
        event.prompt_sent = last_prompt;
        event.raw_reply = response.content;
        event.finish_reason = std::string(to_string(response.finish_reason));
        event.correction_attempt = attempt;

        if (response.finish_reason == FinishReason::timeout) {
            event.validation_outcome = "timeout";
            transcript.events.push_back(std::move(event));
            ++transcript.error_counters.timeouts;
            transcript.outcome = AgentOutcome::timeout;
            status = TurnStatus::stop;
            return std::nullopt;
        }
        if (response.finish_reason == FinishReason::error) {
            event.validation_outcome = "backend error: " + response.error;
            transcript.events.push_back(std::move(event));
            transcript.outcome = AgentOutcome::backend_error;
            transcript.notes.push_back("backend error: " + response.error);
            status = TurnStatus::stop;
            return std::nullopt;
        }

        auto outcome = validate_output(response.content, state);
        state.messages.push_back({Role::assistant, response.content});
        if (auto* ok = std::get_if<Validated>(&outcome)) {
            event.validation_outcome = "ok";
            event.parsed_tool_call = ok->call;
            transcript.events.push_back(std::move(event));
            status = TurnStatus::ok;
            return ok->call;
        }
        const auto error = std::get<ValidationError>(outcome);
        event.validation_outcome = describe(error);
        transcript.events.push_back(std::move(event));

        if (attempt >= state.config.max_corrections) {
            status = TurnStatus::ok;
            switch (error.kind) {
                case ValidationKind::json:
                    ++transcript.error_counters.aborted_invalid_json;
                    transcript.outcome = AgentOutcome::aborted_invalid_json;
                    status = TurnStatus::stop;
                    return std::nullopt;
                case ValidationKind::path: {
                    const auto obj = extract_first_json_object(response.content);
                    const bool was_view = obj && obj->value("tool", std::string{}) == "view_file";
                    if (was_view) {
                        ++transcript.error_counters.aborted_file_views;
                        ++transcript.tool_usage.view_file;
                        state.messages.push_back({Role::user, "The file view was aborted: " + error.detail +
                                                                  ". Continue with another tool call."});
                        return std::nullopt;
                    }
                    // A final answer that keeps naming missing files: keep the files that exist.
                    if (obj) {
                        const auto* args = member(*obj, {"args", "arguments", "parameters"});
                        const nlohmann::json* files = args && args->is_object() ? member(*args, {"files"})
                                                                                : member(*obj, {"files"});
                        if (files && files->is_array()) {
                            nlohmann::json kept = nlohmann::json::array();
                            for (const auto& f : *files) {
                                if (!f.is_string()) continue;
                                const auto rel = normalize_relative_path(f.get<std::string>());
                                if (!rel.empty() && state.repo.exists(rel)) kept.push_back(rel);
                            }
                            if (!kept.empty()) {
                                transcript.notes.push_back("final answer filtered to existing files after " +
                                                           std::to_string(attempt) + " corrections");
                                return ToolCall{ToolName::final_answer, {{"files", kept}}};
                            }
                        }
                    }
                    state.messages.push_back({Role::user, "The call was rejected: " + error.detail +
                                                              ". Continue with another tool call."});
                    return std::nullopt;
                }
                case ValidationKind::tool:
                    state.messages.push_back({Role::user, "The call was rejected: " + error.detail +
                                                              ". Continue with another tool call."});
                    return std::nullopt;
            }
        }
        last_prompt = correction_prompt(error, attempt + 1, state.config.max_corrections);
        response = self_correct(error, attempt + 1, state.backend, state.messages, params,
                                state.config.max_corrections);
    }
}

std::vector<std::string> finalize_files(const nlohmann::json& files, std::size_t k) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& f : files) {
        auto rel = f.get<std::string>();
        if (!seen.insert(rel).second) continue;
        out.push_back(std::move(rel));
        if (out.size() == k) break;
    }
    return out;
}

}  // namespace

AgentResult run_agent(const BugTask& task, const AgentConfig& config, Backend& backend,
                      const RepositoryContext& repo) {
    if (config.answer_k != 1 && config.answer_k != 5 && config.answer_k != 10)
        throw std::invalid_argument("answer_k must be 1, 5 or 10");
    if (std::find(kToolTopK.begin(), kToolTopK.end(), config.seed_k) == kToolTopK.end())
        throw std::invalid_argument("seed_k must be 10, 20 or 30");

    AgentState state(task, config, repo, backend);
    auto& transcript = state.transcript;
    AgentResult result;
    result.ranking.k = config.answer_k;

    auto finish = [&](std::vector<std::string> files) {
        transcript.final_ranking = files;
        transcript.self_eval_ranking = files;
        result.ranking.files = std::move(files);
        result.transcript = std::move(transcript);
        return std::move(result);
    };

    try {
        // Extraction, seeded by the harness.
        auto fields = run_extraction(state);
        if (!fields) {
            return finish(transcript.aborted() ? std::vector<std::string>{} : best_effort(state));
        }
        state.fields = std::move(*fields);

        // Space reduction with the mode's field group.
        state.seeded_query = build_query(*state.fields, field_group(config.seed_group()));
        if (state.seeded_query.empty()) {
            state.seeded_query = baseline_query(task.bug_description);
            transcript.notes.push_back("extracted fields are empty; seeded retrieval uses the bug description");
        }
        transcript.seeded_query = state.seeded_query;
        const ToolCall seed_call{ToolName::bm25_topk, {{"k", config.seed_k}}};
        const auto seed_result = dispatch_tool(seed_call, state);
        AgentEvent seed_event;
        seed_event.step = state.step;
        seed_event.phase = "tool_loop";
        seed_event.origin = "harness";
        seed_event.parsed_tool_call = seed_call;
        seed_event.tool_result = seed_result.data;
        seed_event.validation_outcome = "ok";
        transcript.events.push_back(std::move(seed_event));

        std::ostringstream opening;
        opening << "Repository: " << task.repo << "\n\nBug description:\n" << task.bug_description
                << "\n\nExtracted information:\n"
                << visible_fields(*state.fields, config.seed_group()).dump(2) << "\n\n"
                << seed_result.text << "\nFind the " << config.answer_k
                << " files most likely to contain the fix. Reply with your next tool call.";
        state.messages = {{Role::system, agent_system_prompt(config)}, {Role::user, opening.str()}};

        // Tool loop.
        std::optional<std::vector<std::string>> answer;
        for (state.step = 1; state.step <= config.max_steps; ++state.step) {
            TurnStatus status = TurnStatus::ok;
            auto call = model_turn(state, status);
            if (status == TurnStatus::stop) break;
            if (!call) continue;
            if (call->tool == ToolName::final_answer) {
                dispatch_tool(*call, state);
                answer = finalize_files(call->args.at("files"), config.answer_k);
                break;
            }
            const auto tool_result = dispatch_tool(*call, state);
            transcript.events.back().tool_result = tool_result.data;
            state.messages.push_back({Role::user, "Tool result (" + std::string(to_string(call->tool)) +
                                                      "):\n" + tool_result.text});
        }

        if (transcript.aborted()) return finish({});
        if (!answer) {
            if (transcript.outcome == AgentOutcome::completed) {
                transcript.outcome = AgentOutcome::step_budget_exhausted;
                transcript.notes.push_back("step budget of " + std::to_string(config.max_steps) +
                                           " exhausted; best-effort ranking from the last retrieval");
            }
            return finish(best_effort(state));
        }

        transcript.final_ranking = *answer;
        RankedFiles ranked{*answer, config.answer_k};
        if (config.self_evaluation) ranked = self_evaluate(state, ranked);
        transcript.self_eval_ranking = ranked.files;
        result.ranking = ranked;
        result.transcript = std::move(transcript);
        return result;
    } catch (const BackendUnreachable& e) {
        transcript.outcome = AgentOutcome::backend_error;
        transcript.notes.push_back(e.what());
        return finish(best_effort(state));
    }
}

}  // namespace bugloc
