#pragma once

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stop_token>
#include <string>
#include <string_view>
#include <vector>

namespace bugloc {

enum class Role { system, user, assistant, tool };

std::string_view to_string(Role role);

struct ChatMessage {
    Role role = Role::user;
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

inline constexpr std::int64_t kDefaultSeed = 42;
inline constexpr std::size_t kDefaultContextTokens = 16384;
inline constexpr std::chrono::seconds kDefaultTimeout{600};

/// Greedy decoding with a fixed seed, a 16k context and a ten-minute cap by default.
struct ChatRequest {
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    std::int64_t seed = kDefaultSeed;
    std::size_t max_context_tokens = kDefaultContextTokens;
    std::chrono::seconds timeout = kDefaultTimeout;
};

enum class FinishReason { stop, length, timeout, error };

std::string_view to_string(FinishReason reason);

struct ChatResponse {
    std::string content;  // always empty on timeout
    FinishReason finish_reason = FinishReason::stop;
    std::int64_t latency_ms = 0;
    std::string error;  // detail for finish_reason == error
};

/// A chat-completion provider. Implementations must return promptly once
/// `stop` is requested; complete() joins the worker before returning.
class Backend {
public:
    virtual ~Backend() = default;
    virtual ChatResponse send(const ChatRequest& request, std::stop_token stop) = 0;
    [[nodiscard]] virtual std::string name() const = 0;
};

/// Approximate token count used for context budgeting (about four characters per token).
std::size_t approx_tokens(std::string_view text);
std::size_t approx_tokens(const std::vector<ChatMessage>& messages);

/// Drops the oldest non-system messages until the estimate fits the budget.
/// System messages, the first user message and the most recent message are kept.
std::vector<ChatMessage> fit_context(std::vector<ChatMessage> messages, std::size_t max_tokens);

/// Sends a request and enforces its timeout. A timeout is reported as
/// finish_reason::timeout, never thrown. An exhausted script becomes an error
/// reply. BackendUnreachable and MatcherViolation propagate.
ChatResponse complete(const ChatRequest& request, Backend& backend);

struct ScriptEntry {
    std::optional<std::string> match;  // substring the request must contain
    std::string reply;
    std::chrono::milliseconds delay{0};
};

/// Replays canned replies in order. Thread-safe; each call consumes one entry.
class ScriptedBackend final : public Backend {
public:
    explicit ScriptedBackend(std::vector<ScriptEntry> script);

    ChatResponse send(const ChatRequest& request, std::stop_token stop) override;
    [[nodiscard]] std::string name() const override { return "scripted"; }

    [[nodiscard]] std::size_t consumed() const;
    [[nodiscard]] std::size_t remaining() const;
    /// Every request received so far, in order.
    [[nodiscard]] std::vector<ChatRequest> requests() const;

private:
    std::vector<ScriptEntry> script_;
    std::size_t cursor_ = 0;
    std::vector<ChatRequest> seen_;
    mutable std::mutex mutex_;
};

/// Scripts keyed by task id. The key "*" (or a bare JSON array in the file)
/// is the script used for tasks without their own entry.
using ScriptBook = std::map<std::string, std::vector<ScriptEntry>>;

std::vector<ScriptEntry> script_from_json(const nlohmann::json& entries);
ScriptBook load_script_book(const std::filesystem::path& path);

struct HttpBackendConfig {
    std::string url = "http://127.0.0.1:8000/v1/chat/completions";
    std::string model;
    std::string api_key;
    std::map<std::string, std::string> headers;

    /// Reads BUGLOC_BACKEND_URL, BUGLOC_MODEL and BUGLOC_API_KEY.
    static std::optional<HttpBackendConfig> from_env();
};

/// Chat-completions over plain HTTP: messages in, choices[0].message.content out.
class HttpBackend final : public Backend {
public:
    explicit HttpBackend(HttpBackendConfig config);

    ChatResponse send(const ChatRequest& request, std::stop_token stop) override;
    [[nodiscard]] std::string name() const override { return "http:" + config_.url; }

    /// The JSON body sent for a request.
    [[nodiscard]] nlohmann::json request_body(const ChatRequest& request) const;
    /// Interprets a chat-completions response body.
    static ChatResponse parse_response_body(std::string_view body);

private:
    HttpBackendConfig config_;
    std::string scheme_host_port_;
    std::string path_;
};

}  // namespace bugloc
