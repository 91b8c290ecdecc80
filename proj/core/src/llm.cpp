#include "bugloc/llm.hpp"

#include "bugloc/errors.hpp"

#include <condition_variable>
#include <cstdlib>
#include <fstream>
#include <future>
#include <stdexcept>
#include <thread>

namespace bugloc {

std::string_view to_string(Role role) {
    switch (role) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
        case Role::tool: return "tool";
    }
    return "user";
}

std::string_view to_string(FinishReason reason) {
    switch (reason) {
        case FinishReason::stop: return "stop";
        case FinishReason::length: return "length";
        case FinishReason::timeout: return "timeout";
        case FinishReason::error: return "error";
    }
    return "error";
}

std::size_t approx_tokens(std::string_view text) { return (text.size() + 3) / 4; }

std::size_t approx_tokens(const std::vector<ChatMessage>& messages) {
    std::size_t total = 0;
    for (const auto& m : messages) total += approx_tokens(m.content) + 4;  // role framing
    return total;
}

std::vector<ChatMessage> fit_context(std::vector<ChatMessage> messages, std::size_t max_tokens) {
    while (approx_tokens(messages) > max_tokens) {
        // The first non-system message states the task and is kept with the latest one.
        auto victim = messages.end();
        bool opening_seen = false;
        for (auto it = messages.begin(); it + 1 < messages.end(); ++it) {
            if (it->role == Role::system) continue;
            if (!opening_seen) {
                opening_seen = true;
                continue;
            }
            victim = it;
            break;
        }
        if (victim == messages.end()) break;
        messages.erase(victim);
    }
    return messages;
}

ChatResponse complete(const ChatRequest& request, Backend& backend) {
    if (request.messages.empty()) throw std::invalid_argument("complete: request has no messages");
    const auto first = request.messages.front().role;
    if (first != Role::system && first != Role::user)
        throw std::invalid_argument("complete: first message must be system or user");

    ChatRequest fitted = request;
    fitted.messages = fit_context(request.messages, request.max_context_tokens);

    const auto started = std::chrono::steady_clock::now();
    auto elapsed_ms = [&] {
        return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                                     started)
            .count();
    };

    std::promise<ChatResponse> promise;
    auto future = promise.get_future();
    std::jthread worker([&backend, &fitted, p = std::move(promise)](std::stop_token stop) mutable {
        try {
            p.set_value(backend.send(fitted, stop));
        } catch (...) {
            p.set_exception(std::current_exception());
        }
    });

    if (future.wait_for(request.timeout) != std::future_status::ready) {
        worker.request_stop();
        worker.join();
        return {"", FinishReason::timeout, elapsed_ms(), "timed out after " +
                                                             std::to_string(request.timeout.count()) + "s"};
    }
    worker.join();
    ChatResponse response;
    try {
        response = future.get();
    } catch (const ScriptExhausted& e) {
        return {"", FinishReason::error, elapsed_ms(), e.what()};
    }
    response.latency_ms = elapsed_ms();
    if (response.finish_reason == FinishReason::timeout) response.content.clear();
    return response;
}

ScriptedBackend::ScriptedBackend(std::vector<ScriptEntry> script) : script_(std::move(script)) {
    if (script_.empty()) throw std::invalid_argument("scripted backend needs at least one entry");
}

ChatResponse ScriptedBackend::send(const ChatRequest& request, std::stop_token stop) {
    ScriptEntry entry;
    {
        std::lock_guard lock(mutex_);
        seen_.push_back(request);
        if (cursor_ >= script_.size()) throw ScriptExhausted();
        entry = script_[cursor_++];
    }
    if (entry.match) {
        bool found = false;
        for (const auto& m : request.messages) found = found || m.content.find(*entry.match) != std::string::npos;
        if (!found) throw MatcherViolation("scripted reply expected the prompt to contain '" + *entry.match + "'");
    }
    if (entry.delay.count() > 0) {
        std::mutex m;
        std::condition_variable_any cv;
        std::unique_lock lock(m);
        cv.wait_for(lock, stop, entry.delay, [] { return false; });
        if (stop.stop_requested()) return {"", FinishReason::timeout, 0, "cancelled"};
    }
    return {entry.reply, FinishReason::stop, 0, {}};
}

std::size_t ScriptedBackend::consumed() const {
    std::lock_guard lock(mutex_);
    return cursor_;
}

std::size_t ScriptedBackend::remaining() const {
    std::lock_guard lock(mutex_);
    return script_.size() - cursor_;
}

std::vector<ChatRequest> ScriptedBackend::requests() const {
    std::lock_guard lock(mutex_);
    return seen_;
}

std::vector<ScriptEntry> script_from_json(const nlohmann::json& entries) {
    if (!entries.is_array()) throw FormatError("script must be a JSON array");
    std::vector<ScriptEntry> script;
    for (const auto& e : entries) {
        ScriptEntry entry;
        if (e.is_string()) {
            entry.reply = e.get<std::string>();
        } else if (e.is_object()) {
            if (!e.contains("reply")) throw FormatError("script entry without 'reply'");
            const auto& reply = e.at("reply");
            // Object replies are stored as their compact JSON text.
            entry.reply = reply.is_string() ? reply.get<std::string>() : reply.dump();
            if (e.contains("match") && !e.at("match").is_null()) entry.match = e.at("match").get<std::string>();
            entry.delay = std::chrono::milliseconds(e.value("delay_ms", 0));
        } else {
            throw FormatError("script entry must be a string or an object");
        }
        script.push_back(std::move(entry));
    }
    return script;
}

ScriptBook load_script_book(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read script file " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("script file " + path.string() + ": " + e.what());
    }
    ScriptBook book;
    if (doc.is_array()) {
        book["*"] = script_from_json(doc);
    } else if (doc.is_object()) {
        for (const auto& [task, entries] : doc.items()) book[task] = script_from_json(entries);
    } else {
        throw FormatError("script file must hold an array or an object of arrays");
    }
    return book;
}

std::optional<HttpBackendConfig> HttpBackendConfig::from_env() {
    const char* url = std::getenv("BUGLOC_BACKEND_URL");
    if (!url || !*url) return std::nullopt;
    HttpBackendConfig config;
    config.url = url;
    if (const char* model = std::getenv("BUGLOC_MODEL")) config.model = model;
    if (const char* key = std::getenv("BUGLOC_API_KEY")) config.api_key = key;
    return config;
}

}  // namespace bugloc
