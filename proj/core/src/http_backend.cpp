#include "bugloc/errors.hpp"
#include "bugloc/llm.hpp"

#include <httplib.h>

#include <regex>

namespace bugloc {

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
    static const std::regex url_re(R"(^(https?)://([^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(config_.url, m, url_re)) throw ConfigError("invalid backend URL: " + config_.url);
    if (m[1] == "https") throw ConfigError("https endpoints are not supported; use a plain http URL");
    scheme_host_port_ = m[1].str() + "://" + m[2].str();
    path_ = m[3].matched ? m[3].str() : "/v1/chat/completions";
}

nlohmann::json HttpBackend::request_body(const ChatRequest& request) const {
    nlohmann::json messages = nlohmann::json::array();
    for (const auto& msg : request.messages) {
        // Tool results travel as user turns; plain chat servers reject role "tool"
        // without a matching function-call id.
        const auto role = msg.role == Role::tool ? Role::user : msg.role;
        messages.push_back({{"role", to_string(role)}, {"content", msg.content}});
    }
    nlohmann::json body = {{"messages", messages},
                           {"temperature", request.temperature},
                           {"seed", request.seed},
                           {"stream", false}};
    if (!config_.model.empty()) body["model"] = config_.model;
    return body;
}

ChatResponse HttpBackend::parse_response_body(std::string_view body) {
    const auto doc = nlohmann::json::parse(body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) return {"", FinishReason::error, 0, "response is not JSON"};
    if (!doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty()) {
        return {"", FinishReason::error, 0, "response has no choices"};
    }
    const auto& choice = doc["choices"][0];
    ChatResponse response;
    if (choice.contains("message") && choice["message"].contains("content") &&
        choice["message"]["content"].is_string()) {
        response.content = choice["message"]["content"].get<std::string>();
    } else if (choice.contains("text") && choice["text"].is_string()) {
        response.content = choice["text"].get<std::string>();
    }
    const auto finish = choice.value("finish_reason", nlohmann::json("stop"));
    response.finish_reason =
        (finish.is_string() && finish.get<std::string>() == "length") ? FinishReason::length : FinishReason::stop;
    return response;
}

ChatResponse HttpBackend::send(const ChatRequest& request, std::stop_token stop) {
    httplib::Client client(scheme_host_port_);
    const auto seconds = static_cast<time_t>(request.timeout.count());
    client.set_connection_timeout(std::min<time_t>(seconds, 30), 0);
    client.set_read_timeout(seconds, 0);
    client.set_write_timeout(seconds, 0);
    httplib::Headers headers;
    for (const auto& [k, v] : config_.headers) headers.emplace(k, v);
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    std::stop_callback cancel(stop, [&client] { client.stop(); });
    const auto body = request_body(request).dump();
    auto result = client.Post(path_, headers, body, "application/json");
    if (stop.stop_requested()) return {"", FinishReason::timeout, 0, "cancelled"};
    if (!result) {
        const auto err = result.error();
        if (err == httplib::Error::Read || err == httplib::Error::Write) {
            return {"", FinishReason::timeout, 0, httplib::to_string(err)};
        }
        throw BackendUnreachable("backend " + config_.url + ": " + httplib::to_string(err));
    }
    if (result->status != 200) {
        return {"", FinishReason::error, 0, "HTTP " + std::to_string(result->status) + ": " + result->body};
    }
    return parse_response_body(result->body);
}

}  // namespace bugloc
