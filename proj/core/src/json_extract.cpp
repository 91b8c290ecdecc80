#include "bugloc/json_extract.hpp"

namespace bugloc {

namespace {

// End offset (exclusive) of the balanced object starting at `start`, or npos.
std::size_t balanced_end(std::string_view raw, std::size_t start) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < raw.size(); ++i) {
        const char c = raw[i];
        if (in_string) {
            if (escaped) {
                escaped = false;
            } else if (c == '\\') {
                escaped = true;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == '{') {
            ++depth;
        } else if (c == '}') {
            if (--depth == 0) return i + 1;
        }
    }
    return std::string_view::npos;
}

}  // namespace

std::optional<nlohmann::json> extract_first_json_object(std::string_view raw) {
    for (auto start = raw.find('{'); start != std::string_view::npos; start = raw.find('{', start + 1)) {
        const auto end = balanced_end(raw, start);
        if (end == std::string_view::npos) continue;
        auto parsed = nlohmann::json::parse(raw.substr(start, end - start), nullptr, false);
        if (!parsed.is_discarded() && parsed.is_object()) return parsed;
    }
    return std::nullopt;
}

}  // namespace bugloc
