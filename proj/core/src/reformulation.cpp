#include "bugloc/reformulation.hpp"

#include "bugloc/errors.hpp"
#include "bugloc/json_extract.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace bugloc {

namespace {

std::string trim_copy(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n\f\v");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n\f\v");
    return std::string(s.substr(first, last - first + 1));
}

std::string without_quotes(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (const char c : s)
        if (c != '"') out += c;
    return out;
}

// Lenient key lookup: "path" and "paths" are both accepted.
const nlohmann::json* lookup(const nlohmann::json& object, std::initializer_list<const char*> keys) {
    for (const char* key : keys) {
        auto it = object.find(key);
        if (it != object.end()) return &*it;
    }
    return nullptr;
}

std::string as_text(const nlohmann::json* value, std::string_view key) {
    if (!value || value->is_null()) return {};
    if (value->is_string()) return trim_copy(value->get<std::string>());
    if (value->is_array()) {
        std::string joined;
        for (const auto& item : *value) {
            if (!item.is_string())
                throw FormatError("field '" + std::string(key) + "' holds a non-string list item");
            const auto text = trim_copy(item.get<std::string>());
            if (text.empty()) continue;
            if (!joined.empty()) joined += '\n';
            joined += text;
        }
        return joined;
    }
    throw FormatError("field '" + std::string(key) + "' must be a string");
}

std::vector<std::string> as_list(const nlohmann::json* value, std::string_view key) {
    std::vector<std::string> out;
    if (!value || value->is_null()) return out;
    if (value->is_string()) {
        auto text = trim_copy(value->get<std::string>());
        if (!text.empty()) out.push_back(std::move(text));
        return out;
    }
    if (!value->is_array()) throw FormatError("field '" + std::string(key) + "' must be a list of strings");
    for (const auto& item : *value) {
        if (!item.is_string())
            throw FormatError("field '" + std::string(key) + "' holds a non-string list item");
        auto text = trim_copy(item.get<std::string>());
        if (!text.empty()) out.push_back(std::move(text));
    }
    return out;
}

std::string render_list(const std::vector<std::string>& items) {
    if (items.empty()) return {};
    std::string out = "[";
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += items[i];
    }
    out += ']';
    return out;
}

std::string render(const ExtractedFields& f, Field field) {
    switch (field) {
        case Field::explanation: return f.explanation;
        case Field::paths: return render_list(f.paths);
        case Field::filenames: return render_list(f.filenames);
        case Field::identifiers: return render_list(f.identifiers);
        case Field::code_snippet: return f.code_snippet;
        case Field::stacktrace: return f.stacktrace;
        case Field::error_message: return f.error_message;
    }
    return {};
}

}  // namespace

void to_json(nlohmann::json& j, const ExtractedFields& f) {
    j = nlohmann::json{{"explanation", f.explanation},   {"path", f.paths},
                       {"filename", f.filenames},        {"identifiers", f.identifiers},
                       {"code_snippet", f.code_snippet}, {"stacktrace", f.stacktrace},
                       {"error_message", f.error_message}};
}

std::string_view json_key(Field field) {
    switch (field) {
        case Field::explanation: return "explanation";
        case Field::paths: return "path";
        case Field::filenames: return "filename";
        case Field::identifiers: return "identifiers";
        case Field::code_snippet: return "code_snippet";
        case Field::stacktrace: return "stacktrace";
        case Field::error_message: return "error_message";
    }
    return {};
}

std::string_view to_string(GroupId id) {
    switch (id) {
        case GroupId::G1_full: return "G1";
        case GroupId::G2_explanation: return "G2";
        case GroupId::G3_all_code: return "G3";
        case GroupId::G4_id_snippets: return "G4";
        case GroupId::G5_exp_id_snippets: return "G5";
    }
    return "G1";
}

GroupId group_from_string(std::string_view name) {
    std::string n(name);
    std::transform(n.begin(), n.end(), n.begin(), [](unsigned char c) { return std::toupper(c); });
    if (n == "G1" || n == "G1_FULL") return GroupId::G1_full;
    if (n == "G2" || n == "G2_EXPLANATION") return GroupId::G2_explanation;
    if (n == "G3" || n == "G3_ALL_CODE") return GroupId::G3_all_code;
    if (n == "G4" || n == "G4_ID_SNIPPETS") return GroupId::G4_id_snippets;
    if (n == "G5" || n == "G5_EXP_ID_SNIPPETS") return GroupId::G5_exp_id_snippets;
    throw std::invalid_argument("unknown field group: " + std::string(name));
}

FieldGroup field_group(GroupId id) {
    switch (id) {
        case GroupId::G1_full:
            return {id, {kSchemaOrder.begin(), kSchemaOrder.end()}};
        case GroupId::G2_explanation:
            return {id, {Field::explanation}};
        case GroupId::G3_all_code:
            return {id, {Field::identifiers, Field::code_snippet, Field::stacktrace, Field::error_message}};
        case GroupId::G4_id_snippets:
            return {id, {Field::identifiers, Field::code_snippet}};
        case GroupId::G5_exp_id_snippets:
            return {id, {Field::explanation, Field::identifiers, Field::code_snippet}};
    }
    return {id, {}};
}

const nlohmann::json& extraction_schema() {
    static const nlohmann::json schema = [] {
        const nlohmann::json text = {{"type", "string"}};
        const nlohmann::json list = {{"type", "array"}, {"items", {{"type", "string"}}}};
        nlohmann::json s = {
            {"type", "object"},
            {"additionalProperties", false},
            {"properties",
             {{"explanation", text},
              {"path", list},
              {"filename", list},
              {"identifiers", list},
              {"code_snippet", text},
              {"stacktrace", text},
              {"error_message", text}}},
            {"required",
             {"explanation", "path", "filename", "identifiers", "code_snippet", "stacktrace",
              "error_message"}},
        };
        return s;
    }();
    return schema;
}

ExtractionPrompt extraction_prompt(std::string_view bug_description) {
    if (trim_copy(bug_description).empty())
        throw std::invalid_argument("extraction_prompt: empty bug description");
    ExtractionPrompt prompt;
    prompt.system =
        "You analyse software bug reports. You answer with a single JSON object and nothing else.";
    prompt.user =
        "Read the bug report below and extract the information needed to find the source files "
        "that must change to fix it.\n\n"
        "Return exactly one JSON object with these keys:\n"
        "  \"explanation\": string, a short summary of the bug in your own words\n"
        "  \"path\": array of strings, file or directory paths mentioned in the report\n"
        "  \"filename\": array of strings, file names mentioned in the report\n"
        "  \"identifiers\": array of strings, class, method, function and variable names\n"
        "  \"code_snippet\": string, code quoted in the report\n"
        "  \"stacktrace\": string, the stack trace if one is present\n"
        "  \"error_message\": string, the error or exception message if one is present\n\n"
        "Use an empty string or an empty array when the report does not contain the "
        "information. Do not invent content.\n\n"
        "JSON schema:\n" +
        extraction_schema().dump(2) +
        "\n\nBug report:\n" + std::string(bug_description) + "\n";
    prompt.schema = extraction_schema();
    return prompt;
}

ExtractedFields fields_from_json(const nlohmann::json& object) {
    if (!object.is_object()) throw FormatError("extraction reply is not a JSON object");
    ExtractedFields f;
    f.explanation = as_text(lookup(object, {"explanation", "Explanation"}), "explanation");
    f.paths = as_list(lookup(object, {"path", "paths"}), "path");
    f.filenames = as_list(lookup(object, {"filename", "filenames"}), "filename");
    f.identifiers = as_list(lookup(object, {"identifiers", "identifier"}), "identifiers");
    f.code_snippet = as_text(lookup(object, {"code_snippet", "code_snippets"}), "code_snippet");
    f.stacktrace = as_text(lookup(object, {"stacktrace", "stack_trace"}), "stacktrace");
    f.error_message = as_text(lookup(object, {"error_message", "error"}), "error_message");
    return f;
}

ExtractedFields parse_extraction(std::string_view raw) {
    auto object = extract_first_json_object(raw);
    if (!object) throw FormatError("no JSON object found in extraction reply");
    return fields_from_json(*object);
}

std::string build_query(const ExtractedFields& fields, const FieldGroup& group) {
    std::string query;
    for (const Field field : kSchemaOrder) {
        if (std::find(group.members.begin(), group.members.end(), field) == group.members.end()) continue;
        auto part = trim_copy(without_quotes(render(fields, field)));
        if (part.empty()) continue;
        if (!query.empty()) query += ' ';
        query += part;
    }
    return query;
}

std::string baseline_query(std::string_view bug_description) { return std::string(bug_description); }

}  // namespace bugloc
