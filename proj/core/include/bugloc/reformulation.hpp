#pragma once

#include <nlohmann/json.hpp>

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace bugloc {

/// Structured information extracted from a bug report. Every field is always
/// present; empty means "not mentioned in the report".
struct ExtractedFields {
    std::string explanation;
    std::vector<std::string> paths;
    std::vector<std::string> filenames;
    std::vector<std::string> identifiers;
    std::string code_snippet;
    std::string stacktrace;
    std::string error_message;

    bool operator==(const ExtractedFields&) const = default;
};

/// Serialized as the seven-key object: explanation, path, filename,
/// identifiers, code_snippet, stacktrace, error_message.
void to_json(nlohmann::json& j, const ExtractedFields& f);

/// Schema order; also the order in which fields enter a query.
enum class Field { explanation, paths, filenames, identifiers, code_snippet, stacktrace, error_message };

inline constexpr std::array<Field, 7> kSchemaOrder = {
    Field::explanation,  Field::paths,      Field::filenames,    Field::identifiers,
    Field::code_snippet, Field::stacktrace, Field::error_message};

/// JSON key used for a field in the extraction schema.
std::string_view json_key(Field field);

enum class GroupId { G1_full, G2_explanation, G3_all_code, G4_id_snippets, G5_exp_id_snippets };

struct FieldGroup {
    GroupId id = GroupId::G1_full;
    std::vector<Field> members;  // schema order
};

std::string_view to_string(GroupId id);
/// Accepts "G1".."G5" (case-insensitive) or the full enum names.
GroupId group_from_string(std::string_view name);

/// Ablation groups: full schema, explanation only, all code signals,
/// identifiers + snippets, explanation + identifiers + snippets.
FieldGroup field_group(GroupId id);

struct ExtractionPrompt {
    std::string system;
    std::string user;
    nlohmann::json schema;  // JSON Schema the reply is validated against
};

/// Throws std::invalid_argument on an empty description.
ExtractionPrompt extraction_prompt(std::string_view bug_description);

/// JSON Schema describing the extraction object.
const nlohmann::json& extraction_schema();

/// Parses the first JSON object in a model reply. Missing keys become empty,
/// a scalar where a list is expected becomes a one-element list. Throws
/// FormatError when no object is found or a value has an unusable type.
ExtractedFields parse_extraction(std::string_view raw);
ExtractedFields fields_from_json(const nlohmann::json& object);

/// Member values in schema order separated by single spaces; list fields are
/// rendered as "[a, b]". Field names and double quotes never appear.
std::string build_query(const ExtractedFields& fields, const FieldGroup& group);

/// The unmodified bug description.
std::string baseline_query(std::string_view bug_description);

}  // namespace bugloc
