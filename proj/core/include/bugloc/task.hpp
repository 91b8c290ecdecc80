#pragma once

#include "bugloc/corpus.hpp"
#include "bugloc/reformulation.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace bugloc {

/// One localization problem.
struct BugTask {
    std::string task_id;
    std::string repo;  // directory name under the repositories root
    std::filesystem::path repo_root;
    std::string bug_description;
    std::vector<std::string> ground_truth_files;  // non-empty, relative paths
    Language language = Language::other;
};

/// Parses one JSONL record: {task_id, repo, bug_description, ground_truth_files[], language}.
BugTask task_from_json(const nlohmann::json& record, const std::filesystem::path& repos_dir);
nlohmann::json task_to_json(const BugTask& task);

/// Loads a JSONL task file. Throws FormatError naming the offending line, or
/// when a ground-truth file is missing under its repository.
std::vector<BugTask> load_tasks(const std::filesystem::path& tasks_file,
                                const std::filesystem::path& repos_dir);

/// JSONL of {task_id, extracted_fields}.
std::map<std::string, ExtractedFields> load_extraction_cache(const std::filesystem::path& path);

}  // namespace bugloc
