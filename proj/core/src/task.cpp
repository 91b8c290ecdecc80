#include "bugloc/task.hpp"

#include "bugloc/errors.hpp"

#include <fstream>
#include <set>

namespace bugloc {

BugTask task_from_json(const nlohmann::json& record, const std::filesystem::path& repos_dir) {
    BugTask task;
    task.task_id = record.at("task_id").get<std::string>();
    task.repo = record.at("repo").get<std::string>();
    task.repo_root = repos_dir / task.repo;
    task.bug_description = record.at("bug_description").get<std::string>();
    task.language = language_from_string(record.value("language", std::string("other")));
    std::set<std::string> seen;
    for (const auto& f : record.at("ground_truth_files")) {
        auto rel = normalize_relative_path(f.get<std::string>());
        if (rel.empty()) throw FormatError("task " + task.task_id + ": invalid ground-truth path");
        if (seen.insert(rel).second) task.ground_truth_files.push_back(std::move(rel));
    }
    if (task.task_id.empty()) throw FormatError("task without task_id");
    if (task.ground_truth_files.empty()) throw FormatError("task " + task.task_id + ": no ground-truth files");
    return task;
}

nlohmann::json task_to_json(const BugTask& task) {
    return {{"task_id", task.task_id},
            {"repo", task.repo},
            {"bug_description", task.bug_description},
            {"ground_truth_files", task.ground_truth_files},
            {"language", to_string(task.language)}};
}

std::vector<BugTask> load_tasks(const std::filesystem::path& tasks_file,
                                const std::filesystem::path& repos_dir) {
    std::ifstream in(tasks_file);
    if (!in) throw FormatError("cannot read tasks file " + tasks_file.string());
    std::vector<BugTask> tasks;
    std::set<std::string> ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            auto task = task_from_json(nlohmann::json::parse(line), repos_dir);
            if (!ids.insert(task.task_id).second) throw FormatError("duplicate task_id " + task.task_id);
            for (const auto& f : task.ground_truth_files) {
                if (!std::filesystem::is_regular_file(task.repo_root / f))
                    throw FormatError("ground-truth file " + f + " not found under " + task.repo_root.string());
            }
            tasks.push_back(std::move(task));
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(tasks_file.string() + ":" + std::to_string(line_no) + ": " + e.what());
        } catch (const FormatError& e) {
            throw FormatError(tasks_file.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return tasks;
}

std::map<std::string, ExtractedFields> load_extraction_cache(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot read extraction cache " + path.string());
    std::map<std::string, ExtractedFields> cache;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto rec = nlohmann::json::parse(line);
            cache[rec.at("task_id").get<std::string>()] = fields_from_json(rec.at("extracted_fields"));
        } catch (const std::exception& e) {
            throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return cache;
}

}  // namespace bugloc
