#pragma once

#include "bugloc/agent.hpp"
#include "bugloc/bm25.hpp"
#include "bugloc/task.hpp"

#include "support/temp_dir.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace testutil {

struct ToyRepo {
    bugloc::FileManifest manifest;
    bugloc::Bm25Index index;
    std::vector<bugloc::BugTask> tasks;

    ToyRepo()
        : manifest(bugloc::scan_repository(fixture_dir() / "toy_repo", bugloc::default_extensions(), true)),
          index(bugloc::Bm25Index::build(manifest)),
          tasks(bugloc::load_tasks(fixture_dir() / "tasks.jsonl", fixture_dir())) {}

    [[nodiscard]] bugloc::RepositoryContext context() const { return {manifest, index}; }
};

inline std::string call(const std::string& tool, nlohmann::json args = nlohmann::json::object()) {
    return nlohmann::json{{"tool", tool}, {"args", std::move(args)}}.dump();
}

inline std::string extraction_reply() {
    return R"({"explanation": "Reserving more units than are in stock crashes with IndexError.",)"
           R"( "path": [], "filename": [], "identifiers": ["reserve_stock", "OutOfStock"],)"
           R"j( "code_snippet": "units.pop()", "stacktrace": "", "error_message": "IndexError: pop from empty list"})j";
}

inline std::vector<bugloc::ScriptEntry> script(const std::vector<std::string>& replies) {
    std::vector<bugloc::ScriptEntry> out;
    for (const auto& r : replies) out.push_back({std::nullopt, r, std::chrono::milliseconds(0)});
    return out;
}

}  // namespace testutil
