#pragma once

#include <cstddef>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace bugloc {

enum class Language { python, java, kotlin, other };

std::string_view to_string(Language lang);
Language language_from_string(std::string_view name);
/// Maps a file extension (with or without the leading dot) to a language.
Language language_from_extension(std::string_view ext);

struct SourceFile {
    std::string relative_path;  // '/'-separated, never absolute, never contains ".."
    Language language = Language::other;
    std::string content;
};

struct FileManifest {
    std::filesystem::path root;
    std::vector<SourceFile> files;  // sorted by relative_path
    std::size_t excluded_count = 0;

    [[nodiscard]] const SourceFile* find(std::string_view relative_path) const;
    [[nodiscard]] bool contains(std::string_view relative_path) const {
        return find(relative_path) != nullptr;
    }
};

struct ViewChunk {
    std::string relative_path;
    std::string text;
    std::size_t token_count = 0;
    bool truncated = false;
};

inline constexpr std::size_t kDefaultViewBudget = 512;

/// Extensions indexed by default: python, java and kotlin sources.
std::set<std::string> default_extensions();

/// True when a relative path looks like a test file: a directory segment named
/// `test`/`tests`, or a basename `test_*` / `*_test.*` (case-insensitive).
bool is_test_path(std::string_view relative_path);

/// Normalizes and validates a repository-relative path. Returns an empty string
/// for absolute paths, paths with ".." segments, or empty input.
std::string normalize_relative_path(std::string_view path);

bool is_valid_utf8(std::string_view bytes);

/// Collects every regular file under `root` whose extension is in `extensions`.
/// Symlinks are never followed; undecodable files, filtered extensions and
/// (optionally) test files are counted in `excluded_count`.
FileManifest scan_repository(const std::filesystem::path& root,
                             const std::set<std::string>& extensions,
                             bool exclude_tests);

/// Removes leading copyright/license comment blocks and import/package lines.
std::string strip_preamble(std::string_view content, Language language);

/// Number of view tokens in `text`. A view token is a maximal run of
/// alphanumeric/underscore characters, the surface unit of the index tokenizer.
std::size_t count_view_tokens(std::string_view text);

/// Keeps the first `token_budget` view tokens of `content` (budget must be >= 1).
ViewChunk chunk_head(std::string_view content, std::size_t token_budget = kDefaultViewBudget,
                     std::string relative_path = {});

/// strip_preamble followed by chunk_head.
ViewChunk clean_view(const SourceFile& file, std::size_t token_budget = kDefaultViewBudget);

}  // namespace bugloc
