#include "bugloc/corpus.hpp"

#include "bugloc/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <iterator>

namespace bugloc {

namespace fs = std::filesystem;

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\f\v");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\f\v");
    return s.substr(first, last - first + 1);
}

bool starts_with_word(std::string_view line, std::string_view keyword) {
    if (!line.starts_with(keyword)) return false;
    if (line.size() == keyword.size()) return true;
    const char next = line[keyword.size()];
    return next == ' ' || next == '\t';
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            lines.push_back(text.substr(start));
            break;
        }
        lines.push_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    return lines;
}

bool is_view_char(unsigned char c) { return std::isalnum(c) != 0 || c == '_'; }

bool has_license_marker(std::string_view text) {
    const auto l = lower(text);
    return l.find("copyright") != std::string::npos || l.find("license") != std::string::npos ||
           l.find("licence") != std::string::npos || l.find("spdx") != std::string::npos;
}

struct CommentSyntax {
    bool hash = false;
    bool slashes = false;
};

CommentSyntax comment_syntax(Language lang) {
    switch (lang) {
        case Language::python: return {true, false};
        case Language::java:
        case Language::kotlin: return {false, true};
        case Language::other: return {true, true};
    }
    return {true, true};
}

// Marks lines of leading comment blocks that carry a license marker.
void mark_license_blocks(const std::vector<std::string_view>& lines, Language lang,
                         std::vector<bool>& removed) {
    const auto syntax = comment_syntax(lang);
    std::size_t i = 0;
    while (i < lines.size()) {
        const auto t = trim(lines[i]);
        if (t.empty()) {
            ++i;
            continue;
        }
        std::size_t end = i;
        if (syntax.slashes && t.starts_with("/*")) {
            while (end < lines.size() && lines[end].find("*/") == std::string_view::npos) ++end;
            end = std::min(end + 1, lines.size());
        } else if ((syntax.hash && t.starts_with("#")) || (syntax.slashes && t.starts_with("//"))) {
            const std::string_view marker = t.starts_with("#") ? "#" : "//";
            while (end < lines.size() && trim(lines[end]).starts_with(marker)) ++end;
        } else {
            return;  // first code line ends the preamble
        }
        bool licensed = false;
        for (std::size_t j = i; j < end; ++j) licensed = licensed || has_license_marker(lines[j]);
        if (licensed) {
            for (std::size_t j = i; j < end; ++j) removed[j] = true;
        }
        i = end;
    }
}

void mark_imports(const std::vector<std::string_view>& lines, Language lang,
                  std::vector<bool>& removed) {
    if (lang == Language::other) return;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto t = trim(lines[i]);
        bool is_import = false;
        if (lang == Language::python) {
            is_import = starts_with_word(t, "import") ||
                        (starts_with_word(t, "from") && t.find(" import") != std::string_view::npos);
        } else {
            is_import = starts_with_word(t, "import") || starts_with_word(t, "package");
        }
        if (!is_import) continue;
        removed[i] = true;
        if (lang != Language::python) continue;
        // Parenthesized and backslash-continued imports span several lines.
        const bool open_paren = t.find('(') != std::string_view::npos &&
                                t.find(')') == std::string_view::npos;
        if (open_paren) {
            while (i + 1 < lines.size()) {
                ++i;
                removed[i] = true;
                if (lines[i].find(')') != std::string_view::npos) break;
            }
        } else {
            while (t.ends_with("\\") && i + 1 < lines.size()) {
                ++i;
                removed[i] = true;
                const auto next = trim(lines[i]);
                if (!next.ends_with("\\")) break;
            }
        }
    }
}

}  // namespace

std::string_view to_string(Language lang) {
    switch (lang) {
        case Language::python: return "python";
        case Language::java: return "java";
        case Language::kotlin: return "kotlin";
        case Language::other: return "other";
    }
    return "other";
}

Language language_from_string(std::string_view name) {
    const auto l = lower(name);
    if (l == "python") return Language::python;
    if (l == "java") return Language::java;
    if (l == "kotlin") return Language::kotlin;
    return Language::other;
}

Language language_from_extension(std::string_view ext) {
    if (ext.starts_with(".")) ext.remove_prefix(1);
    const auto l = lower(ext);
    if (l == "py") return Language::python;
    if (l == "java") return Language::java;
    if (l == "kt" || l == "kts") return Language::kotlin;
    return Language::other;
}

std::set<std::string> default_extensions() { return {"py", "java", "kt"}; }

const SourceFile* FileManifest::find(std::string_view relative_path) const {
    auto it = std::lower_bound(files.begin(), files.end(), relative_path,
                               [](const SourceFile& f, std::string_view p) {
                                   return f.relative_path < p;
                               });
    if (it == files.end() || it->relative_path != relative_path) return nullptr;
    return &*it;
}

bool is_test_path(std::string_view relative_path) {
    const auto path = lower(relative_path);
    std::size_t start = 0;
    std::vector<std::string_view> segments;
    const std::string_view view(path);
    while (start <= view.size()) {
        const auto slash = view.find('/', start);
        const auto seg = view.substr(start, slash == std::string_view::npos ? std::string_view::npos
                                                                            : slash - start);
        if (!seg.empty()) segments.push_back(seg);
        if (slash == std::string_view::npos) break;
        start = slash + 1;
    }
    if (segments.empty()) return false;
    for (std::size_t i = 0; i + 1 < segments.size(); ++i) {
        if (segments[i] == "test" || segments[i] == "tests") return true;
    }
    const auto base = segments.back();
    if (base.starts_with("test_")) return true;
    const auto dot = base.find('.');
    const auto stem = base.substr(0, dot);
    return stem.ends_with("_test") && dot != std::string_view::npos;
}

std::string normalize_relative_path(std::string_view path) {
    std::string p(trim(path));
    std::replace(p.begin(), p.end(), '\\', '/');
    if (p.empty() || p.front() == '/') return {};
    if (p.size() >= 2 && p[1] == ':') return {};
    std::string out;
    std::size_t start = 0;
    while (start <= p.size()) {
        const auto slash = p.find('/', start);
        const auto seg = p.substr(start, slash == std::string::npos ? std::string::npos : slash - start);
        if (seg == "..") return {};
        if (!seg.empty() && seg != ".") {
            if (!out.empty()) out += '/';
            out += seg;
        }
        if (slash == std::string::npos) break;
        start = slash + 1;
    }
    return out;
}

bool is_valid_utf8(std::string_view bytes) {
    std::size_t i = 0;
    while (i < bytes.size()) {
        const auto c = static_cast<unsigned char>(bytes[i]);
        std::size_t extra = 0;
        std::uint32_t cp = 0;
        if (c < 0x80) {
            if (c == 0) return false;  // NUL means binary for our purposes
            ++i;
            continue;
        } else if ((c & 0xE0) == 0xC0) {
            extra = 1;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            extra = 2;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            extra = 3;
            cp = c & 0x07;
        } else {
            return false;
        }
        if (i + extra >= bytes.size()) return false;
        for (std::size_t k = 1; k <= extra; ++k) {
            const auto cc = static_cast<unsigned char>(bytes[i + k]);
            if ((cc & 0xC0) != 0x80) return false;
            cp = (cp << 6) | (cc & 0x3F);
        }
        // Overlong encodings, surrogates and out-of-range code points.
        if ((extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) || (extra == 3 && cp < 0x10000) ||
            (cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF)
            return false;
        i += extra + 1;
    }
    return true;
}

FileManifest scan_repository(const fs::path& root, const std::set<std::string>& extensions,
                             bool exclude_tests) {
    std::error_code ec;
    if (!fs::is_directory(root, ec)) throw MissingRoot(root.string());

    std::set<std::string> exts;
    for (const auto& e : extensions) exts.insert(lower(e.starts_with(".") ? e.substr(1) : e));

    FileManifest manifest;
    manifest.root = root;

    fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied, ec);
    if (ec) throw MissingRoot(root.string());
    for (; it != fs::recursive_directory_iterator(); it.increment(ec)) {
        if (ec) break;
        const auto& entry = *it;
        if (entry.is_symlink(ec)) {
            if (entry.is_directory(ec)) it.disable_recursion_pending();
            continue;
        }
        if (entry.is_directory(ec)) {
            if (entry.path().filename() == ".git") it.disable_recursion_pending();
            continue;
        }
        if (!entry.is_regular_file(ec)) continue;

        const auto rel = fs::relative(entry.path(), root, ec).generic_string();
        auto ext = entry.path().extension().string();
        if (!ext.empty()) ext = lower(ext.substr(1));
        if (ext.empty() || !exts.contains(ext) || (exclude_tests && is_test_path(rel))) {
            ++manifest.excluded_count;
            continue;
        }
        std::ifstream in(entry.path(), std::ios::binary);
        std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        if (!in.good() && !in.eof()) {
            ++manifest.excluded_count;
            continue;
        }
        if (!is_valid_utf8(content)) {
            ++manifest.excluded_count;
            continue;
        }
        manifest.files.push_back({rel, language_from_extension(ext), std::move(content)});
    }
    std::sort(manifest.files.begin(), manifest.files.end(),
              [](const SourceFile& a, const SourceFile& b) { return a.relative_path < b.relative_path; });
    return manifest;
}

std::string strip_preamble(std::string_view content, Language language) {
    const auto lines = split_lines(content);
    std::vector<bool> removed(lines.size(), false);
    mark_license_blocks(lines, language, removed);
    mark_imports(lines, language, removed);
    if (std::none_of(removed.begin(), removed.end(), [](bool r) { return r; })) {
        return std::string(content);
    }

    std::vector<std::string_view> kept;
    bool previous_blank = true;  // drops blank lines at the top
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (removed[i]) continue;
        const bool blank = trim(lines[i]).empty();
        if (blank && previous_blank) continue;
        kept.push_back(lines[i]);
        previous_blank = blank;
    }
    while (!kept.empty() && trim(kept.back()).empty()) kept.pop_back();

    std::string out;
    for (std::size_t i = 0; i < kept.size(); ++i) {
        if (i) out += '\n';
        out += kept[i];
    }
    if (!out.empty() && content.ends_with("\n")) out += '\n';
    return out;
}

std::size_t count_view_tokens(std::string_view text) {
    std::size_t n = 0;
    bool in_token = false;
    for (const char ch : text) {
        const bool w = is_view_char(static_cast<unsigned char>(ch));
        if (w && !in_token) ++n;
        in_token = w;
    }
    return n;
}

ViewChunk chunk_head(std::string_view content, std::size_t token_budget, std::string relative_path) {
    if (token_budget == 0) throw std::invalid_argument("chunk_head: token budget must be >= 1");
    ViewChunk chunk;
    chunk.relative_path = std::move(relative_path);
    std::size_t n = 0;
    bool in_token = false;
    for (std::size_t i = 0; i < content.size(); ++i) {
        const bool w = is_view_char(static_cast<unsigned char>(content[i]));
        if (w && !in_token) {
            if (n == token_budget) {
                chunk.text = std::string(content.substr(0, i));
                // Cut right after the last kept token.
                while (!chunk.text.empty() &&
                       !is_view_char(static_cast<unsigned char>(chunk.text.back())))
                    chunk.text.pop_back();
                chunk.token_count = n;
                chunk.truncated = true;
                return chunk;
            }
            ++n;
        }
        in_token = w;
    }
    chunk.text = std::string(content);
    chunk.token_count = n;
    chunk.truncated = false;
    return chunk;
}

ViewChunk clean_view(const SourceFile& file, std::size_t token_budget) {
    return chunk_head(strip_preamble(file.content, file.language), token_budget, file.relative_path);
}

}  // namespace bugloc
