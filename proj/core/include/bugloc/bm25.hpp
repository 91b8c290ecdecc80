#pragma once

#include "bugloc/corpus.hpp"
#include "bugloc/tokenizer.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bugloc {

using DocId = std::uint32_t;

/// Okapi parameters. Defaults follow the Anserini/Pyserini toolkit defaults.
struct Bm25Params {
    double k1 = 0.9;
    double b = 0.4;

    bool operator==(const Bm25Params&) const = default;
};

struct Posting {
    DocId doc = 0;
    std::uint32_t tf = 0;

    bool operator==(const Posting&) const = default;
};

struct ScoredPath {
    std::string path;
    double score = 0.0;
};

/// Top-k output: scores non-increasing, ties broken by path, at most k entries.
struct RankedResults {
    std::vector<ScoredPath> entries;
    std::size_t k_requested = 0;

    [[nodiscard]] std::vector<std::string> paths() const;
};

/// Nonnegative Lucene-style idf: ln(1 + (N - df + 0.5) / (df + 0.5)).
double bm25_idf(std::size_t doc_count, std::size_t doc_freq);

/// Immutable inverted index; concurrent searches need no synchronization.
class Bm25Index {
public:
    /// One document per manifest file, analysed with `config`. Throws EmptyCorpus.
    static Bm25Index build(const FileManifest& manifest, const TokenizerConfig& config = {},
                           const Bm25Params& params = {});

    /// Builds from pre-analysed documents. Paths must be unique.
    static Bm25Index from_tokens(const std::vector<std::string>& paths,
                                 const std::vector<std::vector<std::string>>& doc_tokens,
                                 const TokenizerConfig& config = {}, const Bm25Params& params = {});

    [[nodiscard]] std::size_t doc_count() const { return paths_.size(); }
    [[nodiscard]] double avg_doc_len() const { return avg_doc_len_; }
    [[nodiscard]] std::uint32_t doc_len(DocId id) const;
    [[nodiscard]] const std::string& doc_path(DocId id) const;
    [[nodiscard]] std::optional<DocId> find_doc(std::string_view path) const;
    [[nodiscard]] const Bm25Params& params() const { return params_; }
    [[nodiscard]] const TokenizerConfig& tokenizer() const { return tokenizer_; }
    [[nodiscard]] std::size_t vocabulary_size() const { return postings_.size(); }

    [[nodiscard]] std::size_t document_frequency(std::string_view token) const;
    [[nodiscard]] std::uint32_t term_frequency(std::string_view token, DocId id) const;
    [[nodiscard]] const std::vector<Posting>* postings(std::string_view token) const;
    [[nodiscard]] double idf(std::string_view token) const;

    /// Sum over the unique query tokens; tokens absent from the index add 0.
    /// Throws UnknownDoc.
    [[nodiscard]] double score(std::span<const std::string> query_tokens, DocId id) const;

    /// Analyses `query` with the stored tokenizer and returns the top k documents
    /// with a positive score. Throws std::invalid_argument when k == 0.
    [[nodiscard]] RankedResults search(std::string_view query, std::size_t k) const;
    [[nodiscard]] RankedResults search_tokens(std::span<const std::string> query_tokens,
                                              std::size_t k) const;

    void save(std::ostream& out) const;
    static Bm25Index load(std::istream& in);
    void save_file(const std::filesystem::path& path) const;
    static Bm25Index load_file(const std::filesystem::path& path);

private:
    Bm25Index() = default;
    void finalize();

    std::map<std::string, std::vector<Posting>, std::less<>> postings_;
    std::vector<std::uint32_t> doc_lens_;
    std::vector<std::string> paths_;
    std::map<std::string, DocId, std::less<>> path_ids_;
    double avg_doc_len_ = 0.0;
    Bm25Params params_;
    TokenizerConfig tokenizer_;
};

}  // namespace bugloc
