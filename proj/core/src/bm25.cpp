#include "bugloc/bm25.hpp"

#include "bugloc/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <unordered_map>

namespace bugloc {

namespace {

constexpr const char* kFormatName = "bugloc-bm25-index";
constexpr int kFormatVersion = 1;

std::set<std::string, std::less<>> unique_tokens(std::span<const std::string> tokens) {
    return {tokens.begin(), tokens.end()};
}

}  // namespace

std::vector<std::string> RankedResults::paths() const {
    std::vector<std::string> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.path);
    return out;
}

double bm25_idf(std::size_t doc_count, std::size_t doc_freq) {
    const auto n = static_cast<double>(doc_count);
    const auto df = static_cast<double>(doc_freq);
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

Bm25Index Bm25Index::build(const FileManifest& manifest, const TokenizerConfig& config,
                           const Bm25Params& params) {
    if (manifest.files.empty()) throw EmptyCorpus();
    std::vector<std::string> paths;
    std::vector<std::vector<std::string>> docs;
    paths.reserve(manifest.files.size());
    docs.reserve(manifest.files.size());
    for (const auto& file : manifest.files) {
        paths.push_back(file.relative_path);
        docs.push_back(tokenize(file.content, config));
    }
    return from_tokens(paths, docs, config, params);
}

Bm25Index Bm25Index::from_tokens(const std::vector<std::string>& paths,
                                 const std::vector<std::vector<std::string>>& doc_tokens,
                                 const TokenizerConfig& config, const Bm25Params& params) {
    if (paths.empty()) throw EmptyCorpus();
    if (paths.size() != doc_tokens.size())
        throw std::invalid_argument("from_tokens: paths and documents differ in length");
    Bm25Index index;
    index.params_ = params;
    index.tokenizer_ = config;
    index.paths_ = paths;
    index.doc_lens_.reserve(paths.size());
    for (DocId id = 0; id < paths.size(); ++id) {
        if (!index.path_ids_.emplace(paths[id], id).second)
            throw std::invalid_argument("from_tokens: duplicate path " + paths[id]);
        std::unordered_map<std::string_view, std::uint32_t> tf;
        for (const auto& t : doc_tokens[id]) ++tf[t];
        for (const auto& [token, count] : tf) {
            index.postings_[std::string(token)].push_back({id, count});
        }
        index.doc_lens_.push_back(static_cast<std::uint32_t>(doc_tokens[id].size()));
    }
    index.finalize();
    return index;
}

void Bm25Index::finalize() {
    // Documents are visited in id order, so postings are already sorted.
    path_ids_.clear();
    for (DocId id = 0; id < paths_.size(); ++id) path_ids_.emplace(paths_[id], id);
    const double total = std::accumulate(doc_lens_.begin(), doc_lens_.end(), 0.0);
    avg_doc_len_ = total / static_cast<double>(doc_lens_.size());
}

std::uint32_t Bm25Index::doc_len(DocId id) const {
    if (id >= doc_lens_.size()) throw UnknownDoc(id);
    return doc_lens_[id];
}

const std::string& Bm25Index::doc_path(DocId id) const {
    if (id >= paths_.size()) throw UnknownDoc(id);
    return paths_[id];
}

std::optional<DocId> Bm25Index::find_doc(std::string_view path) const {
    auto it = path_ids_.find(path);
    if (it == path_ids_.end()) return std::nullopt;
    return it->second;
}

const std::vector<Posting>* Bm25Index::postings(std::string_view token) const {
    auto it = postings_.find(token);
    return it == postings_.end() ? nullptr : &it->second;
}

std::size_t Bm25Index::document_frequency(std::string_view token) const {
    const auto* list = postings(token);
    return list ? list->size() : 0;
}

std::uint32_t Bm25Index::term_frequency(std::string_view token, DocId id) const {
    const auto* list = postings(token);
    if (!list) return 0;
    auto it = std::lower_bound(list->begin(), list->end(), id,
                               [](const Posting& p, DocId d) { return p.doc < d; });
    return (it != list->end() && it->doc == id) ? it->tf : 0;
}

double Bm25Index::idf(std::string_view token) const {
    return bm25_idf(doc_count(), document_frequency(token));
}

double Bm25Index::score(std::span<const std::string> query_tokens, DocId id) const {
    if (id >= doc_lens_.size()) throw UnknownDoc(id);
    const double norm = params_.k1 * (1.0 - params_.b + params_.b * doc_lens_[id] / avg_doc_len_);
    double total = 0.0;
    for (const auto& token : unique_tokens(query_tokens)) {
        const auto tf = static_cast<double>(term_frequency(token, id));
        if (tf == 0.0) continue;
        total += idf(token) * tf * (params_.k1 + 1.0) / (tf + norm);
    }
    return total;
}

RankedResults Bm25Index::search(std::string_view query, std::size_t k) const {
    const auto tokens = tokenize(query, tokenizer_);
    return search_tokens(tokens, k);
}

RankedResults Bm25Index::search_tokens(std::span<const std::string> query_tokens,
                                       std::size_t k) const {
    if (k == 0) throw std::invalid_argument("search: k must be >= 1");
    // Term-at-a-time accumulation; per-document addition order matches score().
    std::vector<double> acc(doc_count(), 0.0);
    std::vector<bool> touched(doc_count(), false);
    for (const auto& token : unique_tokens(query_tokens)) {
        const auto* list = postings(token);
        if (!list) continue;
        const double w = bm25_idf(doc_count(), list->size());
        for (const auto& p : *list) {
            const double tf = p.tf;
            const double norm =
                params_.k1 * (1.0 - params_.b + params_.b * doc_lens_[p.doc] / avg_doc_len_);
            acc[p.doc] += w * tf * (params_.k1 + 1.0) / (tf + norm);
            touched[p.doc] = true;
        }
    }
    std::vector<DocId> hits;
    for (DocId id = 0; id < acc.size(); ++id) {
        if (touched[id] && acc[id] > 0.0) hits.push_back(id);
    }
    auto better = [&](DocId a, DocId b) {
        if (acc[a] != acc[b]) return acc[a] > acc[b];
        return paths_[a] < paths_[b];
    };
    const auto keep = std::min(k, hits.size());
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(keep), hits.end(), better);
    RankedResults results;
    results.k_requested = k;
    results.entries.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) results.entries.push_back({paths_[hits[i]], acc[hits[i]]});
    return results;
}

void Bm25Index::save(std::ostream& out) const {
    nlohmann::json docs = nlohmann::json::array();
    for (DocId id = 0; id < paths_.size(); ++id) docs.push_back({paths_[id], doc_lens_[id]});
    const nlohmann::json header = {
        {"format", kFormatName},
        {"version", kFormatVersion},
        {"doc_count", doc_count()},
        {"avg_doc_len", avg_doc_len_},
        {"vocabulary_size", postings_.size()},
        {"params", {{"k1", params_.k1}, {"b", params_.b}}},
        {"tokenizer", tokenizer_},
        {"docs", docs},
    };
    out << header.dump() << '\n';
    for (const auto& [token, list] : postings_) {
        nlohmann::json plist = nlohmann::json::array();
        for (const auto& p : list) plist.push_back({p.doc, p.tf});
        out << nlohmann::json{{"token", token}, {"postings", plist}}.dump() << '\n';
    }
}

Bm25Index Bm25Index::load(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw FormatError("index: missing header record");
    Bm25Index index;
    try {
        const auto header = nlohmann::json::parse(line);
        if (header.at("format") != kFormatName) throw FormatError("index: unknown format");
        if (header.at("version").get<int>() != kFormatVersion)
            throw FormatError("index: unsupported version");
        index.params_.k1 = header.at("params").at("k1").get<double>();
        index.params_.b = header.at("params").at("b").get<double>();
        index.tokenizer_ = header.at("tokenizer").get<TokenizerConfig>();
        for (const auto& d : header.at("docs")) {
            index.paths_.push_back(d.at(0).get<std::string>());
            index.doc_lens_.push_back(d.at(1).get<std::uint32_t>());
        }
        if (index.paths_.empty()) throw EmptyCorpus();
        if (header.at("doc_count").get<std::size_t>() != index.paths_.size())
            throw FormatError("index: doc_count does not match docs");
        std::set<std::string_view> seen;
        for (const auto& p : index.paths_)
            if (!seen.insert(p).second) throw FormatError("index: duplicate path " + p);
        std::vector<std::uint64_t> tf_sums(index.paths_.size(), 0);
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto rec = nlohmann::json::parse(line);
            auto& list = index.postings_[rec.at("token").get<std::string>()];
            for (const auto& p : rec.at("postings")) {
                const auto doc = p.at(0).get<DocId>();
                if (doc >= index.paths_.size()) throw FormatError("index: posting for unknown doc");
                if (!list.empty() && list.back().doc >= doc)
                    throw FormatError("index: postings not sorted by doc id");
                const auto tf = p.at(1).get<std::uint32_t>();
                if (tf == 0) throw FormatError("index: zero term frequency");
                tf_sums[doc] += tf;
                list.push_back({doc, tf});
            }
        }
        for (DocId id = 0; id < tf_sums.size(); ++id)
            if (tf_sums[id] != index.doc_lens_[id])
                throw FormatError("index: length of " + index.paths_[id] + " disagrees with postings");
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("index: ") + e.what());
    }
    index.finalize();
    return index;
}

void Bm25Index::save_file(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write index file " + path.string());
    save(out);
}

Bm25Index Bm25Index::load_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read index file " + path.string());
    return load(in);
}

}  // namespace bugloc
