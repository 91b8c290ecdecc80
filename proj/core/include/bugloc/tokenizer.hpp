#pragma once

#include <nlohmann/json.hpp>

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace bugloc {

/// The standard English stopword list (NLTK flavour, 179 words).
const std::set<std::string>& english_stopwords();

/// Analyzer chain shared by documents and queries. It is persisted with the
/// index so that query-time analysis always matches index-time analysis.
struct TokenizerConfig {
    bool lowercase = true;
    bool split_identifiers = true;  // camelCase, PascalCase and snake_case
    bool emit_compound = true;      // also emit the whole (lowered) identifier
    std::size_t min_token_len = 1;
    bool stem = false;              // Porter stemming, off by default
    std::set<std::string> stopwords = english_stopwords();

    bool operator==(const TokenizerConfig&) const = default;
};

void to_json(nlohmann::json& j, const TokenizerConfig& c);
void from_json(const nlohmann::json& j, TokenizerConfig& c);

/// Splits an identifier on '_' and case boundaries: "parseHTTPHeader_v2" ->
/// {"parse", "HTTP", "Header", "v2"}.
std::vector<std::string> split_identifier(std::string_view word);

/// Words are maximal runs of ASCII alphanumerics and '_'. Each word is split
/// into identifier parts when configured. Stopwords are dropped only for
/// stand-alone words; parts of a multi-part identifier are always kept.
std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& config = {});

/// Porter (1980) suffix stripping on a lowercase ASCII word.
std::string porter_stem(std::string_view word);

}  // namespace bugloc
