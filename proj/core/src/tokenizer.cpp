#include "bugloc/tokenizer.hpp"

#include <cctype>

namespace bugloc {

namespace {

bool is_word_char(unsigned char c) { return std::isalnum(c) != 0 || c == '_'; }
bool is_upper(char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; }
bool is_lower(char c) { return std::islower(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

}  // namespace

const std::set<std::string>& english_stopwords() {
    static const std::set<std::string> words = {
        "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "you're", "you've",
        "you'll", "you'd", "your", "yours", "yourself", "yourselves", "he", "him", "his",
        "himself", "she", "she's", "her", "hers", "herself", "it", "it's", "its", "itself",
        "they", "them", "their", "theirs", "themselves", "what", "which", "who", "whom", "this",
        "that", "that'll", "these", "those", "am", "is", "are", "was", "were", "be", "been",
        "being", "have", "has", "had", "having", "do", "does", "did", "doing", "a", "an", "the",
        "and", "but", "if", "or", "because", "as", "until", "while", "of", "at", "by", "for",
        "with", "about", "against", "between", "into", "through", "during", "before", "after",
        "above", "below", "to", "from", "up", "down", "in", "out", "on", "off", "over", "under",
        "again", "further", "then", "once", "here", "there", "when", "where", "why", "how", "all",
        "any", "both", "each", "few", "more", "most", "other", "some", "such", "no", "nor", "not",
        "only", "own", "same", "so", "than", "too", "very", "s", "t", "can", "will", "just", "don",
        "don't", "should", "should've", "now", "d", "ll", "m", "o", "re", "ve", "y", "ain",
        "aren", "aren't", "couldn", "couldn't", "didn", "didn't", "doesn", "doesn't", "hadn",
        "hadn't", "hasn", "hasn't", "haven", "haven't", "isn", "isn't", "ma", "mightn",
        "mightn't", "mustn", "mustn't", "needn", "needn't", "shan", "shan't", "shouldn",
        "shouldn't", "wasn", "wasn't", "weren", "weren't", "won", "won't", "wouldn", "wouldn't"};
    return words;
}

void to_json(nlohmann::json& j, const TokenizerConfig& c) {
    j = nlohmann::json{{"lowercase", c.lowercase},
                       {"split_identifiers", c.split_identifiers},
                       {"emit_compound", c.emit_compound},
                       {"min_token_len", c.min_token_len},
                       {"stem", c.stem},
                       {"stopwords", c.stopwords}};
}

void from_json(const nlohmann::json& j, TokenizerConfig& c) {
    c.lowercase = j.at("lowercase").get<bool>();
    c.split_identifiers = j.at("split_identifiers").get<bool>();
    c.emit_compound = j.at("emit_compound").get<bool>();
    c.min_token_len = j.at("min_token_len").get<std::size_t>();
    c.stem = j.value("stem", false);
    c.stopwords = j.at("stopwords").get<std::set<std::string>>();
}

std::vector<std::string> split_identifier(std::string_view word) {
    std::vector<std::string> parts;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) parts.push_back(std::move(current));
        current.clear();
    };
    for (std::size_t i = 0; i < word.size(); ++i) {
        const char c = word[i];
        if (c == '_') {
            flush();
            continue;
        }
        if (!current.empty() && is_upper(c)) {
            const char prev = current.back();
            const bool next_lower = i + 1 < word.size() && is_lower(word[i + 1]);
            // fooBar | HTTPServer -> HTTP|Server | v2Beta
            if (is_lower(prev) || is_digit(prev) || (is_upper(prev) && next_lower)) flush();
        }
        current += c;
    }
    flush();
    return parts;
}

std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& config) {
    std::vector<std::string> tokens;
    auto emit = [&](std::string token, bool check_stopword) {
        if (token.size() < config.min_token_len) return;
        if (check_stopword && config.stopwords.contains(config.lowercase ? token : to_lower(token)))
            return;
        if (config.stem) token = porter_stem(token);
        tokens.push_back(std::move(token));
    };

    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && !is_word_char(static_cast<unsigned char>(text[i]))) ++i;
        const std::size_t start = i;
        while (i < text.size() && is_word_char(static_cast<unsigned char>(text[i]))) ++i;
        if (start == i) break;
        const auto word = text.substr(start, i - start);

        std::vector<std::string> parts;
        if (config.split_identifiers) {
            parts = split_identifier(word);
        } else {
            parts.emplace_back(word);
        }
        if (parts.empty()) continue;  // e.g. "___"
        const bool multi = parts.size() > 1;
        for (auto& part : parts) emit(config.lowercase ? to_lower(part) : std::move(part), !multi);
        if (multi && config.emit_compound) {
            emit(config.lowercase ? to_lower(word) : std::string(word), false);
        }
    }
    return tokens;
}

}  // namespace bugloc
