#pragma once

// Brute-force references used by the unit and acceptance suites. Nothing here
// calls into the library code it is compared against.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

struct Scored {
    std::string path;
    double score;
};

// Okapi BM25 computed document by document from the raw token lists.
inline std::vector<Scored> bm25_rank(const std::vector<std::string>& paths,
                                     const std::vector<std::vector<std::string>>& docs,
                                     const std::vector<std::string>& query, std::size_t k, double k1 = 0.9,
                                     double b = 0.4) {
    const auto n = static_cast<double>(docs.size());
    double total_len = 0;
    for (const auto& d : docs) total_len += static_cast<double>(d.size());
    const double avg = total_len / n;

    const std::set<std::string> terms(query.begin(), query.end());
    std::map<std::string, double> df;
    for (const auto& t : terms)
        for (const auto& d : docs)
            if (std::find(d.begin(), d.end(), t) != d.end()) df[t] += 1;

    std::vector<Scored> out;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        double score = 0;
        for (const auto& t : terms) {
            const auto tf = static_cast<double>(std::count(docs[i].begin(), docs[i].end(), t));
            if (tf == 0) continue;
            const double idf = std::log(1.0 + (n - df[t] + 0.5) / (df[t] + 0.5));
            const double len = static_cast<double>(docs[i].size());
            score += idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * len / avg));
        }
        if (score > 0) out.push_back({paths[i], score});
    }
    std::sort(out.begin(), out.end(), [](const Scored& x, const Scored& y) {
        return x.score != y.score ? x.score > y.score : x.path < y.path;
    });
    if (out.size() > k) out.resize(k);
    return out;
}

// AP@K by definition: precision at every relevant position within the
// cutoff, divided by min(|relevant|, K).
inline double average_precision(const std::vector<std::string>& ranking, const std::set<std::string>& relevant,
                                std::size_t k) {
    double sum = 0;
    for (std::size_t pos = 1; pos <= std::min(k, ranking.size()); ++pos) {
        if (!relevant.count(ranking[pos - 1])) continue;
        std::size_t hits = 0;
        for (std::size_t j = 0; j < pos; ++j) hits += relevant.count(ranking[j]);
        sum += static_cast<double>(hits) / static_cast<double>(pos);
    }
    return sum / static_cast<double>(std::min(relevant.size(), k));
}

inline bool hit(const std::vector<std::string>& ranking, const std::set<std::string>& relevant, std::size_t k) {
    for (std::size_t i = 0; i < std::min(k, ranking.size()); ++i)
        if (relevant.count(ranking[i])) return true;
    return false;
}

// U counted over pairs: a > b scores 1, a == b scores 1/2.
inline double u_statistic(const std::vector<double>& a, const std::vector<double>& b) {
    double u = 0;
    for (double x : a)
        for (double y : b) u += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
    return u;
}

// Two-sided permutation p-value enumerating every split of the pooled sample.
inline double mann_whitney_exact_p(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> pooled(a);
    pooled.insert(pooled.end(), b.begin(), b.end());
    const std::size_t n = pooled.size();
    const double mean = static_cast<double>(a.size() * b.size()) / 2.0;
    const double observed = std::abs(u_statistic(a, b) - mean);
    std::uint64_t extreme = 0, total = 0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) != a.size()) continue;
        std::vector<double> x, y;
        for (std::size_t i = 0; i < n; ++i) ((mask >> i) & 1u ? x : y).push_back(pooled[i]);
        ++total;
        if (std::abs(u_statistic(x, y) - mean) >= observed - 1e-12) ++extreme;
    }
    return static_cast<double>(extreme) / static_cast<double>(total);
}

// Exact two-sided McNemar: binomial(b + c, 1/2) tail doubled and capped at 1.
inline double mcnemar_exact_p(std::size_t b, std::size_t c) {
    const std::size_t n = b + c;
    if (n == 0) return 1.0;
    const std::size_t low = std::min(b, c);
    double tail = 0;
    for (std::size_t i = 0; i <= low; ++i) {
        double coeff = 1;
        for (std::size_t j = 1; j <= i; ++j) coeff = coeff * static_cast<double>(n - i + j) / static_cast<double>(j);
        tail += coeff * std::pow(0.5, static_cast<double>(n));
    }
    return std::min(1.0, 2.0 * tail);
}

inline double cliffs_delta(const std::vector<double>& a, const std::vector<double>& b) {
    long long gt = 0, lt = 0;
    for (double x : a)
        for (double y : b) {
            if (x > y) ++gt;
            if (x < y) ++lt;
        }
    return static_cast<double>(gt - lt) / static_cast<double>(a.size() * b.size());
}

}  // namespace oracle
