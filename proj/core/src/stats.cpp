#include "bugloc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace bugloc {

namespace {

constexpr std::size_t kExactLimit = 20;
constexpr std::size_t kMcNemarExactLimit = 25;

double binomial(std::size_t n, std::size_t k) {
    double r = 1.0;
    for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return std::round(r);
}

}  // namespace

MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("mann_whitney_u: empty sample");
    const std::size_t na = a.size();
    const std::size_t nb = b.size();
    const std::size_t n = na + nb;

    std::vector<std::pair<double, bool>> pooled;  // value, from a
    pooled.reserve(n);
    for (double v : a) pooled.emplace_back(v, true);
    for (double v : b) pooled.emplace_back(v, false);
    std::sort(pooled.begin(), pooled.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });

    // Doubled midranks keep everything in integers.
    std::vector<std::int64_t> rank2(n);
    double tie_term = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && pooled[j].first == pooled[i].first) ++j;
        const auto t = static_cast<std::int64_t>(j - i);
        const auto doubled = static_cast<std::int64_t>(i + 1 + j);  // 2 * mean of ranks i+1..j
        for (std::size_t k = i; k < j; ++k) rank2[k] = doubled;
        tie_term += static_cast<double>(t * t * t - t);
        i = j;
    }

    std::int64_t sum2_a = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (pooled[i].second) sum2_a += rank2[i];
    const auto na_i = static_cast<std::int64_t>(na);
    const auto nb_i = static_cast<std::int64_t>(nb);
    const std::int64_t u2_a = sum2_a - na_i * (na_i + 1);  // 2 * U_a

    MannWhitneyResult result;
    result.u_a = static_cast<double>(u2_a) / 2.0;
    result.u_b = static_cast<double>(na_i * nb_i) - result.u_a;
    result.u = std::min(result.u_a, result.u_b);

    if (pooled.front().first == pooled.back().first) {
        result.degenerate = true;
        result.exact = n <= kExactLimit;
        result.p = 1.0;
        return result;
    }

    const std::int64_t mean2 = na_i * nb_i;  // 2 * E[U]
    const std::int64_t observed = std::llabs(u2_a - mean2);

    if (n <= kExactLimit) {
        // ways[j][s]: subsets of size j whose doubled rank sum is s.
        const std::int64_t max_sum = std::accumulate(rank2.begin(), rank2.end(), std::int64_t{0});
        std::vector<std::vector<double>> ways(na + 1, std::vector<double>(static_cast<std::size_t>(max_sum) + 1, 0.0));
        ways[0][0] = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto r = static_cast<std::size_t>(rank2[i]);
            for (std::size_t j = std::min(i + 1, na); j >= 1; --j) {
                auto& dst = ways[j];
                const auto& src = ways[j - 1];
                for (std::size_t s = static_cast<std::size_t>(max_sum); s >= r; --s) {
                    dst[s] += src[s - r];
                    if (s == r) break;
                }
            }
        }
        double extreme = 0.0;
        double total = 0.0;
        for (std::size_t s = 0; s <= static_cast<std::size_t>(max_sum); ++s) {
            const double w = ways[na][s];
            if (w == 0.0) continue;
            total += w;
            const std::int64_t u2 = static_cast<std::int64_t>(s) - na_i * (na_i + 1);
            if (std::llabs(u2 - mean2) >= observed) extreme += w;
        }
        result.exact = true;
        result.p = std::min(1.0, extreme / total);
        return result;
    }

    const double nd = static_cast<double>(n);
    const double variance = static_cast<double>(na * nb) / 12.0 *
                            ((nd + 1.0) - tie_term / (nd * (nd - 1.0)));
    const double deviation = std::max(0.0, std::abs(result.u_a - static_cast<double>(na * nb) / 2.0) - 0.5);
    const double z = variance > 0.0 ? deviation / std::sqrt(variance) : 0.0;
    result.exact = false;
    result.p = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
    return result;
}

McNemarResult mcnemar(std::size_t b, std::size_t c) {
    McNemarResult result;
    result.b = b;
    result.c = c;
    const std::size_t n = b + c;
    if (n == 0) {
        result.exact = true;
        result.p = 1.0;
        return result;
    }
    if (n < kMcNemarExactLimit) {
        const std::size_t lo = std::min(b, c);
        double tail = 0.0;
        for (std::size_t i = 0; i <= lo; ++i) tail += binomial(n, i);
        result.statistic = static_cast<double>(lo);
        result.p = std::min(1.0, 2.0 * tail / std::ldexp(1.0, static_cast<int>(n)));
        result.exact = true;
        return result;
    }
    const double diff = std::abs(static_cast<double>(b) - static_cast<double>(c)) - 1.0;
    result.statistic = diff * diff / static_cast<double>(n);
    result.p = std::min(1.0, std::erfc(std::sqrt(result.statistic / 2.0)));
    result.exact = false;
    return result;
}

McNemarResult mcnemar(std::span<const std::pair<bool, bool>> paired) {
    std::size_t b = 0;
    std::size_t c = 0;
    for (const auto& [first, second] : paired) {
        if (first && !second) ++b;
        if (!first && second) ++c;
    }
    return mcnemar(b, c);
}

std::string_view to_string(EffectMagnitude m) {
    switch (m) {
        case EffectMagnitude::negligible: return "negligible";
        case EffectMagnitude::small: return "small";
        case EffectMagnitude::medium: return "medium";
        case EffectMagnitude::large: return "large";
    }
    return "negligible";
}

EffectMagnitude effect_magnitude(double delta) {
    const double d = std::abs(delta);
    if (d < 0.147) return EffectMagnitude::negligible;
    if (d < 0.33) return EffectMagnitude::small;
    if (d < 0.474) return EffectMagnitude::medium;
    return EffectMagnitude::large;
}

CliffsDelta cliffs_delta(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("cliffs_delta: empty sample");
    std::vector<double> sorted_b(b.begin(), b.end());
    std::sort(sorted_b.begin(), sorted_b.end());
    std::int64_t dominance = 0;
    for (double x : a) {
        const auto below = std::lower_bound(sorted_b.begin(), sorted_b.end(), x) - sorted_b.begin();
        const auto above = sorted_b.end() - std::upper_bound(sorted_b.begin(), sorted_b.end(), x);
        dominance += below - above;
    }
    CliffsDelta result;
    result.delta = static_cast<double>(dominance) / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
    result.magnitude = effect_magnitude(result.delta);
    return result;
}

}  // namespace bugloc
