#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <utility>

namespace bugloc {

/// Two-sided significance threshold used for report markers.
inline constexpr double kSignificanceLevel = 0.05;

struct MannWhitneyResult {
    double u = 0.0;    // min(u_a, u_b)
    double u_a = 0.0;  // pairs (a_i > b_j) plus half the ties
    double u_b = 0.0;
    double p = 1.0;    // two-sided
    bool exact = false;
    bool degenerate = false;  // every observation identical
};

/// Mann-Whitney U with midranks. Exact permutation p-value when
/// |a| + |b| <= 20, otherwise the tie-corrected normal approximation with
/// continuity correction. Both samples must be non-empty.
MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b);

struct McNemarResult {
    std::size_t b = 0;  // only the first system succeeds
    std::size_t c = 0;  // only the second system succeeds
    double statistic = 0.0;
    double p = 1.0;
    bool exact = false;
};

/// Exact binomial test when b + c < 25, otherwise chi-squared with continuity
/// correction. p = 1 when there are no discordant pairs.
McNemarResult mcnemar(std::size_t b, std::size_t c);
McNemarResult mcnemar(std::span<const std::pair<bool, bool>> paired);

enum class EffectMagnitude { negligible, small, medium, large };

std::string_view to_string(EffectMagnitude m);

struct CliffsDelta {
    double delta = 0.0;
    EffectMagnitude magnitude = EffectMagnitude::negligible;
};

/// Thresholds 0.147 / 0.33 / 0.474 on |delta|.
EffectMagnitude effect_magnitude(double delta);
CliffsDelta cliffs_delta(std::span<const double> a, std::span<const double> b);

}  // namespace bugloc
