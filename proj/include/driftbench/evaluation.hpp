#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "driftbench/fedd.hpp"
#include "driftbench/series.hpp"

namespace driftbench {

struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;

    std::size_t total() const { return tp + fp + fn + tn; }
    ConfusionCounts& operator+=(const ConfusionCounts& o) {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        tn += o.tn;
        return *this;
    }
    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct MetricTriple {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    friend bool operator==(const MetricTriple&, const MetricTriple&) = default;
};

/// How a segment whose first positive comes after the tolerated delay is scored.
enum class LatePolicy {
    ZeroMissed,  // the whole segment is cleared: neither TP nor FP
    KeepRaw,     // raw predictions inside the segment are kept pointwise
};

/// Point-adjust with a detection delay: a ground-truth segment [s, e] is credited in full
/// when some prediction falls in [s, min(e, s + delay)].
Labels adjust_predictions(std::span<const std::uint8_t> labels, std::span<const std::uint8_t> preds,
                          std::size_t delay, LatePolicy policy = LatePolicy::ZeroMissed);

ConfusionCounts confusion(std::span<const std::uint8_t> labels,
                          std::span<const std::uint8_t> adjusted);

/// Ratios with the 0/0 -> 0 convention.
MetricTriple metrics(const ConfusionCounts& c);

/// Metrics after adjustment at each delay 0..=max_delay.
std::vector<MetricTriple> delay_curve(std::span<const std::uint8_t> labels,
                                      std::span<const std::uint8_t> preds, std::size_t max_delay,
                                      LatePolicy policy = LatePolicy::ZeroMissed);

/// Unweighted mean across series, metric by metric.
MetricTriple aggregate(std::span<const MetricTriple> per_series);

struct WilcoxonResult {
    std::size_t n = 0;       // pairs with a non-zero difference
    double w_plus = 0.0;     // rank sum of positive differences (a > b)
    double w_minus = 0.0;
    double statistic = 0.0;  // min(w_plus, w_minus)
    double p_value = 1.0;    // two-sided
    bool exact = false;
    bool significant = false;
    int direction = 0;       // +1 when a tends to exceed b, -1 the reverse, 0 balanced
};

inline constexpr std::size_t kWilcoxonExactMaxN = 20;
inline constexpr std::size_t kWilcoxonMinPairs = 5;

/// Two-sided signed-rank test on a - b. Zero differences are dropped; tied magnitudes share
/// average ranks. The null distribution is enumerated exactly up to kWilcoxonExactMaxN pairs,
/// beyond that a continuity-corrected normal approximation with tie correction is used.
/// Throws Error("insufficient pairs ...") with fewer than kWilcoxonMinPairs non-zero pairs.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                    double alpha = 0.10);

struct ComparisonResult {
    std::string scenario_a;
    std::string scenario_b;
    std::string metric;
    std::vector<double> values_a;
    std::vector<double> values_b;
    WilcoxonResult test;
};

/// Fraction of series in drift state for each period. Series without a signal for a period
/// are left out of that period's denominator. With `first_drift_only`, only the first drift
/// signal of each series counts.
std::vector<double> drift_period_summary(
    const std::vector<std::vector<fedd::DriftSignal>>& signals_per_series,
    bool first_drift_only = false);

}  // namespace driftbench
