#include "driftbench/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace driftbench {

namespace {

void require_same_length(std::size_t a, std::size_t b) {
    if (a != b) throw Error(fmt::format("length mismatch: {} labels vs {} predictions", a, b));
}

double ratio(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

Labels adjust_predictions(std::span<const std::uint8_t> labels, std::span<const std::uint8_t> preds,
                          std::size_t delay, LatePolicy policy) {
    require_same_length(labels.size(), preds.size());
    Labels adjusted(preds.begin(), preds.end());
    for (const auto& seg : segments_from_labels(labels)) {
        const std::size_t window_end = seg.end - seg.start > delay ? seg.start + delay : seg.end;
        bool in_time = false;
        for (std::size_t i = seg.start; i <= window_end && !in_time; ++i) in_time = preds[i] != 0;
        if (in_time) {
            std::fill(adjusted.begin() + static_cast<std::ptrdiff_t>(seg.start),
                      adjusted.begin() + static_cast<std::ptrdiff_t>(seg.end) + 1, 1);
        } else if (policy == LatePolicy::ZeroMissed) {
            std::fill(adjusted.begin() + static_cast<std::ptrdiff_t>(seg.start),
                      adjusted.begin() + static_cast<std::ptrdiff_t>(seg.end) + 1, 0);
        }
    }
    return adjusted;
}

ConfusionCounts confusion(std::span<const std::uint8_t> labels,
                          std::span<const std::uint8_t> adjusted) {
    require_same_length(labels.size(), adjusted.size());
    ConfusionCounts c;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool truth = labels[i] != 0;
        const bool pred = adjusted[i] != 0;
        if (truth && pred) ++c.tp;
        else if (!truth && pred) ++c.fp;
        else if (truth) ++c.fn;
        else ++c.tn;
    }
    return c;
}

MetricTriple metrics(const ConfusionCounts& c) {
    MetricTriple m;
    m.precision = ratio(c.tp, c.tp + c.fp);
    m.recall = ratio(c.tp, c.tp + c.fn);
    const double sum = m.precision + m.recall;
    m.f1 = sum == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / sum;
    return m;
}

std::vector<MetricTriple> delay_curve(std::span<const std::uint8_t> labels,
                                      std::span<const std::uint8_t> preds, std::size_t max_delay,
                                      LatePolicy policy) {
    std::vector<MetricTriple> curve;
    curve.reserve(max_delay + 1);
    for (std::size_t d = 0; d <= max_delay; ++d) {
        curve.push_back(metrics(confusion(labels, adjust_predictions(labels, preds, d, policy))));
    }
    return curve;
}

MetricTriple aggregate(std::span<const MetricTriple> per_series) {
    if (per_series.empty()) throw Error("cannot aggregate an empty set of series");
    MetricTriple sum;
    for (const auto& m : per_series) {
        sum.precision += m.precision;
        sum.recall += m.recall;
        sum.f1 += m.f1;
    }
    const double n = static_cast<double>(per_series.size());
    return {sum.precision / n, sum.recall / n, sum.f1 / n};
}

// --- Wilcoxon ----------------------------------------------------------------

namespace {

/// Average ranks (1-based) of |d|, ties sharing the mean of their positions.
std::vector<double> average_ranks(const std::vector<double>& magnitudes) {
    const std::size_t n = magnitudes.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return magnitudes[a] < magnitudes[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && magnitudes[order[j + 1]] == magnitudes[order[i]]) ++j;
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

/// Exact two-sided p-value of W+ under random signs, by dynamic programming over doubled
/// (hence integral) ranks.
double exact_p_value(const std::vector<double>& ranks, double w_plus) {
    std::vector<std::size_t> doubled(ranks.size());
    std::size_t total = 0;
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        doubled[i] = static_cast<std::size_t>(std::lround(2.0 * ranks[i]));
        total += doubled[i];
    }
    std::vector<double> counts(total + 1, 0.0);
    counts[0] = 1.0;
    std::size_t reach = 0;
    for (const auto r : doubled) {
        reach += r;
        for (std::size_t s = reach; s >= r; --s) {
            counts[s] += counts[s - r];
            if (s == r) break;
        }
    }
    const auto observed = static_cast<std::size_t>(std::lround(2.0 * w_plus));
    double lower = 0.0;
    double upper = 0.0;
    for (std::size_t s = 0; s <= total; ++s) {
        if (s <= observed) lower += counts[s];
        if (s >= observed) upper += counts[s];
    }
    const double patterns = std::ldexp(1.0, static_cast<int>(ranks.size()));
    return std::min(1.0, 2.0 * std::min(lower, upper) / patterns);
}

double normal_p_value(const std::vector<double>& ranks, double w_plus) {
    const double n = static_cast<double>(ranks.size());
    const double mean = n * (n + 1.0) / 4.0;
    double variance = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0;
    std::vector<double> sorted(ranks);
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i);
        variance -= (t * t * t - t) / 48.0;
        i = j;
    }
    if (variance <= 0.0) return 1.0;
    const double z = std::max(0.0, std::abs(w_plus - mean) - 0.5) / std::sqrt(variance);
    return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

}  // namespace

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                    double alpha) {
    if (a.size() != b.size()) {
        throw Error(fmt::format("paired samples differ in length: {} vs {}", a.size(), b.size()));
    }
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error("alpha must be in (0, 1)");
    std::vector<double> diffs;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        if (!std::isfinite(d)) throw Error("paired samples must be finite");
        if (d != 0.0) diffs.push_back(d);
    }
    if (diffs.size() < kWilcoxonMinPairs) {
        throw Error(fmt::format("insufficient pairs: {} non-zero differences, need {}",
                                diffs.size(), kWilcoxonMinPairs));
    }
    std::vector<double> magnitudes(diffs.size());
    std::transform(diffs.begin(), diffs.end(), magnitudes.begin(),
                   [](double d) { return std::abs(d); });
    const auto ranks = average_ranks(magnitudes);

    WilcoxonResult r;
    r.n = diffs.size();
    for (std::size_t i = 0; i < diffs.size(); ++i) {
        (diffs[i] > 0.0 ? r.w_plus : r.w_minus) += ranks[i];
    }
    r.statistic = std::min(r.w_plus, r.w_minus);
    r.direction = r.w_plus > r.w_minus ? 1 : (r.w_plus < r.w_minus ? -1 : 0);
    r.exact = r.n <= kWilcoxonExactMaxN;
    r.p_value = r.exact ? exact_p_value(ranks, r.w_plus) : normal_p_value(ranks, r.w_plus);
    r.significant = r.p_value < alpha;
    return r;
}

std::vector<double> drift_period_summary(
    const std::vector<std::vector<fedd::DriftSignal>>& signals_per_series,
    bool first_drift_only) {
    std::size_t periods = 0;
    for (const auto& series : signals_per_series) {
        for (const auto& s : series) periods = std::max(periods, s.batch_index + 1);
    }
    std::vector<double> drifted(periods, 0.0);
    std::vector<double> present(periods, 0.0);
    for (const auto& series : signals_per_series) {
        bool seen_drift = false;
        std::vector<std::uint8_t> has(periods, 0);
        std::vector<const fedd::DriftSignal*> sorted;
        for (const auto& s : series) sorted.push_back(&s);
        std::sort(sorted.begin(), sorted.end(),
                  [](const auto* x, const auto* y) { return x->batch_index < y->batch_index; });
        for (const auto* s : sorted) {
            if (has[s->batch_index]) continue;
            has[s->batch_index] = 1;
            present[s->batch_index] += 1.0;
            if (s->status == fedd::DriftStatus::Drift && !(first_drift_only && seen_drift)) {
                drifted[s->batch_index] += 1.0;
                seen_drift = true;
            }
        }
    }
    std::vector<double> out(periods, 0.0);
    for (std::size_t p = 0; p < periods; ++p) {
        out[p] = present[p] > 0.0 ? drifted[p] / present[p] : 0.0;
    }
    return out;
}

}  // namespace driftbench
