#include "driftbench/fedd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace driftbench::fedd {

namespace {

double mean_of(std::span<const double> x) {
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

/// Sum of squared deviations; zero means a degenerate (constant) window.
double centered_sum_squares(std::span<const double> x, double mean) {
    double ss = 0.0;
    for (const double v : x) ss += (v - mean) * (v - mean);
    return ss;
}

void require_spread(std::span<const double> x) {
    if (x.size() < 2) throw Error("degenerate window: fewer than 2 points");
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    if (*lo == *hi) throw Error("degenerate window: zero variance");
}

}  // namespace

const std::array<std::string_view, kFeatureCount>& feature_names() {
    static const std::array<std::string_view, kFeatureCount> names = {
        "acf1",  "acf2",  "acf3",     "acf4",     "acf5",          "pacf1",
        "pacf2", "pacf3", "pacf4",    "pacf5",    "variance",      "skewness",
        "kurtosis", "turning_point_rate", "bicorrelation1", "bicorrelation2", "bicorrelation3",
        "mutual_information"};
    return names;
}

double acf(std::span<const double> x, std::size_t lag) {
    if (lag < 1 || x.size() <= lag) {
        throw Error(fmt::format("acf lag {} needs more than {} points", lag, x.size()));
    }
    require_spread(x);
    const double m = mean_of(x);
    const double denom = centered_sum_squares(x, m);
    double num = 0.0;
    for (std::size_t t = 0; t + lag < x.size(); ++t) num += (x[t] - m) * (x[t + lag] - m);
    return std::clamp(num / denom, -1.0, 1.0);
}

std::vector<double> pacf(std::span<const double> x, std::size_t max_lag) {
    if (max_lag < 1 || x.size() <= max_lag) {
        throw Error(fmt::format("pacf up to lag {} needs more than {} points", max_lag, x.size()));
    }
    std::vector<double> r(max_lag + 1);
    for (std::size_t k = 1; k <= max_lag; ++k) r[k] = acf(x, k);

    // Durbin-Levinson: phi[j] holds phi_{k,j} for the current order k.
    std::vector<double> out(max_lag);
    std::vector<double> phi(max_lag + 1, 0.0);
    std::vector<double> prev(max_lag + 1, 0.0);
    for (std::size_t k = 1; k <= max_lag; ++k) {
        double num = r[k];
        double den = 1.0;
        for (std::size_t j = 1; j < k; ++j) {
            num -= prev[j] * r[k - j];
            den -= prev[j] * r[j];
        }
        const double phi_kk = k == 1 ? r[1] : (den != 0.0 ? num / den : 0.0);
        phi[k] = phi_kk;
        for (std::size_t j = 1; j < k; ++j) phi[j] = prev[j] - phi_kk * prev[k - j];
        out[k - 1] = std::clamp(phi_kk, -1.0, 1.0);
        prev = phi;
    }
    return out;
}

double sample_variance(std::span<const double> x) {
    if (x.size() < 2) throw Error("variance needs at least 2 points");
    return centered_sum_squares(x, mean_of(x)) / static_cast<double>(x.size() - 1);
}

double skewness(std::span<const double> x) {
    require_spread(x);
    const double m = mean_of(x);
    double m2 = 0.0;
    double m3 = 0.0;
    for (const double v : x) {
        const double d = v - m;
        m2 += d * d;
        m3 += d * d * d;
    }
    const double n = static_cast<double>(x.size());
    m2 /= n;
    m3 /= n;
    return m3 / std::pow(m2, 1.5);
}

double excess_kurtosis(std::span<const double> x) {
    require_spread(x);
    const double m = mean_of(x);
    double m2 = 0.0;
    double m4 = 0.0;
    for (const double v : x) {
        const double d2 = (v - m) * (v - m);
        m2 += d2;
        m4 += d2 * d2;
    }
    const double n = static_cast<double>(x.size());
    m2 /= n;
    m4 /= n;
    return m4 / (m2 * m2) - 3.0;
}

double turning_point_rate(std::span<const double> x) {
    if (x.size() < 3) throw Error("turning point rate needs at least 3 points");
    std::size_t turns = 0;
    for (std::size_t i = 1; i + 1 < x.size(); ++i) {
        const bool peak = x[i] > x[i - 1] && x[i] > x[i + 1];
        const bool trough = x[i] < x[i - 1] && x[i] < x[i + 1];
        if (peak || trough) ++turns;
    }
    return static_cast<double>(turns) / static_cast<double>(x.size() - 2);
}

double bicorrelation(std::span<const double> x, std::size_t lag) {
    if (lag < 1 || x.size() <= 2 * lag) {
        throw Error(fmt::format("bicorrelation lag {} needs more than {} points", lag, x.size()));
    }
    require_spread(x);
    const double m = mean_of(x);
    const double s = std::sqrt(centered_sum_squares(x, m) / static_cast<double>(x.size() - 1));
    const std::size_t terms = x.size() - 2 * lag;
    double sum = 0.0;
    for (std::size_t t = 0; t < terms; ++t) {
        sum += (x[t] - m) * (x[t + lag] - m) * (x[t + 2 * lag] - m);
    }
    return sum / static_cast<double>(terms) / (s * s * s);
}

double mutual_information(std::span<const double> a, std::span<const double> b,
                          std::size_t bins, double lo, double hi) {
    if (bins < 2) throw Error("mutual information needs at least 2 bins");
    if (a.size() != b.size() || a.empty()) throw Error("mutual information needs paired samples");
    if (!(hi > lo)) throw Error("degenerate window: single-valued data");
    const double width = (hi - lo) / static_cast<double>(bins);
    const auto bin_of = [&](double v) {
        const auto idx = static_cast<std::ptrdiff_t>(std::floor((v - lo) / width));
        return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(
            idx, 0, static_cast<std::ptrdiff_t>(bins) - 1));
    };
    std::vector<double> joint(bins * bins, 0.0);
    for (std::size_t t = 0; t < a.size(); ++t) joint[bin_of(a[t]) * bins + bin_of(b[t])] += 1.0;
    const double total = static_cast<double>(a.size());
    std::vector<double> row(bins, 0.0);
    std::vector<double> col(bins, 0.0);
    for (std::size_t i = 0; i < bins; ++i) {
        for (std::size_t j = 0; j < bins; ++j) {
            row[i] += joint[i * bins + j];
            col[j] += joint[i * bins + j];
        }
    }
    double mi = 0.0;
    for (std::size_t i = 0; i < bins; ++i) {
        for (std::size_t j = 0; j < bins; ++j) {
            const double c = joint[i * bins + j];
            if (c == 0.0) continue;
            mi += (c / total) * std::log(c * total / (row[i] * col[j]));
        }
    }
    return std::max(mi, 0.0);
}

double mutual_information(std::span<const double> x, std::size_t lag, std::size_t bins) {
    if (x.size() <= lag) {
        throw Error(fmt::format("mutual information lag {} needs more than {} points", lag,
                                x.size()));
    }
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    const std::size_t pairs = x.size() - lag;
    return mutual_information(x.subspan(0, pairs), x.subspan(lag, pairs), bins, *lo, *hi);
}

FeatureVector extract_features(std::span<const double> x) {
    if (x.size() < kMinFeatureWindow) {
        throw Error(fmt::format("feature window of {} points is shorter than {}", x.size(),
                                kMinFeatureWindow));
    }
    FeatureVector f{};
    std::size_t slot = 0;
    const auto put = [&](double v) {
        if (!std::isfinite(v)) {
            throw Error(fmt::format("feature '{}' is not finite", feature_names()[slot]));
        }
        f[slot++] = v;
    };
    const auto named = [&](auto&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            throw Error(fmt::format("feature '{}': {}", feature_names()[slot], e.what()));
        }
    };
    named([&] {
        for (std::size_t lag = 1; lag <= kAcfLags; ++lag) put(acf(x, lag));
    });
    named([&] {
        for (const double p : pacf(x, kPacfLags)) put(p);
    });
    named([&] { put(sample_variance(x)); });
    named([&] { put(skewness(x)); });
    named([&] { put(excess_kurtosis(x)); });
    named([&] { put(turning_point_rate(x)); });
    named([&] {
        for (std::size_t lag = 1; lag <= kBicorrelationLags; ++lag) put(bicorrelation(x, lag));
    });
    named([&] { put(mutual_information(x, kMutualInformationLag, kMutualInformationBins)); });
    return f;
}

double feature_dissimilarity(const FeatureVector& ref, const FeatureVector& cur) {
    double dot = 0.0;
    double nr = 0.0;
    double nc = 0.0;
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        if (!std::isfinite(ref[i]) || !std::isfinite(cur[i])) {
            throw Error("feature vectors must be finite");
        }
        dot += ref[i] * cur[i];
        nr += ref[i] * ref[i];
        nc += cur[i] * cur[i];
    }
    if (nr == 0.0 || nc == 0.0) throw Error("cosine distance of a zero-norm feature vector");
    return std::clamp(1.0 - dot / (std::sqrt(nr) * std::sqrt(nc)), 0.0, 2.0);
}

std::string_view to_string(DriftStatus status) {
    switch (status) {
        case DriftStatus::Stable: return "stable";
        case DriftStatus::Warning: return "warning";
        case DriftStatus::Drift: return "drift";
    }
    return "";
}

// --- ECDD --------------------------------------------------------------------

EcddState::EcddState(EcddConfig config, std::optional<double> z0)
    : config_(config), z0_(z0), z_(z0.value_or(0.0)) {
    if (!(config_.lambda > 0.0 && config_.lambda <= 1.0)) {
        throw Error("ECDD lambda must be in (0, 1]");
    }
    if (!(config_.warn_limit > 0.0) || !(config_.drift_limit > 0.0)) {
        throw Error("ECDD control limits must be positive");
    }
}

void EcddState::reset() { *this = EcddState(config_, z0_); }

double EcddState::sigma_z() const {
    const double lambda = config_.lambda;
    const double decay = std::pow(1.0 - lambda, 2.0 * static_cast<double>(t_));
    return std::sqrt(variance() * lambda / (2.0 - lambda) * (1.0 - decay));
}

DriftStatus EcddState::update(double d) {
    if (status_ == DriftStatus::Drift) throw Error("ECDD update after drift without reset");
    if (!std::isfinite(d) || d < 0.0) {
        throw Error(fmt::format("ECDD observation must be finite and >= 0, got {}", d));
    }
    const double lambda = config_.lambda;
    // An unseeded chart starts from its first observation.
    if (t_ == 0 && !z0_) z_ = d;
    z_ = (1.0 - lambda) * z_ + lambda * d;

    const std::size_t seen = t_;  // observations in the running moments
    ++t_;
    DriftStatus status = DriftStatus::Stable;
    if (seen >= config_.burn_in && seen >= 2) {
        const double var = m2_ / static_cast<double>(seen - 1);
        const double decay = std::pow(1.0 - lambda, 2.0 * static_cast<double>(t_));
        const double sigma = std::sqrt(var * lambda / (2.0 - lambda) * (1.0 - decay));
        // Rounding slack so a perfectly constant stream never alarms.
        const double slack = 1e-12 * (1.0 + std::abs(mean_));
        if (z_ > mean_ + config_.drift_limit * sigma + slack) {
            status = DriftStatus::Drift;
        } else if (z_ > mean_ + config_.warn_limit * sigma + slack) {
            status = DriftStatus::Warning;
        }
    }
    // Welford update with the new observation.
    const double delta = d - mean_;
    mean_ += delta / static_cast<double>(seen + 1);
    m2_ += delta * (d - mean_);
    status_ = status;
    return status;
}

std::pair<EcddState, DriftStatus> ecdd_update(EcddState state, double d) {
    const auto status = state.update(d);
    return {std::move(state), status};
}

// --- Monitor -----------------------------------------------------------------

namespace {

struct Reference {
    FeatureVector features{};
    double scale = 1.0;
};

std::vector<double> scaled(std::span<const double> x, double scale) {
    std::vector<double> out(x.begin(), x.end());
    for (auto& v : out) v /= scale;
    return out;
}

Reference make_reference(std::span<const double> x) {
    const double sd = std::sqrt(sample_variance(x));
    if (!(sd > 0.0)) throw Error("degenerate window: zero variance");
    return {extract_features(scaled(x, sd)), sd};
}

}  // namespace

std::vector<DriftSignal> fedd_monitor(const LabeledSeries& series, IndexRange train_range,
                                      std::span<const Batch> batches, const FeddConfig& config) {
    if (train_range.size() < kMinFeatureWindow) {
        throw Error(fmt::format("series '{}': training range of {} points is too short for FEDD "
                                "(needs {})",
                                series.id(), train_range.size(), kMinFeatureWindow));
    }
    const auto train = remove_anomalies_interpolate(series, train_range);
    const std::span<const double> all(train);

    // The reference comes from the first half of the training data and the chart is warmed
    // on batch-length windows sliding over the second half, so warm-up dissimilarities are
    // drawn from data the reference never saw, as test batches are.
    const std::size_t batch_len = batches.empty() ? train.size() / 2 : batches.front().size();
    const std::size_t half = train.size() / 2;
    const bool split = half >= kMinFeatureWindow && train.size() - half >= batch_len &&
                       batch_len >= kMinFeatureWindow;
    const auto ref_values = split ? all.first(half) : all;
    Reference ref;
    try {
        ref = make_reference(ref_values);
    } catch (const Error& e) {
        throw Error(fmt::format("series '{}': reference window: {}", series.id(), e.what()));
    }

    std::vector<std::size_t> starts;
    const std::size_t window = std::clamp<std::size_t>(batch_len, kMinFeatureWindow, train.size());
    if (split) {
        const std::size_t stride = std::max<std::size_t>(1, window / 4);
        for (std::size_t s = half; s + window <= train.size(); s += stride) starts.push_back(s);
    } else {
        spdlog::debug("series '{}': training range too short to separate reference and warm-up",
                      series.id());
        const std::size_t slots = config.ecdd.burn_in;
        const std::size_t span = train.size() - window;
        for (std::size_t j = 0; j < slots; ++j) {
            starts.push_back(slots > 1 ? (span * j + (slots - 1) / 2) / (slots - 1) : span);
        }
    }
    std::vector<double> warmup;
    for (const auto s : starts) {
        try {
            warmup.push_back(feature_dissimilarity(
                ref.features, extract_features(scaled(all.subspan(s, window), ref.scale))));
        } catch (const Error& e) {
            spdlog::debug("series '{}': warm-up window at {} skipped: {}", series.id(), s,
                          e.what());
        }
    }
    EcddConfig warm_config = config.ecdd;
    warm_config.burn_in = std::max(config.ecdd.burn_in, warmup.size());
    EcddState chart(warm_config);
    for (const double d : warmup) chart.update(d);

    std::vector<DriftSignal> signals;
    signals.reserve(batches.size());
    for (const auto& batch : batches) {
        const auto values = series.values(batch.range());
        DriftStatus status = DriftStatus::Stable;
        try {
            const auto f = extract_features(scaled(values, ref.scale));
            status = chart.update(feature_dissimilarity(ref.features, f));
            if (status == DriftStatus::Drift) {
                ref = make_reference(values);
                chart = EcddState(config.ecdd);
            } else if (config.reference == ReferencePolicy::Rolling) {
                ref = make_reference(values);
            }
        } catch (const Error& e) {
            spdlog::info("series '{}', batch {}: drift monitor skipped degenerate window: {}",
                         series.id(), batch.index, e.what());
            if (chart.status() == DriftStatus::Drift) chart = EcddState(config.ecdd);
        }
        signals.push_back({series.id(), batch.index, status});
    }
    return signals;
}

}  // namespace driftbench::fedd
