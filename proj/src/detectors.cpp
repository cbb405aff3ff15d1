#include "driftbench/detectors.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "driftbench/fft.hpp"
#include "driftbench/json_fields.hpp"

namespace driftbench {

std::string_view to_string(DetectorKind kind) {
    switch (kind) {
        case DetectorKind::FFT: return "fft";
        case DetectorKind::SR: return "sr";
        case DetectorKind::PCI: return "pci";
    }
    return "";
}

DetectorKind detector_kind_from(std::string_view name) {
    if (name == "fft" || name == "FFT") return DetectorKind::FFT;
    if (name == "sr" || name == "SR") return DetectorKind::SR;
    if (name == "pci" || name == "PCI") return DetectorKind::PCI;
    throw Error(fmt::format("unknown detector kind '{}' (fft|sr|pci)", name));
}

DetectorKind kind_of(const DetectorParams& params) {
    return static_cast<DetectorKind>(params.index());
}

DetectorParams default_params(DetectorKind kind) {
    switch (kind) {
        case DetectorKind::FFT: return FftParams{};
        case DetectorKind::SR: return SrParams{};
        case DetectorKind::PCI: return PciParams{};
    }
    throw Error("unknown detector kind");
}

void validate(const DetectorParams& params, const std::string& path) {
    using json_fields::child;
    if (const auto* p = std::get_if<FftParams>(&params)) {
        if (p->keep_components < 1) {
            throw ConfigError(child(path, "keep_components"), "keep_components must be >= 1");
        }
    } else if (const auto* p = std::get_if<SrParams>(&params)) {
        if (p->avg_filter_len < 1) {
            throw ConfigError(child(path, "avg_filter_len"), "avg_filter_len must be >= 1");
        }
        if (p->score_window < 1) {
            throw ConfigError(child(path, "score_window"), "score_window must be >= 1");
        }
        if (!(p->tau > 0.0) || !std::isfinite(p->tau)) {
            throw ConfigError(child(path, "tau"), "tau must be > 0");
        }
    } else if (const auto* p = std::get_if<PciParams>(&params)) {
        if (p->k < 2 || p->k % 2 != 0) {
            throw ConfigError(child(path, "k"), "k must be an even count >= 2");
        }
        if (!(p->alpha > 0.0 && p->alpha < 1.0)) {
            throw ConfigError(child(path, "alpha"), "alpha must be in (0, 1)");
        }
    }
}

DetectorParams detector_params_from_json(DetectorKind kind, const nlohmann::json& j,
                                         const std::string& path) {
    using json_fields::optional;
    json_fields::require_object(j, path);
    DetectorParams params = default_params(kind);
    if (auto* p = std::get_if<FftParams>(&params)) {
        p->keep_components = optional<std::size_t>(j, "keep_components", path, p->keep_components);
    } else if (auto* p = std::get_if<SrParams>(&params)) {
        p->avg_filter_len = optional<std::size_t>(j, "avg_filter_len", path, p->avg_filter_len);
        p->score_window = optional<std::size_t>(j, "score_window", path, p->score_window);
        p->tau = optional<double>(j, "tau", path, p->tau);
        p->context_len = optional<std::size_t>(j, "context_len", path, p->context_len);
    } else if (auto* p = std::get_if<PciParams>(&params)) {
        p->k = optional<std::size_t>(j, "k", path, p->k);
        p->alpha = optional<double>(j, "alpha", path, p->alpha);
    }
    validate(params, path);
    return params;
}

nlohmann::json to_json(const DetectorParams& params) {
    return std::visit(
        [](const auto& p) -> nlohmann::json {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, FftParams>) {
                return {{"keep_components", p.keep_components}};
            } else if constexpr (std::is_same_v<T, SrParams>) {
                return {{"avg_filter_len", p.avg_filter_len},
                        {"score_window", p.score_window},
                        {"tau", p.tau},
                        {"context_len", p.context_len}};
            } else {
                return {{"k", p.k}, {"alpha", p.alpha}};
            }
        },
        params);
}

// --- FFT ---------------------------------------------------------------------

Values fft_reconstruct(std::span<const double> values, const FftParams& params) {
    const std::size_t n = values.size();
    const std::size_t keep = params.keep_components;
    if (keep < 1) throw Error("FFT keep_components must be >= 1");
    if (n < 2 * keep) {
        throw Error(fmt::format("FFT window of {} points is shorter than 2*keep_components = {}",
                                n, 2 * keep));
    }
    auto spectrum = fft::forward(values);
    for (std::size_t f = 0; f < n; ++f) {
        if (std::min(f, n - f) > keep) spectrum[f] = 0.0;
    }
    const auto back = fft::inverse(spectrum);
    Values out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = back[i].real();
    return out;
}

Values fft_score(std::span<const double> values, const FftParams& params) {
    auto recon = fft_reconstruct(values, params);
    for (std::size_t i = 0; i < recon.size(); ++i) recon[i] = std::abs(values[i] - recon[i]);
    return recon;
}

double calibrate_threshold(std::span<const double> train_scores) {
    if (train_scores.empty()) throw Error("cannot calibrate a threshold on no scores");
    return *std::max_element(train_scores.begin(), train_scores.end());
}

// --- Spectral residual -------------------------------------------------------

namespace {

/// out[i] = mean(x[max(0, i-w+1) ..= i])
Values trailing_mean(std::span<const double> x, std::size_t w) {
    Values out(x.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sum += x[i];
        if (i >= w) sum -= x[i - w];
        out[i] = sum / static_cast<double>(std::min(i + 1, w));
    }
    return out;
}

}  // namespace

Values sr_saliency(std::span<const double> values, const SrParams& params) {
    const std::size_t n = values.size();
    if (params.avg_filter_len < 1) throw Error("SR avg_filter_len must be >= 1");
    if (n < params.avg_filter_len || n == 0) {
        throw Error(fmt::format("SR window of {} points is shorter than avg_filter_len {}", n,
                                params.avg_filter_len));
    }
    auto spectrum = fft::forward(values);
    Values log_amp(n);
    Values amp(n);
    for (std::size_t f = 0; f < n; ++f) {
        amp[f] = std::abs(spectrum[f]);
        log_amp[f] = std::log(std::max(amp[f], kAmplitudeFloor));
    }
    const auto smoothed = trailing_mean(log_amp, params.avg_filter_len);
    for (std::size_t f = 0; f < n; ++f) {
        // Lines below the floor carry no usable phase and are dropped.
        spectrum[f] = amp[f] > kAmplitudeFloor
                          ? std::exp(log_amp[f] - smoothed[f]) * (spectrum[f] / amp[f])
                          : fft::Complex{0.0, 0.0};
    }
    const auto back = fft::inverse(spectrum);
    Values saliency(n);
    for (std::size_t i = 0; i < n; ++i) saliency[i] = std::abs(back[i]);
    return saliency;
}

Labels sr_detect(std::span<const double> values, const SrParams& params) {
    if (params.score_window < 1) throw Error("SR score_window must be >= 1");
    const auto saliency = sr_saliency(values, params);
    const auto local = trailing_mean(saliency, params.score_window);
    Labels out(values.size(), 0);
    for (std::size_t i = 0; i < saliency.size(); ++i) {
        const double ratio = (saliency[i] - local[i]) / std::max(local[i], kAmplitudeFloor);
        out[i] = ratio > params.tau ? 1 : 0;
    }
    return out;
}

// --- PCI ---------------------------------------------------------------------

double normal_two_sided_quantile(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error("alpha must be in (0, 1)");
    return boost::math::quantile(boost::math::normal_distribution<double>(0.0, 1.0),
                                 1.0 - alpha / 2.0);
}

namespace {

void check_pci(std::span<const double> values, const PciParams& params) {
    if (params.k < 2 || params.k % 2 != 0) throw Error("PCI k must be an even count >= 2");
    if (values.size() < params.k + 1) {
        throw Error(fmt::format("PCI window of {} points needs at least k+1 = {}", values.size(),
                                params.k + 1));
    }
}

std::uint8_t pci_point(std::span<const double> values, std::size_t i, std::size_t k,
                       double z_times_inflation) {
    const std::size_t n = values.size();
    const std::size_t half = k / 2;
    const std::size_t start = std::min(i > half ? i - half : 0, n - k - 1);
    double lo_v = values[start == i ? start + 1 : start];
    double hi_v = lo_v;
    double sum = 0.0;
    for (std::size_t j = start; j <= start + k; ++j) {
        if (j == i) continue;
        sum += values[j];
        lo_v = std::min(lo_v, values[j]);
        hi_v = std::max(hi_v, values[j]);
    }
    const double v = values[i];
    if (lo_v == hi_v) return v != lo_v ? 1 : 0;  // degenerate interval
    const double mean = sum / static_cast<double>(k);
    double ss = 0.0;
    for (std::size_t j = start; j <= start + k; ++j) {
        if (j == i) continue;
        const double d = values[j] - mean;
        ss += d * d;
    }
    const double half_width = z_times_inflation * std::sqrt(ss / static_cast<double>(k - 1));
    return (v < mean - half_width || v > mean + half_width) ? 1 : 0;
}

double interval_scale(const PciParams& params) {
    const double k = static_cast<double>(params.k);
    return normal_two_sided_quantile(params.alpha) * std::sqrt(1.0 + 1.0 / k);
}

}  // namespace

Labels pci_detect_serial(std::span<const double> values, const PciParams& params) {
    check_pci(values, params);
    const double scale = interval_scale(params);
    Labels out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = pci_point(values, i, params.k, scale);
    return out;
}

Labels pci_detect(std::span<const double> values, const PciParams& params) {
    check_pci(values, params);
    const double scale = interval_scale(params);
    Labels out(values.size());
    const auto n = static_cast<std::ptrdiff_t>(values.size());
#pragma omp parallel for schedule(static) if (n > 4096)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        out[i] = pci_point(values, static_cast<std::size_t>(i), params.k, scale);
    }
    return out;
}

// --- Lifecycle ---------------------------------------------------------------

std::size_t min_window(const DetectorParams& params) {
    return std::visit(
        [](const auto& p) -> std::size_t {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, FftParams>) {
                return 2 * p.keep_components;
            } else if constexpr (std::is_same_v<T, SrParams>) {
                return std::max<std::size_t>(p.avg_filter_len, 1);
            } else {
                return p.k + 1;
            }
        },
        params);
}

FittedDetector fit(const DetectorParams& params, const LabeledSeries& series,
                   IndexRange train_range) {
    if (train_range.empty() || train_range.end > series.size()) {
        throw Error(fmt::format("series '{}': invalid training range [{}, {})", series.id(),
                                train_range.begin, train_range.end));
    }
    const auto clean = remove_anomalies_interpolate(series, train_range);
    FittedDetector model{params, 0.0, train_range, {}};
    if (const auto* p = std::get_if<FftParams>(&params)) {
        model.threshold = calibrate_threshold(fft_score(clean, *p));
    } else if (const auto* p = std::get_if<SrParams>(&params)) {
        const std::size_t take = std::min(p->context_len, clean.size());
        model.context.assign(clean.end() - static_cast<std::ptrdiff_t>(take), clean.end());
    }
    return model;
}

Labels classify(const FittedDetector& model, std::span<const double> window) {
    const std::size_t minimum = min_window(model.params);
    if (window.size() < minimum) {
        throw Error(fmt::format("{} detector needs at least {} points, batch has {}",
                                to_string(model.kind()), minimum, window.size()));
    }
    if (const auto* p = std::get_if<FftParams>(&model.params)) {
        const auto scores = fft_score(window, *p);
        Labels out(scores.size());
        for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] > model.threshold;
        return out;
    }
    if (const auto* p = std::get_if<SrParams>(&model.params)) {
        Values joined(model.context);
        joined.insert(joined.end(), window.begin(), window.end());
        const auto all = sr_detect(joined, *p);
        return Labels(all.end() - static_cast<std::ptrdiff_t>(window.size()), all.end());
    }
    return pci_detect(window, std::get<PciParams>(model.params));
}

Labels classify(const FittedDetector& model, const LabeledSeries& series, const Batch& batch) {
    try {
        const std::size_t minimum = min_window(model.params);
        if (batch.size() >= minimum || batch.end < minimum) {
            return classify(model, series.values(batch.range()));
        }
        // Short trailing batch: score it together with the points just before it.
        const auto all = classify(model, series.values({batch.end - minimum, batch.end}));
        return Labels(all.end() - static_cast<std::ptrdiff_t>(batch.size()), all.end());
    } catch (const Error& e) {
        throw Error(fmt::format("series '{}', batch {}: {}", series.id(), batch.index, e.what()));
    }
}

}  // namespace driftbench
