#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <variant>

#include <nlohmann/json_fwd.hpp>

#include "driftbench/series.hpp"

namespace driftbench {

enum class DetectorKind { FFT, SR, PCI };

std::string_view to_string(DetectorKind kind);
DetectorKind detector_kind_from(std::string_view name);

/// Low-pass reconstruction: the DC term plus the `keep_components` lowest harmonics
/// (and their conjugate mirrors) are kept, so keep_components = floor(n/2) is lossless.
struct FftParams {
    std::size_t keep_components = 10;
    friend bool operator==(const FftParams&, const FftParams&) = default;
};

struct SrParams {
    std::size_t avg_filter_len = 3;  // q: trailing mean over the log-amplitude spectrum
    std::size_t score_window = 21;   // m: trailing mean of the saliency map
    double tau = 3.0;                // relative saliency threshold
    std::size_t context_len = 128;   // training points prepended when classifying
    friend bool operator==(const SrParams&, const SrParams&) = default;
};

struct PciParams {
    std::size_t k = 10;   // even; k/2 neighbours each side
    double alpha = 0.05;  // two-sided miss probability of the interval
    friend bool operator==(const PciParams&, const PciParams&) = default;
};

using DetectorParams = std::variant<FftParams, SrParams, PciParams>;

DetectorKind kind_of(const DetectorParams& params);
DetectorParams default_params(DetectorKind kind);

/// Throws ConfigError (rooted at `path`) when a parameter is out of range.
void validate(const DetectorParams& params, const std::string& path = "");
DetectorParams detector_params_from_json(DetectorKind kind, const nlohmann::json& j,
                                         const std::string& path = "");
nlohmann::json to_json(const DetectorParams& params);

/// Amplitude floor applied before logarithms and phase extraction.
inline constexpr double kAmplitudeFloor = 1e-8;

Values fft_reconstruct(std::span<const double> values, const FftParams& params);

/// |value - low-pass reconstruction| per point.
Values fft_score(std::span<const double> values, const FftParams& params);

/// Largest training score; test points with a strictly larger score are anomalous.
double calibrate_threshold(std::span<const double> train_scores);

Values sr_saliency(std::span<const double> values, const SrParams& params);

/// Point i is anomalous iff (S_i - mean_m(S)_i) / max(mean_m(S)_i, floor) > tau, with
/// mean_m the trailing mean over the last m saliency values (inclusive).
Labels sr_detect(std::span<const double> values, const SrParams& params);

/// Two-sided standard normal quantile z with P(|Z| > z) = alpha.
double normal_two_sided_quantile(double alpha);

/// Prediction-interval test against the k nearest in-range neighbours. Runs the per-point
/// loop in parallel; pci_detect_serial is the reference it must match bit-for-bit.
Labels pci_detect(std::span<const double> values, const PciParams& params);
Labels pci_detect_serial(std::span<const double> values, const PciParams& params);

/// Shortest window a detector accepts.
std::size_t min_window(const DetectorParams& params);

struct FittedDetector {
    DetectorParams params;
    double threshold = 0.0;  // FFT only; SR and PCI use relative rules
    IndexRange train_range;
    Values context;  // SR only: trailing cleaned training points

    DetectorKind kind() const { return kind_of(params); }
};

/// Fits on the training range after interpolating over labeled anomalies.
FittedDetector fit(const DetectorParams& params, const LabeledSeries& series,
                   IndexRange train_range);

/// Per-point predictions for one batch. A batch shorter than min_window is scored inside a
/// window widened backwards to min_window points; only its own decisions are returned.
Labels classify(const FittedDetector& model, const LabeledSeries& series, const Batch& batch);
Labels classify(const FittedDetector& model, std::span<const double> window);

}  // namespace driftbench
