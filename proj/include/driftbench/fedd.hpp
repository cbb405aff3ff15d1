#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "driftbench/series.hpp"

namespace driftbench::fedd {

// Feature layout. Changing any of these changes kFeatureCount and the serialized order.
inline constexpr std::size_t kAcfLags = 5;
inline constexpr std::size_t kPacfLags = 5;
inline constexpr std::size_t kBicorrelationLags = 3;
inline constexpr std::size_t kMutualInformationLag = 1;
inline constexpr std::size_t kMutualInformationBins = 8;
inline constexpr std::size_t kFeatureCount = kAcfLags + kPacfLags + 4 + kBicorrelationLags + 1;
inline constexpr std::size_t kMinFeatureWindow = 32;

/// acf 1..5, pacf 1..5, variance, skewness, excess kurtosis, turning-point rate,
/// bicorrelation 1..3, mutual information at lag 1.
using FeatureVector = std::array<double, kFeatureCount>;

const std::array<std::string_view, kFeatureCount>& feature_names();

double acf(std::span<const double> x, std::size_t lag);
std::vector<double> pacf(std::span<const double> x, std::size_t max_lag);
double sample_variance(std::span<const double> x);
double skewness(std::span<const double> x);
double excess_kurtosis(std::span<const double> x);
double turning_point_rate(std::span<const double> x);
double bicorrelation(std::span<const double> x, std::size_t lag);

/// Plug-in mutual information (nats) of (x_t, x_{t+lag}) over an equal-width
/// bins x bins histogram spanning the window's range.
double mutual_information(std::span<const double> x, std::size_t lag, std::size_t bins);

/// Same estimator for explicit pairs (a_t, b_t) binned over the shared range [lo, hi].
double mutual_information(std::span<const double> a, std::span<const double> b,
                          std::size_t bins, double lo, double hi);

FeatureVector extract_features(std::span<const double> x);

/// Cosine distance, in [0, 2].
double feature_dissimilarity(const FeatureVector& ref, const FeatureVector& cur);

enum class DriftStatus { Stable, Warning, Drift };
std::string_view to_string(DriftStatus status);

struct EcddConfig {
    double lambda = 0.2;
    double warn_limit = 2.0;
    double drift_limit = 3.0;
    std::size_t burn_in = 5;  // first observations only estimate the stream moments
};

/// EWMA control chart over a dissimilarity stream.
///
/// Each observation is first smoothed into z, then z is compared against limits built
/// from the mean and variance of the observations seen *before* it; the observation
/// joins those running moments afterwards. No status other than Stable is reported
/// during burn-in. After Drift the chart must be reset.
class EcddState {
public:
    explicit EcddState(EcddConfig config = {}, std::optional<double> z0 = std::nullopt);

    DriftStatus update(double d);
    void reset();

    const EcddConfig& config() const { return config_; }
    std::size_t t() const { return t_; }
    double z() const { return z_; }
    double mean() const { return mean_; }
    double variance() const { return t_ > 1 ? m2_ / static_cast<double>(t_ - 1) : 0.0; }
    DriftStatus status() const { return status_; }
    /// Standard deviation of z after the current number of updates.
    double sigma_z() const;

private:
    EcddConfig config_;
    std::optional<double> z0_;
    std::size_t t_ = 0;
    double z_ = 0.0;
    double mean_ = 0.0;
    double m2_ = 0.0;
    DriftStatus status_ = DriftStatus::Stable;
};

/// Functional form of EcddState::update.
std::pair<EcddState, DriftStatus> ecdd_update(EcddState state, double d);

struct DriftSignal {
    std::string series_id;
    std::size_t batch_index = 0;
    DriftStatus status = DriftStatus::Stable;
    friend bool operator==(const DriftSignal&, const DriftSignal&) = default;
};

enum class ReferencePolicy {
    ResetOnDrift,  // re-anchor reference and chart on the drift batch
    Rolling,       // every batch becomes the next reference; chart is only reset on drift
};

struct FeddConfig {
    EcddConfig ecdd;
    ReferencePolicy reference = ReferencePolicy::ResetOnDrift;
};

/// One signal per batch, in batch order.
///
/// The reference is the first half of the cleaned training range. The chart is warmed on
/// batch-length windows sliding over the second half (stride batch/4) and treats all of
/// them, but never fewer than `burn_in` observations, as burn-in; every test batch is then
/// monitored. Short training ranges fall back to `burn_in` windows spread over the whole
/// range. Windows are divided by the reference standard deviation before feature
/// extraction, which makes the variance feature relative to the reference. After a drift
/// the reference moves to the drift batch and a fresh chart burns in on later batches.
std::vector<DriftSignal> fedd_monitor(const LabeledSeries& series, IndexRange train_range,
                                      std::span<const Batch> batches,
                                      const FeddConfig& config = {});

}  // namespace driftbench::fedd
