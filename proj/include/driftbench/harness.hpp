#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "driftbench/detectors.hpp"
#include "driftbench/evaluation.hpp"
#include "driftbench/fedd.hpp"
#include "driftbench/series.hpp"

namespace driftbench {

enum class DataRegimeKind { Static, FullHistory, SlidingWindow };

struct DataRegime {
    DataRegimeKind kind = DataRegimeKind::Static;
    std::optional<std::size_t> window_len;  // SlidingWindow; defaults to the initial train length
    friend bool operator==(const DataRegime&, const DataRegime&) = default;
};

enum class FrequencyRegime { Blind, Informed };

enum class RetrainTrigger { Schedule, Drift };

std::string_view to_string(DataRegimeKind kind);
std::string_view to_string(FrequencyRegime freq);
std::string_view to_string(RetrainTrigger trigger);

/// "static", "blind+full_history", "informed+sliding_window", ...
std::string scenario_name(const DataRegime& data, FrequencyRegime freq);

struct RetrainEvent {
    std::size_t batch_index = 0;  // the batch after which the model was refit
    IndexRange train_range;
    RetrainTrigger trigger = RetrainTrigger::Schedule;
    friend bool operator==(const RetrainEvent&, const RetrainEvent&) = default;
};

/// Produces one drift signal per batch for informed retraining.
using DriftMonitor = std::function<std::vector<fedd::DriftSignal>(
    const LabeledSeries&, IndexRange train, std::span<const Batch> batches)>;

DriftMonitor fedd_drift_monitor(fedd::FeddConfig config = {});

struct RunConfig {
    DetectorParams detector = FftParams{};
    DataRegime data;
    FrequencyRegime frequency = FrequencyRegime::Blind;
    std::size_t batch_len = 168;
    std::uint64_t seed = 0;
};

struct RunRecord {
    std::string series_id;
    RunConfig config;
    IndexRange initial_train;
    std::vector<Batch> batches;
    std::vector<Labels> predictions;  // one vector per batch
    std::vector<RetrainEvent> retrains;
    std::vector<fedd::DriftSignal> drift_signals;  // informed runs only

    /// All batch predictions concatenated over the test range.
    Labels pooled_predictions() const;
};

/// Training range for the next refit after `completed` batches.
IndexRange plan_train_range(const DataRegime& regime, IndexRange initial_train,
                            std::span<const Batch> completed);

struct RetrainDecision {
    bool retrain = false;
    RetrainTrigger trigger = RetrainTrigger::Schedule;
};

RetrainDecision decide_retrain(FrequencyRegime freq, std::size_t batch_index,
                               std::span<const fedd::DriftSignal> signals);

/// Fits on the first half, then classifies batch by batch, refitting after a batch when
/// the frequency regime calls for it (never after the final batch). Refits use the
/// ground-truth labels of everything in the planned training range.
RunRecord run_series(const LabeledSeries& series, const RunConfig& config,
                     const DriftMonitor& monitor = {});

/// Series-level parallel driver; records come back in input order whatever `jobs` is.
/// A failing series yields an error string instead of a record.
struct SeriesOutcome {
    std::optional<RunRecord> record;
    std::string error;
};
std::vector<SeriesOutcome> run_corpus(std::span<const LabeledSeries> corpus,
                                      const RunConfig& config, const DriftMonitor& monitor,
                                      int jobs);
std::vector<SeriesOutcome> run_corpus_serial(std::span<const LabeledSeries> corpus,
                                             const RunConfig& config,
                                             const DriftMonitor& monitor);

// --- Grid search -------------------------------------------------------------

struct EvalConfig {
    std::size_t delay = 0;
    LatePolicy late_policy = LatePolicy::ZeroMissed;
};

struct GridSeriesResult {
    std::string series_id;
    Labels predictions;  // over the test half
    MetricTriple metrics;
};

struct GridRow {
    DetectorParams params;
    std::vector<GridSeriesResult> per_series;
    double mean_f1 = 0.0;
};

struct GridSearchResult {
    std::size_t best_index = 0;
    std::vector<GridRow> table;
    const DetectorParams& best() const { return table.at(best_index).params; }
};

/// Scores every grid point by mean F1 on the half/half split with the whole test half as
/// one window; the first grid point with the highest mean wins.
GridSearchResult grid_search(std::span<const DetectorParams> grid,
                             std::span<const LabeledSeries> corpus, const EvalConfig& eval,
                             int jobs = 1);

}  // namespace driftbench
