#include "driftbench/harness.hpp"

#include <algorithm>
#include <exception>

#include <fmt/format.h>

#include "driftbench/parallel.hpp"

namespace driftbench {

std::string_view to_string(DataRegimeKind kind) {
    switch (kind) {
        case DataRegimeKind::Static: return "static";
        case DataRegimeKind::FullHistory: return "full_history";
        case DataRegimeKind::SlidingWindow: return "sliding_window";
    }
    return "";
}

std::string_view to_string(FrequencyRegime freq) {
    return freq == FrequencyRegime::Blind ? "blind" : "informed";
}

std::string_view to_string(RetrainTrigger trigger) {
    return trigger == RetrainTrigger::Schedule ? "schedule" : "drift";
}

std::string scenario_name(const DataRegime& data, FrequencyRegime freq) {
    if (data.kind == DataRegimeKind::Static) return "static";
    std::string name = fmt::format("{}+{}", to_string(freq), to_string(data.kind));
    if (data.kind == DataRegimeKind::SlidingWindow && data.window_len) {
        name += fmt::format("@{}", *data.window_len);
    }
    return name;
}

DriftMonitor fedd_drift_monitor(fedd::FeddConfig config) {
    return [config](const LabeledSeries& series, IndexRange train,
                    std::span<const Batch> batches) {
        return fedd::fedd_monitor(series, train, batches, config);
    };
}

Labels RunRecord::pooled_predictions() const {
    Labels out;
    for (const auto& p : predictions) out.insert(out.end(), p.begin(), p.end());
    return out;
}

IndexRange plan_train_range(const DataRegime& regime, IndexRange initial_train,
                            std::span<const Batch> completed) {
    const std::size_t end = completed.empty() ? initial_train.end : completed.back().end;
    switch (regime.kind) {
        case DataRegimeKind::Static:
            return initial_train;
        case DataRegimeKind::FullHistory:
            return {initial_train.begin, end};
        case DataRegimeKind::SlidingWindow: {
            const std::size_t window = regime.window_len.value_or(initial_train.size());
            if (window == 0) throw Error("sliding window length must be positive");
            if (window > end) {
                throw Error(fmt::format("sliding window of {} exceeds the {} points available",
                                        window, end));
            }
            return {end - window, end};
        }
    }
    throw Error("unknown data regime");
}

RetrainDecision decide_retrain(FrequencyRegime freq, std::size_t batch_index,
                               std::span<const fedd::DriftSignal> signals) {
    if (freq == FrequencyRegime::Blind) return {true, RetrainTrigger::Schedule};
    const auto it = std::find_if(signals.begin(), signals.end(), [&](const auto& s) {
        return s.batch_index == batch_index;
    });
    if (it == signals.end()) {
        throw Error(fmt::format("informed retraining has no drift signal for batch {}",
                                batch_index));
    }
    return {it->status == fedd::DriftStatus::Drift, RetrainTrigger::Drift};
}

RunRecord run_series(const LabeledSeries& series, const RunConfig& config,
                     const DriftMonitor& monitor) {
    const auto where = [&](std::string_view stage, const std::exception& e) {
        return Error(fmt::format("series '{}': {}: {}", series.id(), stage, e.what()));
    };
    RunRecord record;
    record.series_id = series.id();
    record.config = config;
    try {
        const auto split = split_half(series);
        record.initial_train = split.train;
        record.batches = make_batches(split.test, config.batch_len);
    } catch (const Error& e) {
        throw where("split", e);
    }
    if (config.data.kind == DataRegimeKind::SlidingWindow && config.data.window_len &&
        *config.data.window_len < min_window(config.detector)) {
        throw Error(fmt::format("series '{}': sliding window {} is shorter than the {} detector "
                                "minimum {}",
                                series.id(), *config.data.window_len,
                                to_string(kind_of(config.detector)), min_window(config.detector)));
    }

    const bool informed = config.frequency == FrequencyRegime::Informed &&
                          config.data.kind != DataRegimeKind::Static;
    if (informed) {
        if (!monitor) throw Error("informed retraining requires a drift monitor");
        try {
            record.drift_signals = monitor(series, record.initial_train, record.batches);
        } catch (const Error& e) {
            throw where("drift monitor", e);
        }
    }

    FittedDetector model = [&] {
        try {
            return fit(config.detector, series, record.initial_train);
        } catch (const Error& e) {
            throw where("initial fit", e);
        }
    }();

    const auto& batches = record.batches;
    for (std::size_t b = 0; b < batches.size(); ++b) {
        record.predictions.push_back(classify(model, series, batches[b]));
        if (config.data.kind == DataRegimeKind::Static || b + 1 == batches.size()) continue;
        const auto decision = decide_retrain(config.frequency, batches[b].index,
                                             record.drift_signals);
        if (!decision.retrain) continue;
        const auto range = plan_train_range(config.data, record.initial_train,
                                            std::span(batches).first(b + 1));
        try {
            model = fit(config.detector, series, range);
        } catch (const Error& e) {
            throw where(fmt::format("refit after batch {}", batches[b].index), e);
        }
        record.retrains.push_back({batches[b].index, range, decision.trigger});
    }
    return record;
}

namespace {

SeriesOutcome run_one(const LabeledSeries& series, const RunConfig& config,
                      const DriftMonitor& monitor) {
    try {
        return {run_series(series, config, monitor), {}};
    } catch (const std::exception& e) {
        return {std::nullopt, e.what()};
    }
}

}  // namespace

std::vector<SeriesOutcome> run_corpus_serial(std::span<const LabeledSeries> corpus,
                                             const RunConfig& config,
                                             const DriftMonitor& monitor) {
    std::vector<SeriesOutcome> out;
    out.reserve(corpus.size());
    for (const auto& s : corpus) out.push_back(run_one(s, config, monitor));
    return out;
}

std::vector<SeriesOutcome> run_corpus(std::span<const LabeledSeries> corpus,
                                      const RunConfig& config, const DriftMonitor& monitor,
                                      int jobs) {
    std::vector<SeriesOutcome> out(corpus.size());
    parallel_for(corpus.size(), jobs,
                 [&](std::size_t i) { out[i] = run_one(corpus[i], config, monitor); });
    return out;
}

GridSearchResult grid_search(std::span<const DetectorParams> grid,
                             std::span<const LabeledSeries> corpus, const EvalConfig& eval,
                             int jobs) {
    if (grid.empty()) throw Error("grid search needs at least one grid point");
    if (corpus.empty()) throw Error("grid search needs at least one series");
    GridSearchResult result;
    result.table.resize(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        result.table[g].params = grid[g];
        result.table[g].per_series.resize(corpus.size());
    }
    std::vector<std::exception_ptr> errors(grid.size() * corpus.size());
    parallel_for(grid.size() * corpus.size(), jobs, [&](std::size_t cell) {
        const std::size_t g = cell / corpus.size();
        const std::size_t s = cell % corpus.size();
        try {
            const auto& series = corpus[s];
            const auto split = split_half(series);
            const auto model = fit(grid[g], series, split.train);
            auto preds = classify(model, series, Batch{0, split.test.begin, split.test.end});
            const auto labels = series.labels(split.test);
            const auto adjusted = adjust_predictions(labels, preds, eval.delay, eval.late_policy);
            result.table[g].per_series[s] = {series.id(), std::move(preds),
                                             metrics(confusion(labels, adjusted))};
        } catch (...) {
            errors[cell] = std::current_exception();
        }
    });
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    for (std::size_t g = 0; g < grid.size(); ++g) {
        auto& row = result.table[g];
        double sum = 0.0;
        for (const auto& r : row.per_series) sum += r.metrics.f1;
        row.mean_f1 = sum / static_cast<double>(row.per_series.size());
        if (row.mean_f1 > result.table[result.best_index].mean_f1) result.best_index = g;
    }
    return result;
}

}  // namespace driftbench
