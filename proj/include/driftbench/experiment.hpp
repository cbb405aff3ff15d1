#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "driftbench/detectors.hpp"
#include "driftbench/evaluation.hpp"
#include "driftbench/fedd.hpp"
#include "driftbench/harness.hpp"
#include "driftbench/synth.hpp"

namespace driftbench {

inline constexpr const char* kToolkitVersion = "0.1.0";

/// Process exit codes shared by every subcommand.
enum ExitCode : int {
    kExitOk = 0,
    kExitConfigError = 1,
    kExitDataError = 2,
    kExitPartialFailure = 3,
};

/// Raised when a dataset cannot be read; maps to kExitDataError.
class DataError : public Error {
public:
    using Error::Error;
};

enum class DatasetKind { YahooA1, NabCloudwatch, Synthetic };

struct DatasetConfig {
    DatasetKind kind = DatasetKind::Synthetic;
    std::filesystem::path path;         // yahoo_a1 directory / NAB CSV directory
    std::filesystem::path labels_path;  // NAB labels JSON
    std::vector<SynthSpec> specs;       // synthetic
    std::size_t replicate = 1;          // synthetic copies per spec, each with its own seed
};

struct RegimeConfig {
    DataRegime data;
    FrequencyRegime frequency = FrequencyRegime::Blind;
    std::string name() const { return scenario_name(data, frequency); }
};

struct ExperimentConfig {
    DatasetConfig dataset;
    DetectorParams detector = FftParams{};
    std::vector<RegimeConfig> regimes;
    std::size_t batch_len = 168;
    std::vector<std::size_t> delays;  // the first delay drives per-series metrics and tests
    std::vector<std::uint64_t> seeds;
    double alpha = 0.10;
    std::optional<fedd::FeddConfig> monitor;
    LatePolicy late_policy = LatePolicy::ZeroMissed;
    std::filesystem::path output_dir = "driftbench-out";
};

/// Parses and validates; errors are ConfigError carrying the offending JSON pointer.
ExperimentConfig parse_experiment_config(const nlohmann::json& j);

/// Reads a config file. Syntax errors are reported as ConfigError with "line L, column C".
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Resolves the dataset: loads files or generates the synthetic corpus for every seed.
/// Throws DataError on unreadable data.
std::vector<LabeledSeries> load_dataset(const ExperimentConfig& config);

struct SeriesScenarioResult {
    std::string series_id;
    std::string scenario;
    std::vector<ConfusionCounts> batch_counts;
    ConfusionCounts pooled;
    std::vector<MetricTriple> by_delay;  // pooled metrics at each configured delay
    RunRecord record;
};

struct ScenarioSummary {
    std::string name;
    std::size_t series = 0;
    MetricTriple mean;                   // at the first configured delay
    std::vector<MetricTriple> by_delay;  // cross-series means
};

struct ComparisonEntry {
    std::string a;
    std::string b;
    std::string metric;
    std::optional<WilcoxonResult> test;
    std::string error;
};

struct SeriesFailure {
    std::string scenario;
    std::string series_id;
    std::string error;
};

struct ExperimentReport {
    std::vector<std::string> scenarios;
    std::vector<std::size_t> delays;
    double alpha = 0.10;
    std::vector<SeriesScenarioResult> results;  // ordered by scenario, then series id
    std::vector<ScenarioSummary> summaries;
    std::vector<ComparisonEntry> comparisons;
    std::vector<std::vector<fedd::DriftSignal>> drift_signals;  // per series, when monitored
    std::vector<double> drift_fraction;
    std::vector<double> first_drift_fraction;
    std::vector<SeriesFailure> failures;
    std::vector<std::string> series_ids;
};

ExperimentReport run_experiment(const ExperimentConfig& config,
                                const std::vector<LabeledSeries>& corpus, int jobs);

/// Paired Wilcoxon over series present in both maps, for precision, recall and f1.
std::vector<ComparisonEntry> compare_scenarios(
    const std::string& name_a, const std::map<std::string, MetricTriple>& a,
    const std::string& name_b, const std::map<std::string, MetricTriple>& b, double alpha);

nlohmann::ordered_json summary_json(const ExperimentReport& report);

/// Writes per_series.csv, summary.json, delay_curve.csv, drift_signals.csv,
/// drift_summary.csv, retrain_events.<scenario>.csv and run_records.json.
void write_report(const ExperimentReport& report, const std::filesystem::path& dir);

std::string sha256_hex(const std::string& bytes);

// --- Subcommands (diagnostics go to `err`) -----------------------------------

int cmd_validate(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err);

int cmd_run(const std::filesystem::path& config_path, int jobs,
            const std::optional<std::filesystem::path>& output_override, std::ostream& err);

struct CompareOptions {
    double alpha = 0.10;
    std::optional<std::string> scenario_a;
    std::optional<std::string> scenario_b;
};

int cmd_compare(const std::filesystem::path& summary_a, const std::filesystem::path& summary_b,
                const CompareOptions& options, std::ostream& out, std::ostream& err);

int cmd_synth(const std::filesystem::path& spec_path, const std::filesystem::path& out_csv,
              std::ostream& err);

/// Applies DRIFTBENCH_LOG (trace|debug|info|warn|error|off) to the default logger.
void configure_logging_from_env();

}  // namespace driftbench
