#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "driftbench/series.hpp"

namespace driftbench {

struct DatasetManifest {
    std::string name;
    std::size_t series_count = 0;
    std::int64_t granularity_s = 0;
    std::size_t min_len = 0;
    std::size_t max_len = 0;
};

/// Published characteristics of the two benchmark corpora.
DatasetManifest yahoo_a1_manifest();
DatasetManifest nab_cloudwatch_manifest();

struct ManifestMismatch {
    std::string field;  // "series_count", "granularity_s", "min_len", "max_len"
    std::string series_id;  // empty for corpus-level fields
    std::string detail;
};

/// Empty iff the corpus matches the manifest.
std::vector<ManifestMismatch> validate_manifest(const std::vector<LabeledSeries>& series,
                                                const DatasetManifest& manifest);

/// Raw sample as read from disk, before gap repair.
struct RawSample {
    std::int64_t timestamp = 0;
    double value = 0.0;
    std::uint8_t label = 0;
};

/// Fraction of missing samples tolerated by gap repair.
inline constexpr double kMaxMissingFraction = 0.05;

/// Builds a LabeledSeries from raw samples, filling missing timestamps by linear
/// interpolation (label 0). Rejects unordered timestamps, steps that are not a multiple
/// of the granularity, and series missing more than kMaxMissingFraction of their points.
LabeledSeries assemble_series(std::string id, std::int64_t granularity_s,
                              const std::vector<RawSample>& samples);

/// Reads every `*.csv` with header `timestamp,value,is_anomaly` in `dir`. Timestamps that
/// advance by exactly 1 are treated as sample indices and scaled by the granularity.
std::vector<LabeledSeries> load_labeled_csv_dir(const std::filesystem::path& dir,
                                                std::int64_t granularity_s);

std::vector<LabeledSeries> load_yahoo_a1(const std::filesystem::path& dir);

/// Reads `timestamp,value` CSVs plus a JSON object mapping relative file paths to arrays of
/// anomalous ISO-8601 timestamps. Only the listed timestamps are labeled.
std::vector<LabeledSeries> load_nab_cloudwatch(const std::filesystem::path& csv_dir,
                                               const std::filesystem::path& labels_file);

/// "YYYY-MM-DD HH:MM:SS[.ffffff]" or with a 'T' separator and optional 'Z'; UTC.
std::int64_t parse_iso8601(std::string_view text);

/// Writes a series as a `timestamp,value,is_anomaly` CSV; values round-trip exactly.
void write_labeled_csv(const LabeledSeries& series, const std::filesystem::path& path);

}  // namespace driftbench
