#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace driftbench {

/// Raised for violated preconditions and malformed inputs across the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Labels = std::vector<std::uint8_t>;
using Values = std::vector<double>;

struct TimePoint {
    std::int64_t timestamp = 0;  // epoch seconds
    double value = 0.0;
};

/// Half-open index range [begin, end).
struct IndexRange {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const { return end > begin ? end - begin : 0; }
    bool empty() const { return end <= begin; }
    bool contains(std::size_t i) const { return i >= begin && i < end; }
    friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

/// A univariate series sampled at a fixed granularity, with one anomaly bit per point.
///
/// Construction validates every invariant; a LabeledSeries that exists is valid.
class LabeledSeries {
public:
    LabeledSeries(std::string id, std::int64_t granularity_s, std::vector<TimePoint> points,
                  Labels labels);

    const std::string& id() const { return id_; }
    std::int64_t granularity_s() const { return granularity_s_; }
    std::size_t size() const { return points_.size(); }
    const std::vector<TimePoint>& points() const { return points_; }
    const Labels& labels() const { return labels_; }
    const Values& values() const { return values_; }

    std::span<const double> values(IndexRange r) const;
    std::span<const std::uint8_t> labels(IndexRange r) const;

private:
    std::string id_;
    std::int64_t granularity_s_;
    std::vector<TimePoint> points_;
    Labels labels_;
    Values values_;
};

struct AnomalySegment {
    std::size_t start = 0;  // inclusive
    std::size_t end = 0;    // inclusive

    std::size_t length() const { return end - start + 1; }
    friend bool operator==(const AnomalySegment&, const AnomalySegment&) = default;
};

struct SplitSpec {
    std::size_t train_len = 0;
    std::size_t batch_len = 0;
};

struct Batch {
    std::size_t index = 0;
    std::size_t start = 0;  // inclusive, into the full series
    std::size_t end = 0;    // exclusive

    std::size_t size() const { return end - start; }
    IndexRange range() const { return {start, end}; }
    friend bool operator==(const Batch&, const Batch&) = default;
};

struct TrainTestSplit {
    IndexRange train;
    IndexRange test;
};

/// First floor(n/2) points train, the rest test.
TrainTestSplit split_half(const LabeledSeries& series);
TrainTestSplit split_half(std::size_t n);

/// Tiles `test` with batches of `batch_len`. A trailing remainder of at least two
/// points becomes a short final batch; a single leftover point joins the previous batch.
std::vector<Batch> make_batches(IndexRange test, std::size_t batch_len);

/// Maximal runs of set labels, in increasing start order.
std::vector<AnomalySegment> segments_from_labels(std::span<const std::uint8_t> labels);

/// Values of `range` with labeled anomalies replaced by linear interpolation between
/// the nearest clean neighbours inside the range. Leading and trailing anomalous runs
/// take the nearest clean value.
Values remove_anomalies_interpolate(const LabeledSeries& series, IndexRange range);
Values remove_anomalies_interpolate(std::span<const double> values,
                                    std::span<const std::uint8_t> labels);

}  // namespace driftbench
