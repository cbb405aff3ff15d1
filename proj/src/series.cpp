#include "driftbench/series.hpp"

#include <cmath>

#include <fmt/format.h>

namespace driftbench {

LabeledSeries::LabeledSeries(std::string id, std::int64_t granularity_s,
                             std::vector<TimePoint> points, Labels labels)
    : id_(std::move(id)),
      granularity_s_(granularity_s),
      points_(std::move(points)),
      labels_(std::move(labels)) {
    if (granularity_s_ <= 0) {
        throw Error(fmt::format("series '{}': granularity must be positive", id_));
    }
    if (points_.size() < 2) {
        throw Error(fmt::format("series '{}': needs at least 2 points, got {}", id_,
                                points_.size()));
    }
    if (labels_.size() != points_.size()) {
        throw Error(fmt::format("series '{}': {} labels for {} points", id_, labels_.size(),
                                points_.size()));
    }
    values_.reserve(points_.size());
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (!std::isfinite(points_[i].value)) {
            throw Error(fmt::format("series '{}': non-finite value at index {}", id_, i));
        }
        if (labels_[i] > 1) {
            throw Error(fmt::format("series '{}': label at index {} is not 0/1", id_, i));
        }
        if (i > 0 && points_[i].timestamp - points_[i - 1].timestamp != granularity_s_) {
            throw Error(fmt::format(
                "series '{}': timestamp step {} at index {} does not match granularity {}", id_,
                points_[i].timestamp - points_[i - 1].timestamp, i, granularity_s_));
        }
        values_.push_back(points_[i].value);
    }
}

std::span<const double> LabeledSeries::values(IndexRange r) const {
    if (r.end > values_.size() || r.begin > r.end) {
        throw Error(fmt::format("series '{}': range [{}, {}) out of bounds (size {})", id_,
                                r.begin, r.end, values_.size()));
    }
    return std::span<const double>(values_).subspan(r.begin, r.size());
}

std::span<const std::uint8_t> LabeledSeries::labels(IndexRange r) const {
    if (r.end > labels_.size() || r.begin > r.end) {
        throw Error(fmt::format("series '{}': range [{}, {}) out of bounds (size {})", id_,
                                r.begin, r.end, labels_.size()));
    }
    return std::span<const std::uint8_t>(labels_).subspan(r.begin, r.size());
}

TrainTestSplit split_half(std::size_t n) {
    if (n < 4) {
        throw Error(fmt::format("series too short to split ({} points)", n));
    }
    const std::size_t half = n / 2;
    return {{0, half}, {half, n}};
}

TrainTestSplit split_half(const LabeledSeries& series) { return split_half(series.size()); }

std::vector<Batch> make_batches(IndexRange test, std::size_t batch_len) {
    if (batch_len < 2) {
        throw Error(fmt::format("batch_len must be >= 2, got {}", batch_len));
    }
    if (test.empty()) {
        throw Error("cannot batch an empty test range");
    }
    std::vector<Batch> batches;
    for (std::size_t start = test.begin; start < test.end; start += batch_len) {
        const std::size_t end = std::min(start + batch_len, test.end);
        if (end - start == 1 && !batches.empty()) {
            batches.back().end = end;
            break;
        }
        batches.push_back({batches.size(), start, end});
    }
    return batches;
}

std::vector<AnomalySegment> segments_from_labels(std::span<const std::uint8_t> labels) {
    std::vector<AnomalySegment> segments;
    std::size_t i = 0;
    while (i < labels.size()) {
        if (labels[i] == 0) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        while (i < labels.size() && labels[i] != 0) ++i;
        segments.push_back({start, i - 1});
    }
    return segments;
}

Values remove_anomalies_interpolate(std::span<const double> values,
                                    std::span<const std::uint8_t> labels) {
    if (values.size() != labels.size()) {
        throw Error(fmt::format("{} values but {} labels", values.size(), labels.size()));
    }
    Values out(values.begin(), values.end());
    const auto segments = segments_from_labels(labels);
    if (values.empty()) {
        throw Error("no clean data: empty range");
    }
    if (segments.size() == 1 && segments.front().length() == values.size()) {
        throw Error("no clean data: every point in the range is labeled anomalous");
    }
    for (const auto& seg : segments) {
        const bool has_left = seg.start > 0;
        const bool has_right = seg.end + 1 < values.size();
        if (has_left && has_right) {
            const double left = values[seg.start - 1];
            const double right = values[seg.end + 1];
            const double span = static_cast<double>(seg.end + 2 - seg.start);
            for (std::size_t i = seg.start; i <= seg.end; ++i) {
                const double w = static_cast<double>(i + 1 - seg.start) / span;
                out[i] = left + (right - left) * w;
            }
        } else {
            const double fill = has_left ? values[seg.start - 1] : values[seg.end + 1];
            for (std::size_t i = seg.start; i <= seg.end; ++i) out[i] = fill;
        }
    }
    return out;
}

Values remove_anomalies_interpolate(const LabeledSeries& series, IndexRange range) {
    return remove_anomalies_interpolate(series.values(range), series.labels(range));
}

}  // namespace driftbench
