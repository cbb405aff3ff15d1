#pragma once

#include <string>
#include <vector>

#include "driftbench/series.hpp"

namespace testing_support {

inline driftbench::LabeledSeries series_of(const std::vector<double>& values,
                                           driftbench::Labels labels = {},
                                           const std::string& id = "s") {
    std::vector<driftbench::TimePoint> points(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        points[i] = {static_cast<std::int64_t>(i) * 3600, values[i]};
    }
    if (labels.empty()) labels.assign(values.size(), 0);
    return {id, 3600, std::move(points), std::move(labels)};
}

}  // namespace testing_support
