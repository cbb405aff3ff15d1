#include "driftbench/format.hpp"

#include <array>
#include <charconv>
#include <chrono>

#include <fmt/format.h>

namespace driftbench {

std::string format_double(double v) {
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

std::string format_iso8601(std::int64_t epoch_seconds) {
    using namespace std::chrono;
    const auto days = static_cast<int>(epoch_seconds >= 0 ? epoch_seconds / 86400
                                                          : (epoch_seconds - 86399) / 86400);
    const auto secs = epoch_seconds - static_cast<std::int64_t>(days) * 86400;
    const year_month_day ymd{sys_days{std::chrono::days{days}}};
    return fmt::format("{:04}-{:02}-{:02} {:02}:{:02}:{:02}", static_cast<int>(ymd.year()),
                       static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                       secs / 3600, (secs % 3600) / 60, secs % 60);
}

}  // namespace driftbench
