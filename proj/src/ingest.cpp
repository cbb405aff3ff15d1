#include "driftbench/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <exception>
#include <fstream>
#include <map>
#include <optional>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "driftbench/format.hpp"

namespace driftbench {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        fields.push_back(trim(line.substr(pos, comma - pos)));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return fields;
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
    T out{};
    const auto* first = s.data();
    const auto* last = s.data() + s.size();
    if (!s.empty() && s.front() == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last || first == last) return std::nullopt;
    return out;
}

std::vector<std::string> read_lines(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(fmt::format("cannot open '{}'", path.string()));
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
    }
    return lines;
}

void expect_header(const fs::path& path, const std::vector<std::string>& lines,
                   const std::vector<std::string_view>& expected) {
    if (lines.empty()) throw Error(fmt::format("{}: empty file", path.string()));
    std::string_view header = lines.front();
    if (header.size() >= 3 && header.substr(0, 3) == "\xEF\xBB\xBF") header.remove_prefix(3);
    const auto fields = split_fields(header);
    if (fields != expected) {
        throw Error(fmt::format("{}:1: expected header '{}', got '{}'", path.string(),
                                fmt::join(expected, ","), header));
    }
}

std::vector<fs::path> csv_files(const fs::path& dir) {
    if (!fs::is_directory(dir)) {
        throw Error(fmt::format("dataset directory '{}' does not exist", dir.string()));
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".csv") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw Error(fmt::format("no CSV files in '{}'", dir.string()));
    return files;
}

/// Parses files concurrently; the first failure (in file order) is rethrown.
template <typename Fn>
std::vector<LabeledSeries> load_all(const std::vector<fs::path>& files, Fn&& load_one) {
    std::vector<std::optional<LabeledSeries>> slots(files.size());
    std::vector<std::exception_ptr> errors(files.size());
    const auto n = static_cast<std::ptrdiff_t>(files.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
            slots[i].emplace(load_one(files[i]));
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    std::vector<LabeledSeries> out;
    out.reserve(slots.size());
    for (auto& s : slots) out.push_back(std::move(*s));
    std::sort(out.begin(), out.end(),
              [](const LabeledSeries& a, const LabeledSeries& b) { return a.id() < b.id(); });
    return out;
}

LabeledSeries load_labeled_file(const fs::path& path, std::int64_t granularity_s) {
    const auto lines = read_lines(path);
    expect_header(path, lines, {"timestamp", "value", "is_anomaly"});
    std::vector<RawSample> samples;
    samples.reserve(lines.size());
    for (std::size_t ln = 1; ln < lines.size(); ++ln) {
        if (trim(lines[ln]).empty()) continue;
        const auto fields = split_fields(lines[ln]);
        const auto where = [&] { return fmt::format("{}:{}", path.string(), ln + 1); };
        if (fields.size() != 3) {
            throw Error(fmt::format("{}: expected 3 fields, got {}", where(), fields.size()));
        }
        const auto ts = parse_number<std::int64_t>(fields[0]);
        const auto value = parse_number<double>(fields[1]);
        const auto label = parse_number<int>(fields[2]);
        if (!ts) throw Error(fmt::format("{}: bad timestamp '{}'", where(), fields[0]));
        if (!value || !std::isfinite(*value)) {
            throw Error(fmt::format("{}: bad value '{}'", where(), fields[1]));
        }
        if (!label || (*label != 0 && *label != 1)) {
            throw Error(fmt::format("{}: bad is_anomaly '{}'", where(), fields[2]));
        }
        samples.push_back({*ts, *value, static_cast<std::uint8_t>(*label)});
    }
    // Index-valued timestamps (1, 2, 3, ...) carry no unit; map them onto the granularity.
    const bool index_unit =
        samples.size() >= 2 && std::adjacent_find(samples.begin(), samples.end(),
                                                  [](const RawSample& a, const RawSample& b) {
                                                      return b.timestamp - a.timestamp != 1;
                                                  }) == samples.end();
    if (index_unit && granularity_s != 1) {
        for (auto& s : samples) s.timestamp *= granularity_s;
    }
    try {
        return assemble_series(path.stem().string(), granularity_s, samples);
    } catch (const Error& e) {
        throw Error(fmt::format("{}: {}", path.string(), e.what()));
    }
}

}  // namespace

DatasetManifest yahoo_a1_manifest() { return {"yahoo_a1", 67, 3600, 741, 1461}; }

DatasetManifest nab_cloudwatch_manifest() { return {"nab_cloudwatch", 17, 300, 1243, 4730}; }

std::vector<ManifestMismatch> validate_manifest(const std::vector<LabeledSeries>& series,
                                                const DatasetManifest& manifest) {
    std::vector<ManifestMismatch> report;
    if (series.size() != manifest.series_count) {
        report.push_back({"series_count", "",
                          fmt::format("{} != {}", series.size(), manifest.series_count)});
    }
    std::size_t min_len = std::numeric_limits<std::size_t>::max();
    std::size_t max_len = 0;
    for (const auto& s : series) {
        if (s.granularity_s() != manifest.granularity_s) {
            report.push_back({"granularity_s", s.id(),
                              fmt::format("{} != {}", s.granularity_s(), manifest.granularity_s)});
        }
        if (s.size() < manifest.min_len || s.size() > manifest.max_len) {
            report.push_back({"length", s.id(),
                              fmt::format("{} outside [{}, {}]", s.size(), manifest.min_len,
                                          manifest.max_len)});
        }
        min_len = std::min(min_len, s.size());
        max_len = std::max(max_len, s.size());
    }
    if (!series.empty()) {
        if (min_len != manifest.min_len) {
            report.push_back({"min_len", "", fmt::format("{} != {}", min_len, manifest.min_len)});
        }
        if (max_len != manifest.max_len) {
            report.push_back({"max_len", "", fmt::format("{} != {}", max_len, manifest.max_len)});
        }
    }
    return report;
}

LabeledSeries assemble_series(std::string id, std::int64_t granularity_s,
                              const std::vector<RawSample>& samples) {
    if (granularity_s <= 0) throw Error("granularity must be positive");
    std::vector<TimePoint> points;
    Labels labels;
    points.reserve(samples.size());
    labels.reserve(samples.size());
    std::size_t missing = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& cur = samples[i];
        if (i > 0) {
            const auto& prev = samples[i - 1];
            const std::int64_t step = cur.timestamp - prev.timestamp;
            if (step <= 0) {
                throw Error(fmt::format("non-monotone timestamps at row {} ({} after {})", i + 1,
                                        cur.timestamp, prev.timestamp));
            }
            if (step % granularity_s != 0) {
                throw Error(fmt::format("timestamp step {} at row {} is not a multiple of {} s",
                                        step, i + 1, granularity_s));
            }
            const std::int64_t gaps = step / granularity_s - 1;
            for (std::int64_t g = 1; g <= gaps; ++g) {
                const double w = static_cast<double>(g) / static_cast<double>(gaps + 1);
                points.push_back({prev.timestamp + g * granularity_s,
                                  prev.value + (cur.value - prev.value) * w});
                labels.push_back(0);
            }
            missing += static_cast<std::size_t>(gaps);
        }
        points.push_back({cur.timestamp, cur.value});
        labels.push_back(cur.label);
    }
    if (!points.empty() &&
        static_cast<double>(missing) > kMaxMissingFraction * static_cast<double>(points.size())) {
        throw Error(fmt::format("{} of {} samples missing (limit {:.0f}%)", missing, points.size(),
                                kMaxMissingFraction * 100));
    }
    if (missing > 0) spdlog::debug("series '{}': repaired {} missing samples", id, missing);
    return LabeledSeries(std::move(id), granularity_s, std::move(points), std::move(labels));
}

std::vector<LabeledSeries> load_labeled_csv_dir(const fs::path& dir, std::int64_t granularity_s) {
    return load_all(csv_files(dir),
                    [&](const fs::path& p) { return load_labeled_file(p, granularity_s); });
}

std::vector<LabeledSeries> load_yahoo_a1(const fs::path& dir) {
    return load_labeled_csv_dir(dir, 3600);
}

std::int64_t parse_iso8601(std::string_view text) {
    const auto fail = [&] { return Error(fmt::format("bad ISO-8601 timestamp '{}'", text)); };
    text = trim(text);
    if (text.size() < 19 || text[4] != '-' || text[7] != '-' ||
        (text[10] != ' ' && text[10] != 'T') || text[13] != ':' || text[16] != ':') {
        throw fail();
    }
    const auto field = [&](std::size_t pos, std::size_t len) {
        const auto v = parse_number<int>(text.substr(pos, len));
        if (!v) throw fail();
        return *v;
    };
    const int year = field(0, 4);
    const int month = field(5, 2);
    const int day = field(8, 2);
    const int hour = field(11, 2);
    const int minute = field(14, 2);
    const int second = field(17, 2);
    auto rest = text.substr(19);
    if (!rest.empty() && rest.front() == '.') {
        rest.remove_prefix(1);
        while (!rest.empty() && rest.front() >= '0' && rest.front() <= '9') rest.remove_prefix(1);
    }
    if (rest == "Z") rest = {};
    if (!rest.empty()) throw fail();
    const std::chrono::year_month_day ymd{std::chrono::year{year},
                                          std::chrono::month{static_cast<unsigned>(month)},
                                          std::chrono::day{static_cast<unsigned>(day)}};
    if (!ymd.ok() || hour > 23 || minute > 59 || second > 60) throw fail();
    const auto days = std::chrono::sys_days{ymd}.time_since_epoch().count();
    return static_cast<std::int64_t>(days) * 86400 + hour * 3600 + minute * 60 + second;
}

std::vector<LabeledSeries> load_nab_cloudwatch(const fs::path& csv_dir,
                                               const fs::path& labels_file) {
    constexpr std::int64_t granularity = 300;
    const auto files = csv_files(csv_dir);

    std::ifstream in(labels_file);
    if (!in) throw Error(fmt::format("cannot open labels file '{}'", labels_file.string()));
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(fmt::format("{}: {}", labels_file.string(), e.what()));
    }
    if (!doc.is_object()) {
        throw Error(fmt::format("{}: expected a JSON object", labels_file.string()));
    }
    // Keys are paths relative to the corpus root; match on the file name.
    std::map<std::string, std::vector<std::int64_t>> by_name;
    for (const auto& [key, stamps] : doc.items()) {
        const auto name = fs::path(key).filename().string();
        auto& list = by_name[name];
        for (const auto& s : stamps) {
            if (!s.is_string()) {
                throw Error(fmt::format("{}: non-string timestamp under '{}'",
                                        labels_file.string(), key));
            }
            list.push_back(parse_iso8601(s.get<std::string>()));
        }
    }

    return load_all(files, [&](const fs::path& path) {
        const auto lines = read_lines(path);
        expect_header(path, lines, {"timestamp", "value"});
        std::vector<RawSample> samples;
        for (std::size_t ln = 1; ln < lines.size(); ++ln) {
            if (trim(lines[ln]).empty()) continue;
            const auto fields = split_fields(lines[ln]);
            const auto where = [&] { return fmt::format("{}:{}", path.string(), ln + 1); };
            if (fields.size() != 2) {
                throw Error(fmt::format("{}: expected 2 fields, got {}", where(), fields.size()));
            }
            std::int64_t ts = 0;
            try {
                ts = parse_iso8601(fields[0]);
            } catch (const Error& e) {
                throw Error(fmt::format("{}: {}", where(), e.what()));
            }
            const auto value = parse_number<double>(fields[1]);
            if (!value || !std::isfinite(*value)) {
                throw Error(fmt::format("{}: bad value '{}'", where(), fields[1]));
            }
            samples.push_back({ts, *value, 0});
        }
        const auto id = path.stem().string();
        LabeledSeries raw = [&] {
            try {
                return assemble_series(id, granularity, samples);
            } catch (const Error& e) {
                throw Error(fmt::format("{}: {}", path.string(), e.what()));
            }
        }();
        Labels labels = raw.labels();
        const auto it = by_name.find(path.filename().string());
        if (it == by_name.end()) {
            spdlog::warn("series '{}' has no entry in '{}'", id, labels_file.string());
        } else {
            const auto t0 = raw.points().front().timestamp;
            for (const auto ts : it->second) {
                const auto offset = ts - t0;
                if (offset < 0 || offset % granularity != 0 ||
                    static_cast<std::size_t>(offset / granularity) >= raw.size()) {
                    throw Error(fmt::format("series '{}': label timestamp {} not in series", id,
                                            format_iso8601(ts)));
                }
                labels[static_cast<std::size_t>(offset / granularity)] = 1;
            }
        }
        return LabeledSeries(id, granularity, raw.points(), std::move(labels));
    });
}

void write_labeled_csv(const LabeledSeries& series, const fs::path& path) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
    out << "timestamp,value,is_anomaly\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        out << series.points()[i].timestamp << ',' << format_double(series.points()[i].value)
            << ',' << static_cast<int>(series.labels()[i]) << '\n';
    }
}

}  // namespace driftbench
