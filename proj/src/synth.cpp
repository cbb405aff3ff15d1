#include "driftbench/synth.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "driftbench/json_fields.hpp"

namespace driftbench {

double Rng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    if (cached_normal_) {
        const double z = *cached_normal_;
        cached_normal_.reset();
        return z;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    cached_normal_ = r * std::sin(theta);
    return r * std::cos(theta);
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a ^ (b + 0x9E3779B97F4A7C15ULL + (a << 6) + (a >> 2));
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

void validate(const SynthSpec& spec) {
    if (spec.length < 2) throw Error(fmt::format("synthetic '{}': length must be >= 2", spec.id));
    if (spec.granularity_s <= 0) {
        throw Error(fmt::format("synthetic '{}': granularity_s must be positive", spec.id));
    }
    if (!(spec.noise_sigma >= 0.0) || !std::isfinite(spec.noise_sigma)) {
        throw Error(fmt::format("synthetic '{}': noise_sigma must be >= 0", spec.id));
    }
    if (spec.base.season_amplitude != 0.0 && spec.base.season_period < 2) {
        throw Error(fmt::format("synthetic '{}': season_period must be >= 2", spec.id));
    }
    std::set<std::size_t> seen;
    for (const auto& a : spec.anomalies) {
        if (a.at >= spec.length) {
            throw Error(fmt::format("synthetic '{}': anomaly index {} >= length {}", spec.id, a.at,
                                    spec.length));
        }
        if (!seen.insert(a.at).second) {
            throw Error(fmt::format("synthetic '{}': duplicate anomaly index {}", spec.id, a.at));
        }
    }
    if (spec.drift) {
        const auto& d = *spec.drift;
        if (d.at >= spec.length) {
            throw Error(fmt::format("synthetic '{}': drift index {} >= length {}", spec.id, d.at,
                                    spec.length));
        }
        if (d.kind == DriftKind::VarianceShift && !(d.magnitude > 0.0)) {
            throw Error(fmt::format("synthetic '{}': variance_shift factor must be > 0", spec.id));
        }
        if (d.kind == DriftKind::PeriodChange && std::lround(d.magnitude) < 2) {
            throw Error(fmt::format("synthetic '{}': period_change period must be >= 2", spec.id));
        }
    }
}

LabeledSeries generate_synthetic(const SynthSpec& spec) {
    validate(spec);
    Rng rng(spec.seed);
    const auto& base = spec.base;
    std::vector<TimePoint> points(spec.length);
    Labels labels(spec.length, 0);
    Values values(spec.length);

    const auto drift_active = [&](std::size_t i, DriftKind kind) {
        return spec.drift && spec.drift->kind == kind && i >= spec.drift->at;
    };
    for (std::size_t i = 0; i < spec.length; ++i) {
        const double t = static_cast<double>(i);
        double v = base.level + base.trend * t;
        if (base.season_amplitude != 0.0) {
            const double period = drift_active(i, DriftKind::PeriodChange)
                                      ? static_cast<double>(std::lround(spec.drift->magnitude))
                                      : static_cast<double>(base.season_period);
            v += base.season_amplitude * std::sin(2.0 * std::numbers::pi * t / period);
        }
        double noise = spec.noise_sigma * rng.normal();
        if (drift_active(i, DriftKind::VarianceShift)) noise *= spec.drift->magnitude;
        v += noise;
        if (drift_active(i, DriftKind::MeanShift)) v += spec.drift->magnitude;
        values[i] = v;
    }
    for (const auto& a : spec.anomalies) {
        const double delta = a.magnitude * spec.noise_sigma;
        if (a.kind == AnomalyKind::Spike) {
            values[a.at] += delta;
        } else {
            for (std::size_t i = a.at; i < spec.length; ++i) values[i] += delta;
        }
        labels[a.at] = 1;
    }
    for (std::size_t i = 0; i < spec.length; ++i) {
        points[i] = {spec.start_timestamp + static_cast<std::int64_t>(i) * spec.granularity_s,
                     values[i]};
    }
    return LabeledSeries(spec.id, spec.granularity_s, std::move(points), std::move(labels));
}

namespace {

AnomalyKind anomaly_kind_from(const std::string& s, const std::string& path) {
    if (s == "spike") return AnomalyKind::Spike;
    if (s == "level_shift") return AnomalyKind::LevelShift;
    throw ConfigError(path, fmt::format("unknown anomaly kind '{}' (spike|level_shift)", s));
}

DriftKind drift_kind_from(const std::string& s, const std::string& path) {
    if (s == "mean_shift") return DriftKind::MeanShift;
    if (s == "variance_shift") return DriftKind::VarianceShift;
    if (s == "period_change") return DriftKind::PeriodChange;
    throw ConfigError(path, fmt::format(
                                "unknown drift kind '{}' (mean_shift|variance_shift|period_change)",
                                s));
}

const char* name_of(AnomalyKind k) { return k == AnomalyKind::Spike ? "spike" : "level_shift"; }

const char* name_of(DriftKind k) {
    switch (k) {
        case DriftKind::MeanShift: return "mean_shift";
        case DriftKind::VarianceShift: return "variance_shift";
        case DriftKind::PeriodChange: return "period_change";
    }
    return "";
}

}  // namespace

SynthSpec synth_spec_from_json(const nlohmann::json& j, const std::string& path) {
    using namespace json_fields;
    require_object(j, path);
    SynthSpec spec;
    spec.id = optional<std::string>(j, "id", path, spec.id);
    spec.length = required<std::size_t>(j, "length", path);
    spec.granularity_s = optional<std::int64_t>(j, "granularity_s", path, spec.granularity_s);
    spec.start_timestamp = optional<std::int64_t>(j, "start_timestamp", path, 0);
    if (j.contains("base")) {
        const auto bp = child(path, "base");
        const auto& b = require_object(j.at("base"), bp);
        spec.base.level = optional<double>(b, "level", bp, 0.0);
        spec.base.trend = optional<double>(b, "trend", bp, 0.0);
        spec.base.season_amplitude = optional<double>(b, "season_amplitude", bp, 0.0);
        spec.base.season_period = optional<std::size_t>(b, "season_period", bp, 0);
    }
    spec.noise_sigma = optional<double>(j, "noise_sigma", path, 0.0);
    if (j.contains("anomalies")) {
        const auto ap = child(path, "anomalies");
        const auto& arr = j.at("anomalies");
        if (!arr.is_array()) throw ConfigError(ap, "expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const auto ip = child(ap, i);
            InjectedAnomaly a;
            a.at = required<std::size_t>(arr[i], "at", ip);
            a.kind = anomaly_kind_from(required<std::string>(arr[i], "kind", ip), child(ip, "kind"));
            a.magnitude = required<double>(arr[i], "magnitude", ip);
            spec.anomalies.push_back(a);
        }
    }
    if (j.contains("drift") && !j.at("drift").is_null()) {
        const auto dp = child(path, "drift");
        const auto& d = j.at("drift");
        InjectedDrift drift;
        drift.at = required<std::size_t>(d, "at", dp);
        drift.kind = drift_kind_from(required<std::string>(d, "kind", dp), child(dp, "kind"));
        drift.magnitude = required<double>(d, "magnitude", dp);
        spec.drift = drift;
    }
    spec.seed = required<std::uint64_t>(j, "seed", path);
    try {
        validate(spec);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(path, e.what());
    }
    return spec;
}

nlohmann::json to_json(const SynthSpec& spec) {
    nlohmann::json j;
    j["id"] = spec.id;
    j["length"] = spec.length;
    j["granularity_s"] = spec.granularity_s;
    j["start_timestamp"] = spec.start_timestamp;
    j["base"] = {{"level", spec.base.level},
                 {"trend", spec.base.trend},
                 {"season_amplitude", spec.base.season_amplitude},
                 {"season_period", spec.base.season_period}};
    j["noise_sigma"] = spec.noise_sigma;
    j["anomalies"] = nlohmann::json::array();
    for (const auto& a : spec.anomalies) {
        j["anomalies"].push_back({{"at", a.at}, {"kind", name_of(a.kind)}, {"magnitude", a.magnitude}});
    }
    if (spec.drift) {
        j["drift"] = {{"at", spec.drift->at},
                      {"kind", name_of(spec.drift->kind)},
                      {"magnitude", spec.drift->magnitude}};
    } else {
        j["drift"] = nullptr;
    }
    j["seed"] = spec.seed;
    return j;
}

}  // namespace driftbench
