#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "driftbench/series.hpp"

namespace driftbench {

/// Seeded generator: MT19937-64 for raw bits, 53-bit uniforms, and Box-Muller normals
/// (cosine branch first, sine branch cached). The stream is reproducible from the seed
/// alone in any language that implements MT19937-64.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }
    /// Uniform on [0, 1).
    double uniform();
    double normal();

private:
    std::mt19937_64 engine_;
    std::optional<double> cached_normal_;
};

/// SplitMix64 finaliser, used to derive per-series seeds from a run seed.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

enum class AnomalyKind { Spike, LevelShift };
enum class DriftKind { MeanShift, VarianceShift, PeriodChange };

struct InjectedAnomaly {
    std::size_t at = 0;
    AnomalyKind kind = AnomalyKind::Spike;
    double magnitude = 0.0;  // multiples of noise_sigma
};

/// From `at` onward: MeanShift adds `magnitude`; VarianceShift multiplies the noise by
/// `magnitude`; PeriodChange sets the seasonal period to round(`magnitude`).
struct InjectedDrift {
    std::size_t at = 0;
    DriftKind kind = DriftKind::MeanShift;
    double magnitude = 0.0;
};

struct SynthBase {
    double level = 0.0;
    double trend = 0.0;  // per step
    double season_amplitude = 0.0;
    std::size_t season_period = 0;
};

struct SynthSpec {
    std::string id = "synthetic";
    std::size_t length = 0;
    std::int64_t granularity_s = 3600;
    std::int64_t start_timestamp = 0;
    SynthBase base;
    double noise_sigma = 0.0;
    std::vector<InjectedAnomaly> anomalies;
    std::optional<InjectedDrift> drift;
    std::uint64_t seed = 0;
};

/// Throws Error describing the first violated invariant.
void validate(const SynthSpec& spec);

LabeledSeries generate_synthetic(const SynthSpec& spec);

SynthSpec synth_spec_from_json(const nlohmann::json& j, const std::string& path = "");
nlohmann::json to_json(const SynthSpec& spec);

}  // namespace driftbench
