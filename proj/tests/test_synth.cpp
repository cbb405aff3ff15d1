#include <gtest/gtest.h>

#include <cmath>
#include <nlohmann/json.hpp>
#include <algorithm>
#include <numbers>
#include <random>
#include <set>

#include "driftbench/json_fields.hpp"
#include "driftbench/synth.hpp"

using namespace driftbench;

TEST(Rng, MatchesStandardMt19937_64Stream) {
    Rng rng(5489);
    std::mt19937_64 reference(5489);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(rng.next_u64(), reference());
    // The 10000th output of the default-seeded engine, per the C++ standard.
    std::mt19937_64 standard;
    standard.discard(9999);
    EXPECT_EQ(standard(), 9981545732273789042ULL);
}

TEST(Rng, UniformIsTop53Bits) {
    Rng rng(42);
    std::mt19937_64 reference(42);
    for (int i = 0; i < 100; ++i) {
        const double u = rng.uniform();
        EXPECT_EQ(u, static_cast<double>(reference() >> 11) / 9007199254740992.0);
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
    }
}

TEST(Rng, BoxMullerPairs) {
    Rng rng(9);
    std::mt19937_64 reference(9);
    for (int i = 0; i < 20; ++i) {
        const double u1 = 1.0 - static_cast<double>(reference() >> 11) / 9007199254740992.0;
        const double u2 = static_cast<double>(reference() >> 11) / 9007199254740992.0;
        const double r = std::sqrt(-2.0 * std::log(u1));
        EXPECT_DOUBLE_EQ(rng.normal(), r * std::cos(2.0 * std::numbers::pi * u2));
        EXPECT_DOUBLE_EQ(rng.normal(), r * std::sin(2.0 * std::numbers::pi * u2));
    }
}

TEST(Rng, NormalMoments) {
    Rng rng(123);
    double sum = 0, sq = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sq += z * z;
    }
    EXPECT_NEAR(sum / n, 0.0, 0.01);
    EXPECT_NEAR(sq / n, 1.0, 0.01);
}

TEST(Synthetic, ConstantSeries) {
    SynthSpec spec;
    spec.length = 50;
    spec.base.level = 1.0;
    const auto s = generate_synthetic(spec);
    for (double v : s.values()) EXPECT_EQ(v, 1.0);
    for (auto l : s.labels()) EXPECT_EQ(l, 0);
}

TEST(Synthetic, SpikeAddsExactlyMagnitudeTimesSigma) {
    SynthSpec spec;
    spec.length = 100;
    spec.noise_sigma = 1.0;
    spec.seed = 3;
    const auto plain = generate_synthetic(spec);
    spec.anomalies = {{50, AnomalyKind::Spike, 10.0}};
    const auto spiked = generate_synthetic(spec);
    for (std::size_t i = 0; i < 100; ++i) {
        if (i == 50) {
            EXPECT_DOUBLE_EQ(spiked.values()[i] - plain.values()[i], 10.0);
            EXPECT_EQ(spiked.labels()[i], 1);
        } else {
            EXPECT_EQ(spiked.values()[i], plain.values()[i]);
            EXPECT_EQ(spiked.labels()[i], 0);
        }
    }
}

TEST(Synthetic, LevelShiftLabelsOnlyItsStart) {
    SynthSpec spec;
    spec.length = 20;
    spec.noise_sigma = 0.5;
    spec.seed = 1;
    const auto plain = generate_synthetic(spec);
    spec.anomalies = {{8, AnomalyKind::LevelShift, 4.0}};
    const auto shifted = generate_synthetic(spec);
    for (std::size_t i = 0; i < 20; ++i) {
        EXPECT_DOUBLE_EQ(shifted.values()[i] - plain.values()[i], i >= 8 ? 2.0 : 0.0);
        EXPECT_EQ(shifted.labels()[i], i == 8 ? 1 : 0);
    }
}

TEST(Synthetic, FormulaWithoutNoise) {
    SynthSpec spec;
    spec.length = 60;
    spec.base = {2.0, 0.5, 3.0, 12};
    const auto s = generate_synthetic(spec);
    for (std::size_t i = 0; i < 60; ++i) {
        const double t = static_cast<double>(i);
        EXPECT_NEAR(s.values()[i], 2.0 + 0.5 * t + 3.0 * std::sin(2 * std::numbers::pi * t / 12), 1e-12);
    }
}

TEST(Synthetic, DriftKinds) {
    SynthSpec spec;
    spec.length = 40;
    spec.noise_sigma = 1.0;
    spec.seed = 8;
    const auto plain = generate_synthetic(spec);
    spec.drift = InjectedDrift{20, DriftKind::MeanShift, 5.0};
    const auto mean = generate_synthetic(spec);
    spec.drift = InjectedDrift{20, DriftKind::VarianceShift, 3.0};
    const auto var = generate_synthetic(spec);
    for (std::size_t i = 0; i < 40; ++i) {
        EXPECT_DOUBLE_EQ(mean.values()[i] - plain.values()[i], i >= 20 ? 5.0 : 0.0);
        EXPECT_DOUBLE_EQ(var.values()[i], i >= 20 ? 3.0 * plain.values()[i] : plain.values()[i]);
    }
    SynthSpec season;
    season.length = 40;
    season.base = {0.0, 0.0, 1.0, 10};
    season.drift = InjectedDrift{20, DriftKind::PeriodChange, 5.0};
    const auto p = generate_synthetic(season);
    EXPECT_NEAR(p.values()[21], std::sin(2 * std::numbers::pi * 21 / 5.0), 1e-12);
    EXPECT_NEAR(p.values()[19], std::sin(2 * std::numbers::pi * 19 / 10.0), 1e-12);
}

TEST(Synthetic, Determinism) {
    SynthSpec spec;
    spec.length = 500;
    spec.noise_sigma = 2.0;
    spec.seed = 1;
    const auto a = generate_synthetic(spec);
    const auto b = generate_synthetic(spec);
    EXPECT_EQ(a.values(), b.values());
    spec.seed = 2;
    EXPECT_NE(generate_synthetic(spec).values(), a.values());
}

TEST(Synthetic, LabelCountEqualsAnomalyCount) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        SynthSpec spec;
        spec.length = 50 + rng() % 200;
        spec.noise_sigma = 1.0;
        spec.seed = trial;
        std::set<std::size_t> at;
        const std::size_t k = rng() % 10;
        while (at.size() < k) at.insert(rng() % spec.length);
        for (auto i : at) spec.anomalies.push_back({i, rng() % 2 ? AnomalyKind::Spike : AnomalyKind::LevelShift, 5.0});
        const auto s = generate_synthetic(spec);
        EXPECT_EQ(static_cast<std::size_t>(std::count(s.labels().begin(), s.labels().end(), 1)), k);
    }
}

TEST(Synthetic, ValidationErrors) {
    SynthSpec spec;
    spec.length = 10;
    spec.anomalies = {{3, AnomalyKind::Spike, 1.0}, {3, AnomalyKind::Spike, 2.0}};
    EXPECT_THROW(generate_synthetic(spec), Error);
    spec.anomalies = {{10, AnomalyKind::Spike, 1.0}};
    EXPECT_THROW(generate_synthetic(spec), Error);
    spec.anomalies.clear();
    spec.noise_sigma = -1;
    EXPECT_THROW(generate_synthetic(spec), Error);
    spec.noise_sigma = 0;
    spec.base.season_amplitude = 1;
    EXPECT_THROW(generate_synthetic(spec), Error);
}

TEST(SynthJson, RoundTrip) {
    SynthSpec spec;
    spec.id = "rt";
    spec.length = 100;
    spec.granularity_s = 300;
    spec.start_timestamp = 1000;
    spec.base = {1.5, 0.01, 2.0, 24};
    spec.noise_sigma = 0.7;
    spec.anomalies = {{10, AnomalyKind::Spike, 6.0}, {70, AnomalyKind::LevelShift, -3.0}};
    spec.drift = InjectedDrift{50, DriftKind::VarianceShift, 2.0};
    spec.seed = 18446744073709551557ULL;
    const auto back = synth_spec_from_json(to_json(spec));
    EXPECT_EQ(generate_synthetic(back).values(), generate_synthetic(spec).values());
    EXPECT_EQ(to_json(back), to_json(spec));
}

TEST(SynthJson, DiagnosticsCarryPath) {
    const auto j = nlohmann::json::parse(
        R"({"length": 10, "seed": 1, "anomalies": [{"at": 1, "kind": "bump", "magnitude": 1}]})");
    try {
        synth_spec_from_json(j, "/dataset/specs/0");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.path(), "/dataset/specs/0/anomalies/0/kind");
    }
    EXPECT_THROW(synth_spec_from_json(nlohmann::json::parse(R"({"seed": 1})")), ConfigError);
}
