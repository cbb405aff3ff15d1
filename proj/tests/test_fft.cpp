#include <gtest/gtest.h>

#include <random>

#include "driftbench/fft.hpp"
#include "support/oracles.hpp"

using namespace driftbench;

TEST(Fft, MatchesDirectTransform) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> noise;
    for (std::size_t n : {1u, 2u, 3u, 7u, 16u, 97u, 168u, 250u}) {
        std::vector<double> x(n);
        for (auto& v : x) v = noise(rng);
        const auto fast = fft::forward(x);
        const auto slow = oracle::dft(x);
        ASSERT_EQ(fast.size(), n);
        double scale = 1.0;
        for (const auto& c : slow) scale = std::max(scale, std::abs(c));
        for (std::size_t f = 0; f < n; ++f) {
            EXPECT_LE(std::abs(fast[f] - slow[f]), 1e-11 * scale) << "n=" << n << " f=" << f;
        }
    }
}

TEST(Fft, InverseRoundTrip) {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> noise;
    for (std::size_t n : {5u, 64u, 1000u}) {
        std::vector<double> x(n);
        for (auto& v : x) v = noise(rng);
        const auto back = fft::inverse(fft::forward(x));
        for (std::size_t i = 0; i < n; ++i) {
            EXPECT_NEAR(back[i].real(), x[i], 1e-12);
            EXPECT_NEAR(back[i].imag(), 0.0, 1e-12);
        }
    }
}

TEST(Fft, ConcurrentCallsAgree) {
    std::vector<double> x(333);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(0.1 * static_cast<double>(i));
    const auto expected = fft::forward(x);
    std::vector<std::vector<fft::Complex>> results(16);
#pragma omp parallel for num_threads(4)
    for (int i = 0; i < 16; ++i) results[i] = fft::forward(x);
    for (const auto& r : results) EXPECT_EQ(r, expected);
}
