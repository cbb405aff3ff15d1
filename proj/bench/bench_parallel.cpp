// Serial reference vs OpenMP kernels.
#include <benchmark/benchmark.h>

#include <random>

#include "driftbench/harness.hpp"
#include "driftbench/synth.hpp"

using namespace driftbench;

namespace {

std::vector<double> noise(std::size_t n) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> d;
    std::vector<double> x(n);
    for (auto& v : x) v = d(rng);
    return x;
}

std::vector<LabeledSeries> corpus(std::size_t count) {
    std::vector<LabeledSeries> out;
    for (std::size_t i = 0; i < count; ++i) {
        SynthSpec spec;
        spec.id = "b" + std::to_string(i);
        spec.length = 3024;
        spec.base = {10.0, 0.0, 6.0, 24};
        spec.noise_sigma = 1.0;
        spec.drift = InjectedDrift{2100, DriftKind::MeanShift, 5.0};
        spec.seed = 7000 + i;
        out.push_back(generate_synthetic(spec));
    }
    return out;
}

void BM_PciSerial(benchmark::State& state) {
    const auto x = noise(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(pci_detect_serial(x, PciParams{}));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_PciParallel(benchmark::State& state) {
    const auto x = noise(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(pci_detect(x, PciParams{}));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

RunConfig informed_sw() {
    RunConfig c;
    c.detector = FftParams{10};
    c.data.kind = DataRegimeKind::SlidingWindow;
    c.frequency = FrequencyRegime::Informed;
    return c;
}

void BM_CorpusSerial(benchmark::State& state) {
    const auto series = corpus(16);
    const auto monitor = fedd_drift_monitor();
    for (auto _ : state) benchmark::DoNotOptimize(run_corpus_serial(series, informed_sw(), monitor));
}

void BM_CorpusParallel(benchmark::State& state) {
    const auto series = corpus(16);
    const auto monitor = fedd_drift_monitor();
    const int jobs = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(run_corpus(series, informed_sw(), monitor, jobs));
}

}  // namespace

BENCHMARK(BM_PciSerial)->Arg(1 << 12)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_PciParallel)->Arg(1 << 12)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_CorpusSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CorpusParallel)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
