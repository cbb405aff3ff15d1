#include "driftbench/fft.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <utility>

#include <fftw3.h>

namespace driftbench::fft {

namespace {

struct BufferDeleter {
    void operator()(fftw_complex* p) const { fftw_free(p); }
};
using Buffer = std::unique_ptr<fftw_complex[], BufferDeleter>;

Buffer allocate(std::size_t n) {
    return Buffer(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n)));
}

// The FFTW planner is not thread-safe; execution with the new-array interface is.
// Plans are created once per (size, direction) with FFTW_ESTIMATE, which is
// deterministic, so every thread runs identical arithmetic.
class PlanCache {
public:
    fftw_plan get(int n, int sign) {
        std::lock_guard lock(mutex_);
        auto& plan = plans_[{n, sign}];
        if (plan == nullptr) {
            auto in = allocate(static_cast<std::size_t>(n));
            auto out = allocate(static_cast<std::size_t>(n));
            plan = fftw_plan_dft_1d(n, in.get(), out.get(), sign, FFTW_ESTIMATE);
        }
        return plan;
    }

    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

private:
    std::mutex mutex_;
    std::map<std::pair<int, int>, fftw_plan> plans_;
};

PlanCache& cache() {
    static PlanCache instance;
    return instance;
}

std::vector<Complex> run(std::span<const Complex> input, int sign) {
    const auto n = input.size();
    if (n == 0) return {};
    auto in = allocate(n);
    auto out = allocate(n);
    for (std::size_t i = 0; i < n; ++i) {
        in[i][0] = input[i].real();
        in[i][1] = input[i].imag();
    }
    fftw_execute_dft(cache().get(static_cast<int>(n), sign), in.get(), out.get());
    std::vector<Complex> result(n);
    for (std::size_t i = 0; i < n; ++i) result[i] = {out[i][0], out[i][1]};
    return result;
}

}  // namespace

std::vector<Complex> forward(std::span<const double> x) {
    std::vector<Complex> input(x.begin(), x.end());
    return run(input, FFTW_FORWARD);
}

std::vector<Complex> inverse(std::span<const Complex> spectrum) {
    auto result = run(spectrum, FFTW_BACKWARD);
    const double scale = 1.0 / static_cast<double>(result.size());
    for (auto& v : result) v *= scale;
    return result;
}

}  // namespace driftbench::fft
