// Serial reference vs OpenMP pair kernel.

#include "nlsob/pair_kernel.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

namespace {

using nlsob::PairRule;

std::vector<double> sine_values(const nlsob::Lattice& lat)
{
    std::vector<double> v(lat.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto x = lat.center(i);
        v[i] = std::sin(2.0 * std::numbers::pi * x[0]) + 0.3 * x[1];
    }
    return v;
}

template <bool Reference>
void pair_1d(benchmark::State& state)
{
    const auto lat = nlsob::Lattice::cells(nlsob::Box{1, {0.0, 0.0}, {1.0, 1.0}}, static_cast<int>(state.range(0)));
    const auto rule = static_cast<PairRule>(state.range(1));
    const auto values = sine_values(lat);
    const auto k = nlsob::normalize(nlsob::Kernel::indicator(), 1, 2.0);
    for (auto _ : state) {
        const double v = Reference ? nlsob::reference::pair_functional(values, lat, k, 2.0, 0.1, rule)
                                   : nlsob::pair_functional(values, lat, k, 2.0, 0.1, rule);
        benchmark::DoNotOptimize(v);
    }
    state.SetComplexityN(state.range(0));
}

template <bool Reference>
void pair_2d(benchmark::State& state)
{
    const auto lat = nlsob::Lattice::cells(nlsob::Box{2, {0.0, 0.0}, {1.0, 1.0}}, static_cast<int>(state.range(0)));
    const auto values = sine_values(lat);
    const auto k = nlsob::normalize(nlsob::Kernel::indicator(), 2, 2.0);
    for (auto _ : state) {
        const double v = Reference ? nlsob::reference::pair_functional(values, lat, k, 2.0, 0.25)
                                   : nlsob::pair_functional(values, lat, k, 2.0, 0.25);
        benchmark::DoNotOptimize(v);
    }
}

} // namespace

BENCHMARK(pair_1d<true>)->Name("reference_1d")->ArgsProduct({{512, 2048}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(pair_1d<false>)->Name("openmp_1d")->ArgsProduct({{512, 2048, 8192}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(pair_2d<true>)->Name("reference_2d")->Arg(24)->Unit(benchmark::kMillisecond);
BENCHMARK(pair_2d<false>)->Name("openmp_2d")->Arg(24)->Arg(48)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
