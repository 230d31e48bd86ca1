#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "pftrunc/rootsolve.hpp"

namespace {

void BM_RootsInUnit(benchmark::State& state) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    std::vector<pftrunc::PolyCoeffs> polys;
    for (int i = 0; i < 1024; ++i) polys.push_back({{u(rng), u(rng), u(rng), u(rng)}});
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(pftrunc::roots_in_unit(polys[i]));
        i = (i + 1) % polys.size();
    }
}
BENCHMARK(BM_RootsInUnit);

void BM_Bisect(benchmark::State& state) {
    const double tol = std::pow(10.0, -static_cast<double>(state.range(0)));
    double shift = 0.1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(pftrunc::bisect([&](double h) { return std::cos(h) - h + shift; }, 0.0, 1.0, tol));
        shift = shift > 0.2 ? 0.1 : shift + 1e-3;
    }
}
BENCHMARK(BM_Bisect)->Arg(6)->Arg(10)->Arg(14);

}  // namespace
