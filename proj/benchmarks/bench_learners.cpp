#include <benchmark/benchmark.h>

#include <random>

#include "pftrunc/learners.hpp"
#include "pftrunc/registry.hpp"

namespace {

using pftrunc::Vec;

struct Stream {
    std::vector<Vec> grads;
    std::vector<double> losses;
};

Stream make_stream(std::size_t dim, std::size_t n) {
    std::mt19937_64 rng(42);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Stream s;
    for (std::size_t i = 0; i < n; ++i) {
        Vec g(dim);
        for (auto& v : g) v = normal(rng);
        const double scale = unif(rng) / pftrunc::norm(g);
        for (auto& v : g) v *= scale;
        s.grads.push_back(std::move(g));
        s.losses.push_back(unif(rng) * unif(rng));
    }
    return s;
}

void BM_Step(benchmark::State& state, const char* algo) {
    const auto dim = static_cast<std::size_t>(state.range(0));
    const Stream stream = make_stream(dim, 4096);
    const bool tuned = pftrunc::requires_step_size(algo);
    auto learner = pftrunc::make_learner(algo, dim, pftrunc::LossKind::absolute,
                                         tuned ? std::optional<double>(0.1) : std::nullopt);
    std::size_t i = 0;
    for (auto _ : state) {
        learner->update(stream.losses[i], stream.grads[i]);
        benchmark::DoNotOptimize(learner->weights().data());
        i = (i + 1) % stream.grads.size();
    }
    state.SetItemsProcessed(state.iterations());
}

}  // namespace

BENCHMARK_CAPTURE(BM_Step, sgd, "sgd")->Arg(10)->Arg(100)->Arg(1000);
BENCHMARK_CAPTURE(BM_Step, aprox, "aprox")->Arg(10)->Arg(100)->Arg(1000);
BENCHMARK_CAPTURE(BM_Step, coin, "coin")->Arg(10)->Arg(100)->Arg(1000);
BENCHMARK_CAPTURE(BM_Step, cocob, "cocob")->Arg(10)->Arg(100)->Arg(1000);
BENCHMARK_CAPTURE(BM_Step, implicit_coin, "implicit-coin")->Arg(10)->Arg(100)->Arg(1000);
BENCHMARK_CAPTURE(BM_Step, implicit_coin_proj, "implicit-coin-proj")->Arg(10)->Arg(100)->Arg(1000);
BENCHMARK_CAPTURE(BM_Step, cw_implicit_coin, "cw-implicit-coin")->Arg(10)->Arg(100)->Arg(1000);
