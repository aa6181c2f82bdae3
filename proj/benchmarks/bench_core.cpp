#include <benchmark/benchmark.h>

#include "relrank/nn.hpp"
#include "relrank/rng.hpp"

using namespace relrank;
using namespace relrank::nn;

static void BM_DenseForward(benchmark::State& state) {
    Rng rng(1);
    const auto width = static_cast<std::size_t>(state.range(0));
    DenseLayer layer(width, width, Activation::Relu);
    layer.init(rng);
    Tensor x({32, width});
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<Real>(rng.uniform(-1, 1));
    for (auto _ : state) {
        benchmark::DoNotOptimize(layer.forward(x));
    }
    state.SetItemsProcessed(state.iterations() * 32);
}
BENCHMARK(BM_DenseForward)->Arg(128)->Arg(256);

BENCHMARK_MAIN();
