#include <benchmark/benchmark.h>

#include "s2r/backbone.hpp"
#include "s2r/patch_ops.hpp"
#include "s2r/training.hpp"
#include "s2r/wavelet.hpp"

using namespace s2r;

namespace {

void BM_Patchify(benchmark::State& state) {
    const int k = static_cast<int>(state.range(0));
    const auto x = torch::randn({2, 3, 256, 512});
    for (auto _ : state) {
        auto ps = patchify(x, k);
        benchmark::DoNotOptimize(unpatchify(ps).data_ptr());
    }
}
BENCHMARK(BM_Patchify)->Arg(1)->Arg(2)->Arg(4);

void BM_Dwt2(benchmark::State& state) {
    const auto x = torch::randn({2, 3, state.range(0), 2 * state.range(0)});
    for (auto _ : state) benchmark::DoNotOptimize(idwt2(dwt2(x)).data_ptr());
}
BENCHMARK(BM_Dwt2)->Arg(64)->Arg(256);

void BM_BackbonePhi(benchmark::State& state) {
    FeatureBackbone bb{BackboneConfig{}};
    torch::NoGradGuard guard;
    const auto x = torch::rand({2, 3, 64, 128}) * 2 - 1;
    for (auto _ : state) benchmark::DoNotOptimize(bb->phi(x, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_BackbonePhi)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_ToyTrainStep(benchmark::State& state) {
    auto cfg = RunConfig::toy();
    const auto data = resolve_data(cfg.data);
    Trainer trainer(cfg, data.synthetic_train, data.real);
    for (auto _ : state) benchmark::DoNotOptimize(trainer.step().total_g());
}
BENCHMARK(BM_ToyTrainStep)->Unit(benchmark::kMillisecond)->Iterations(5);

}  // namespace
BENCHMARK_MAIN();
