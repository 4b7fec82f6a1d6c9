#include <benchmark/benchmark.h>

#include "pagnn/baselines.hpp"
#include "pagnn/training.hpp"

using namespace pagnn;

namespace {

ScenarioConfig bench_config(int B, int R, int N, int M, int L, int K) {
  ScenarioConfig cfg;
  cfg.B = B;
  cfg.R = R;
  cfg.N = N;
  cfg.M = M;
  cfg.L = L;
  cfg.K = K;
  cfg.seed = 1;
  cfg.validate();
  return cfg;
}

ModelConfig bench_model_config() {
  ModelConfig mc;
  mc.G1 = mc.G2 = mc.G3 = mc.G4 = mc.G5 = mc.G6 = mc.G7 = mc.G8 = mc.G9 = 1;
  mc.hidden = 16;
  mc.heads = 2;
  return mc;
}

}  // namespace

static void BM_ChannelSynthesis(benchmark::State& state) {
  ScenarioConfig cfg = bench_config(2, 2, 4, state.range(0), 8, 3);
  Rng rng(2);
  Scenario scn = build_scenario(cfg, rng);
  ChannelRealization real = make_realization(scn, rng);
  TensorData x = fixed_pa_positions(cfg, true);
  std::vector<CTensor> phi;
  for (int r = 0; r < cfg.R; ++r) {
    TensorData p = TensorData::zeros({1, cfg.L});
    for (auto& e : p.v) e = std::polar(1.0, rng.uniform(0, 6.28));
    phi.push_back(CTensor::constant(p));
  }
  CTensor xb = CTensor::constant(x);
  for (auto _ : state) {
    for (int b = 0; b < cfg.B; ++b)
      for (int k = 0; k < cfg.K; ++k)
        benchmark::DoNotOptimize(effective_channel(real, b, k, xb, phi));
  }
}
BENCHMARK(BM_ChannelSynthesis)->Arg(2)->Arg(4)->Arg(6);

static void BM_InferForward(benchmark::State& state) {
  ScenarioConfig cfg =
      bench_config(2, 2, 4, 2, 8, static_cast<int>(state.range(0)));
  Model model = init_model(bench_model_config(), cfg, 3);
  Dataset ds = generate_dataset(cfg, 4);
  ChannelRealization real = ds.realization(0, model.cfg.steering);
  Bound P = bind_const(model.params);
  ForwardOptions opt;
  for (auto _ : state) {
    ForwardResult res = model_forward(real, P, model, opt);
    benchmark::DoNotOptimize(res.sr.item());
  }
}
BENCHMARK(BM_InferForward)->Arg(2)->Arg(3)->Arg(4);

static void BM_TrainStep(benchmark::State& state) {
  ScenarioConfig cfg = bench_config(2, 2, 4, 2, 8, 3);
  Model model = init_model(bench_model_config(), cfg, 4);
  Dataset ds = generate_dataset(cfg, 4);
  ChannelRealization real = ds.realization(0, model.cfg.steering);
  Rng grng(5);
  AdamState st;
  for (auto _ : state) {
    Tape tape;
    Bound P = bind(model.params, tape);
    ForwardOptions opt;
    opt.train = true;
    opt.gumbel_rng = &grng;
    ForwardResult res = model_forward(real, P, model, opt);
    tape.backward(loss_sr({res.sr}));
    auto grads = collect_grads(model.params, P, tape);
    adam_step(model.params, grads, st, 1e-4);
  }
}
BENCHMARK(BM_TrainStep);

static void BM_RateEvaluation(benchmark::State& state) {
  ScenarioConfig cfg = bench_config(2, 2, 4, 2, 8, 3);
  Model model = init_model(bench_model_config(), cfg, 6);
  Dataset ds = generate_dataset(cfg, 4);
  ChannelRealization real = ds.realization(0, model.cfg.steering);
  Bound P = bind_const(model.params);
  ForwardOptions opt;
  ForwardResult res = model_forward(real, P, model, opt);
  for (auto _ : state)
    benchmark::DoNotOptimize(sum_rate(real, res.d).item());
}
BENCHMARK(BM_RateEvaluation);

BENCHMARK_MAIN();
