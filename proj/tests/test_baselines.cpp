#include <cmath>
#include <vector>

#include "doctest.h"
#include "pagnn/baselines.hpp"
#include "pagnn/training.hpp"
#include "test_util.hpp"

using namespace pagnn;
using testutil::small_config;

namespace {

ChannelRealization make_test_realization(const ScenarioConfig& cfg,
                                         uint64_t seed) {
  Rng rng(seed);
  Scenario scn = build_scenario(cfg, rng);
  return make_realization(scn, rng);
}

struct FrozenStage2 {
  std::vector<CTensor> x_pa, phi, w_hat;
};

FrozenStage2 random_stage2(const ScenarioConfig& cfg, uint64_t seed) {
  Rng rng(seed);
  FrozenStage2 out;
  for (int b = 0; b < cfg.B; ++b) {
    TensorData raw = testutil::random_real({cfg.N * cfg.M}, rng);
    out.x_pa.push_back(spacing_readout(CTensor::constant(raw), cfg));
  }
  for (int r = 0; r < cfg.R; ++r)
    out.phi.push_back(phase_readout(
        CTensor::constant(testutil::random_complex({1, cfg.L}, rng))));
  for (int b = 0; b < cfg.B; ++b)
    out.w_hat.push_back(
        CTensor::constant(testutil::random_complex({cfg.N, cfg.K}, rng)));
  return out;
}

}  // namespace

TEST_CASE("fixed PA layouts") {
  ScenarioConfig cfg = small_config(1, 1, 2, 2, 4, 1);
  TensorData packed = fixed_pa_positions(cfg, false);
  REQUIRE(packed.numel() == 4);
  CHECK(packed.v[0].real() == doctest::Approx(0.0));
  CHECK(packed.v[1].real() == doctest::Approx(0.1));
  CHECK(packed.v[2].real() == doctest::Approx(0.0));
  TensorData spread = fixed_pa_positions(cfg, true);
  CHECK(spread.v[0].real() == doctest::Approx(0.0));
  CHECK(spread.v[1].real() == doctest::Approx(cfg.C));
  // a single PA sits mid-waveguide in the spread layout
  ScenarioConfig one = small_config(1, 1, 2, 1, 4, 1);
  CHECK(fixed_pa_positions(one, true).v[0].real() ==
        doctest::Approx(one.C / 2));
}

TEST_CASE("RIS-free variant flips only the model flag") {
  ScenarioConfig cfg = small_config(2, 1, 2, 2, 4, 2);
  ModelConfig mc;
  mc.G1 = mc.G2 = mc.G3 = mc.G4 = mc.G5 = mc.G6 = mc.G7 = mc.G8 = mc.G9 = 1;
  mc.hidden = 8;
  mc.heads = 2;
  Model model = init_model(mc, cfg, 21);
  Model off = no_ris_mode(model);
  CHECK(!off.cfg.ris_enabled);
  CHECK(off.params.count() == model.params.count());
  CHECK(model.cfg.ris_enabled);  // the original is untouched
}

TEST_CASE("random association draws uniform one-hot columns") {
  Rng rng(22);
  std::vector<int> hits(3, 0);
  for (int rep = 0; rep < 3000; ++rep) {
    TensorData U = random_assoc(3, 2, rng);
    for (int k = 0; k < 2; ++k) {
      int ones = 0, row = -1;
      for (int b = 0; b < 3; ++b) {
        if (U.v[b * 2 + k] == cx(1, 0)) {
          ++ones;
          row = b;
        } else {
          CHECK(U.v[b * 2 + k] == cx(0, 0));
        }
      }
      CHECK(ones == 1);
      if (k == 0) ++hits[row];
    }
  }
  for (int h : hits) CHECK(h > 800);  // roughly uniform across BSs
}

TEST_CASE("association-conditioned decisions respect every budget") {
  ScenarioConfig cfg = small_config(2, 1, 2, 2, 4, 2);
  ChannelRealization real = make_test_realization(cfg, 23);
  FrozenStage2 fr = random_stage2(cfg, 24);
  Rng rng(25);
  for (int rep = 0; rep < 50; ++rep) {
    TensorData U = random_assoc(cfg.B, cfg.K, rng);
    DecisionSet d =
        decisions_with_association(real, fr.x_pa, fr.phi, fr.w_hat, U);
    CHECK(check_feasibility(d, cfg, 1e-9, true).feasible());
  }
}

TEST_CASE("exhaustive association search beats every explicit candidate") {
  ScenarioConfig cfg = small_config(2, 1, 2, 2, 4, 2);
  ChannelRealization real = make_test_realization(cfg, 26);
  FrozenStage2 fr = random_stage2(cfg, 27);
  OracleResult best = oracle_association(real, fr.x_pa, fr.phi, fr.w_hat);

  double brute = -1;
  TensorData brute_u;
  for (int c = 0; c < 4; ++c) {  // B^K = 2^2 candidates
    TensorData U = TensorData::zeros({2, 2});
    U.v[(c & 1) * 2 + 0] = cx(1, 0);
    U.v[((c >> 1) & 1) * 2 + 1] = cx(1, 0);
    DecisionSet d =
        decisions_with_association(real, fr.x_pa, fr.phi, fr.w_hat, U);
    double sr = sum_rate(real, d).item().real();
    if (sr > brute) {
      brute = sr;
      brute_u = U;
    }
  }
  CHECK(best.sr == doctest::Approx(brute).epsilon(1e-9));
  for (int64_t i = 0; i < 4; ++i) CHECK(best.U.v[i] == brute_u.v[i]);
}

TEST_CASE("oracle association dominates random association on average") {
  ScenarioConfig cfg = small_config(2, 1, 2, 2, 4, 2);
  Rng rng(28);
  int oracle_wins = 0;
  const int reps = 30;
  for (int rep = 0; rep < reps; ++rep) {
    ChannelRealization real = make_test_realization(cfg, 100 + rep);
    FrozenStage2 fr = random_stage2(cfg, 200 + rep);
    OracleResult best = oracle_association(real, fr.x_pa, fr.phi, fr.w_hat);
    TensorData U = random_assoc(cfg.B, cfg.K, rng);
    DecisionSet d =
        decisions_with_association(real, fr.x_pa, fr.phi, fr.w_hat, U);
    double sr = sum_rate(real, d).item().real();
    CHECK(best.sr >= sr - 1e-9);
    if (best.sr > sr + 1e-9) ++oracle_wins;
  }
  CHECK(oracle_wins > 0);
}

TEST_CASE("oracle search rejects an intractable candidate count") {
  ScenarioConfig cfg = small_config(8, 1, 8, 2, 4, 8);
  ChannelRealization real = make_test_realization(cfg, 29);
  FrozenStage2 fr = random_stage2(cfg, 30);
  // 8^8 candidates is far past the enumeration guard
  CHECK_THROWS_AS(oracle_association(real, fr.x_pa, fr.phi, fr.w_hat),
                  ConfigError);
}

TEST_CASE("random search probe yields feasible, improving solutions") {
  ScenarioConfig cfg = small_config(2, 1, 2, 2, 4, 2);
  ChannelRealization real = make_test_realization(cfg, 31);
  Rng r1(32), r2(32);
  ProbeResult small = random_search_probe(real, 2, r1);
  CHECK(check_feasibility(small.d, cfg, 1e-9, true).feasible());
  CHECK(small.sr > 0.0);
  ProbeResult big = random_search_probe(real, 20, r2);
  CHECK(big.sr >= small.sr - 1e-12);  // same stream, more attempts
}
