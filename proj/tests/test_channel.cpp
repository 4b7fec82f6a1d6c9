#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "pagnn/channel.hpp"
#include "pagnn/mappings.hpp"
#include "test_util.hpp"

using namespace pagnn;
using testutil::small_config;

namespace {

constexpr double kPi = 3.14159265358979323846;

ChannelRealization make_test_realization(
    const ScenarioConfig& cfg, uint64_t seed,
    SteeringConvention conv = SteeringConvention::kLiteralAngle) {
  Rng rng(seed);
  Scenario scn = build_scenario(cfg, rng);
  return make_realization(scn, rng, conv);
}

std::vector<cx> valid_offsets(const ScenarioConfig& cfg, Rng& rng) {
  std::vector<cx> x(static_cast<size_t>(cfg.N) * cfg.M);
  for (int n = 0; n < cfg.N; ++n) {
    double pos = 0.3 * rng.uniform();
    for (int m = 0; m < cfg.M; ++m) {
      pos += cfg.delta_min + rng.uniform() * 0.8;
      x[n * cfg.M + m] = cx(std::min(pos, cfg.C), 0);
    }
  }
  return x;
}

// Independent scalar evaluation of the effective channel row, written as
// plain loops over the closed-form link models.
std::vector<cx> effective_row_oracle(const ChannelRealization& real, int b,
                                     int k, const std::vector<cx>& x,
                                     const std::vector<std::vector<cx>>& phi) {
  const ScenarioConfig& cfg = real.scenario.config;
  const int MN = cfg.N * cfg.M;
  double lambda = cfg.lambda();
  double a_los = std::sqrt(cfg.kappa / (1 + cfg.kappa));
  double a_nlos = std::sqrt(1.0 / (1 + cfg.kappa));

  // PA positions in space
  std::vector<Vec3> pa(MN);
  for (int n = 0; n < cfg.N; ++n)
    for (int m = 0; m < cfg.M; ++m) {
      Vec3 p = real.scenario.feed(b, n);
      p.x += x[n * cfg.M + m].real();
      pa[n * cfg.M + m] = p;
    }

  // direct PA-UE column, conjugated
  const Vec3& ue = real.scenario.ue_positions[k];
  std::vector<cx> row(MN);
  for (int i = 0; i < MN; ++i) {
    double d = distance(pa[i], ue);
    cx f = std::sqrt(cfg.eta()) * std::polar(1.0, -2 * kPi * d / lambda) / d;
    row[i] = std::conj(f);
  }

  // reflected paths
  for (int r = 0; r < static_cast<int>(phi.size()); ++r) {
    const Vec3& rp = real.scenario.ris_positions[r];
    const std::vector<cx>& h = real.ris_ue(r, k);
    const std::vector<cx>& nlos = real.nlos_pa_ris[b * cfg.R + r];
    for (int i = 0; i < MN; ++i) {
      double d = distance(pa[i], rp);
      double amp =
          std::sqrt(cfg.beta0) * std::pow(d * d, -cfg.alpha_pl / 4.0);
      double az = std::atan2(rp.y - pa[i].y, rp.x - pa[i].x);
      if (az < 0) az += 2 * kPi;
      double g = real.convention == SteeringConvention::kCosAngle
                     ? std::cos(az)
                     : az;
      cx acc(0);
      for (int l = 0; l < cfg.L; ++l) {
        cx steer = std::polar(1.0, -2 * kPi / lambda * l * cfg.elem_sep * g);
        cx H_li = amp * (a_los * steer + a_nlos * nlos[l]);
        acc += std::conj(h[l]) * phi[r][l] * H_li;
      }
      row[i] += acc;
    }
  }

  // in-waveguide response folds MN entries down to N
  std::vector<cx> eff(cfg.N, cx(0));
  cx coeff(-cfg.zeta, -2 * kPi / cfg.guided_wavelength());
  for (int n = 0; n < cfg.N; ++n)
    for (int m = 0; m < cfg.M; ++m) {
      int i = n * cfg.M + m;
      eff[n] += row[i] * std::exp(coeff * x[i]);
    }
  return eff;
}

}  // namespace

TEST_CASE("steering vectors have unit modulus and linear phase") {
  std::vector<cx> s = los_steering(1.1, 6, 0.025, 0.05,
                                   SteeringConvention::kLiteralAngle);
  REQUIRE(s.size() == 6);
  for (const cx& e : s) CHECK(std::abs(e) == doctest::Approx(1.0));
  double step = std::arg(s[2] / s[1]);
  CHECK(std::arg(s[3] / s[2]) == doctest::Approx(step).epsilon(1e-12));
  // cosine convention differs from the literal-angle one
  std::vector<cx> c =
      los_steering(1.1, 6, 0.025, 0.05, SteeringConvention::kCosAngle);
  CHECK(std::abs(s[1] - c[1]) > 1e-6);
}

TEST_CASE("Rician mixing uses the power-preserving coefficients") {
  std::vector<cx> los{cx(1, 0), cx(0, 1)};
  std::vector<cx> nlos{cx(0.5, -0.5), cx(-1, 0)};
  double kappa = 3.0;
  std::vector<cx> mixed = rician_mix(los, nlos, kappa);
  double a = std::sqrt(kappa / (1 + kappa));
  double b = std::sqrt(1.0 / (1 + kappa));
  CHECK(std::abs(mixed[0] - (a * los[0] + b * nlos[0])) < 1e-15);
  CHECK(std::abs(mixed[1] - (a * los[1] + b * nlos[1])) < 1e-15);
  CHECK(a * a + b * b == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("azimuth wraps into the first turn") {
  Vec3 o{0, 0, 0};
  CHECK(azimuth(o, {1, 1, 0}) == doctest::Approx(kPi / 4).epsilon(1e-12));
  CHECK(azimuth(o, {-1, 0, 0}) == doctest::Approx(kPi).epsilon(1e-12));
  CHECK(azimuth(o, {0, -1, 0}) ==
        doctest::Approx(1.5 * kPi).epsilon(1e-12));
}

TEST_CASE("pinching matrix is block diagonal with attenuated phases") {
  ScenarioConfig cfg = small_config(1, 1, 2, 2, 4, 2);
  Rng rng(3);
  std::vector<cx> x = valid_offsets(cfg, rng);
  CTensor G = pinching_matrix(
      CTensor::constant(TensorData({cfg.N * cfg.M}, x)), cfg);
  CHECK(G.rows() == cfg.N * cfg.M);
  CHECK(G.cols() == cfg.N);
  for (int n = 0; n < cfg.N; ++n)
    for (int m = 0; m < cfg.M; ++m) {
      double off = x[n * cfg.M + m].real();
      cx e = G.values()[(n * cfg.M + m) * cfg.N + n];
      CHECK(std::abs(e) ==
            doctest::Approx(std::exp(-cfg.zeta * off)).epsilon(1e-12));
      CHECK(std::arg(e) ==
            doctest::Approx(std::arg(std::polar(
                1.0, -2 * kPi / cfg.guided_wavelength() * off)))
                .epsilon(1e-9));
      cx other = G.values()[(n * cfg.M + m) * cfg.N + (1 - n)];
      CHECK(other == cx(0, 0));
    }
}

TEST_CASE("malformed PA offsets are rejected") {
  ScenarioConfig cfg = small_config(1, 1, 2, 2, 4, 2);
  auto wrap = [&](std::vector<cx> x) {
    int64_t n = static_cast<int64_t>(x.size());
    return pinching_matrix(CTensor::constant(TensorData({n}, std::move(x))),
                           cfg);
  };
  CHECK_THROWS_AS(wrap({cx(0, 0), cx(1, 0), cx(2, 0)}), ConfigError);
  CHECK_THROWS_AS(wrap({cx(0, 0), cx(1, 0.5), cx(2, 0), cx(3, 0)}),
                  ConfigError);
  CHECK_THROWS_AS(wrap({cx(2, 0), cx(1, 0), cx(0, 0), cx(3, 0)}),
                  ConfigError);  // unsorted within waveguide 0
  CHECK_THROWS_AS(wrap({cx(0, 0), cx(11, 0), cx(0, 0), cx(3, 0)}),
                  ConfigError);  // beyond the waveguide end
}

TEST_CASE("effective channel row matches the scalar oracle") {
  for (uint64_t seed : {21ull, 22ull, 23ull}) {
    ScenarioConfig cfg = small_config(2, 2, 2, 3, 5, 2, seed);
    ChannelRealization real = make_test_realization(cfg, seed);
    Rng rng(seed * 7 + 1);
    for (int b = 0; b < cfg.B; ++b) {
      std::vector<cx> x = valid_offsets(cfg, rng);
      std::vector<std::vector<cx>> phi(cfg.R);
      std::vector<CTensor> phi_rows;
      for (int r = 0; r < cfg.R; ++r) {
        phi[r].resize(cfg.L);
        for (auto& e : phi[r]) e = std::polar(1.0, rng.uniform(0, 2 * kPi));
        phi_rows.push_back(
            CTensor::constant(TensorData({1, cfg.L}, phi[r])));
      }
      CTensor xb = CTensor::constant(TensorData({cfg.N * cfg.M}, x));
      for (int k = 0; k < cfg.K; ++k) {
        CTensor eff = effective_channel(real, b, k, xb, phi_rows);
        std::vector<cx> want = effective_row_oracle(real, b, k, x, phi);
        REQUIRE(eff.numel() == cfg.N);
        for (int n = 0; n < cfg.N; ++n) {
          double rel = std::abs(eff.values()[n] - want[n]) /
                       std::max(std::abs(want[n]), 1e-30);
          CHECK(rel < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("RIS-free effective channel is the direct path only") {
  ScenarioConfig cfg = small_config(1, 1, 2, 2, 4, 2);
  ChannelRealization real = make_test_realization(cfg, 31);
  Rng rng(5);
  std::vector<cx> x = valid_offsets(cfg, rng);
  CTensor xb = CTensor::constant(TensorData({cfg.N * cfg.M}, x));
  CTensor eff = effective_channel(real, 0, 0, xb, {});
  std::vector<cx> want = effective_row_oracle(real, 0, 0, x, {});
  for (int n = 0; n < cfg.N; ++n)
    CHECK(std::abs(eff.values()[n] - want[n]) <
          1e-12 * std::abs(want[n]));
}

TEST_CASE("frozen fading draws make realizations reproducible") {
  ScenarioConfig cfg = small_config(2, 1, 2, 2, 4, 2);
  Rng rng(77);
  Scenario scn = build_scenario(cfg, rng);
  Rng draw_a(5), draw_b(5);
  ChannelRealization a = make_realization(scn, draw_a);
  ChannelRealization b = make_realization(scn, draw_b);
  for (size_t i = 0; i < a.h_ris_ue.size(); ++i)
    for (int l = 0; l < cfg.L; ++l)
      CHECK(a.h_ris_ue[i][l] == b.h_ris_ue[i][l]);
}

TEST_CASE("channel synthesis gradients match finite differences") {
  ScenarioConfig cfg = small_config(2, 1, 2, 2, 4, 2);
  ChannelRealization real = make_test_realization(cfg, 41);
  Rng rng(6);
  TensorData x0({cfg.N * cfg.M}, valid_offsets(cfg, rng));
  TensorData ph0 = testutil::random_complex({1, cfg.L}, rng);

  double err = testutil::fd_check2(
      [&](const CTensor& x, const CTensor& phraw, Tape&) {
        std::vector<CTensor> phis{phase_readout(phraw)};
        CTensor acc = CTensor::scalar(cx(0, 0));
        for (int b = 0; b < cfg.B; ++b)
          for (int k = 0; k < cfg.K; ++k)
            acc = add(acc, sum(modulus_sq(effective_channel(
                          real, b, k, real_part(x), phis))));
        return acc;
      },
      x0, ph0);
  CHECK(err < 1e-5);
}
