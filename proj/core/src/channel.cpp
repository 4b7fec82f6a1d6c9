#include "pagnn/channel.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace pagnn {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double a) {
  a = std::fmod(a, kTwoPi);
  return a < 0 ? a + kTwoPi : a;
}

// Constant column (L x 1).
CTensor const_col(const std::vector<cx>& v) {
  return CTensor::constant(
      TensorData({static_cast<int64_t>(v.size()), 1}, v));
}

void check_offsets(const std::vector<cx>& x, const ScenarioConfig& cfg) {
  const double tol = 1e-9;
  if (static_cast<int64_t>(x.size()) != int64_t(cfg.N) * cfg.M)
    throw ConfigError("channel: PA offset vector must have N*M entries");
  for (const cx& e : x)
    if (std::abs(e.imag()) > tol)
      throw ConfigError("channel: PA offsets must be real");
  for (int n = 0; n < cfg.N; ++n) {
    for (int m = 0; m < cfg.M; ++m) {
      double v = x[n * cfg.M + m].real();
      if (v < -tol || v > cfg.C + tol)
        throw ConfigError("channel: PA offset outside [0, C]");
      if (m > 0 && v < x[n * cfg.M + m - 1].real() - tol)
        throw ConfigError("channel: PA offsets not sorted along waveguide");
    }
  }
}

// Differentiable steering block e^{-j (2 pi / lambda) * l * sep * g(phi)}
// for phi a (1 x W) real tensor; returns (L x W).
CTensor steering_block(const CTensor& phi_row, int L, double elem_sep,
                       double lambda, SteeringConvention conv) {
  CTensor g = conv == SteeringConvention::kCosAngle ? cos_re(phi_row)
                                                    : phi_row;
  std::vector<cx> idx(L);
  for (int l = 0; l < L; ++l) idx[l] = cx(l, 0);
  CTensor phase = matmul(const_col(idx), g);  // (L x W)
  return cexp(scalar_mul(phase, cx(0.0, -kTwoPi * elem_sep / lambda)));
}

}  // namespace

double azimuth(const Vec3& from, const Vec3& to) {
  return wrap_angle(std::atan2(to.y - from.y, to.x - from.x));
}

std::vector<cx> los_steering(double aod, int L, double elem_sep,
                             double lambda, SteeringConvention conv) {
  double g = conv == SteeringConvention::kCosAngle ? std::cos(aod) : aod;
  std::vector<cx> out(L);
  for (int l = 0; l < L; ++l)
    out[l] = std::polar(1.0, -kTwoPi / lambda * l * elem_sep * g);
  return out;
}

std::vector<cx> rician_mix(const std::vector<cx>& los,
                           const std::vector<cx>& nlos, double kappa) {
  double a = std::sqrt(kappa / (1.0 + kappa));
  double b = std::sqrt(1.0 / (1.0 + kappa));
  std::vector<cx> out(los.size());
  for (size_t i = 0; i < los.size(); ++i) out[i] = a * los[i] + b * nlos[i];
  return out;
}

std::vector<cx> draw_rician(const std::vector<cx>& los, double kappa,
                            Rng& rng) {
  std::vector<cx> nlos(los.size());
  for (auto& e : nlos) e = rng.cgaussian();
  return rician_mix(los, nlos, kappa);
}

ChannelRealization realization_from_draws(
    Scenario scn, std::vector<std::vector<cx>> nlos_pa_ris,
    std::vector<std::vector<cx>> nlos_ris_ue, SteeringConvention conv) {
  const ScenarioConfig& cfg = scn.config;
  if (static_cast<int>(nlos_pa_ris.size()) != cfg.B * cfg.R ||
      static_cast<int>(nlos_ris_ue.size()) != cfg.R * cfg.K)
    throw ConfigError("channel: fading draw count mismatch");
  ChannelRealization real;
  real.scenario = std::move(scn);
  real.convention = conv;
  real.nlos_pa_ris = std::move(nlos_pa_ris);
  real.nlos_ris_ue = std::move(nlos_ris_ue);
  real.h_ris_ue.resize(static_cast<size_t>(cfg.R) * cfg.K);
  for (int r = 0; r < cfg.R; ++r) {
    const Vec3& rp = real.scenario.ris_positions[r];
    for (int k = 0; k < cfg.K; ++k) {
      const Vec3& up = real.scenario.ue_positions[k];
      double d = distance(rp, up);
      if (d <= 1e-12)
        throw ConfigError("channel: RIS and UE positions coincide");
      std::vector<cx> los = los_steering(azimuth(rp, up), cfg.L,
                                         cfg.elem_sep, cfg.lambda(), conv);
      std::vector<cx> h =
          rician_mix(los, real.nlos_ris_ue[r * cfg.K + k], cfg.kappa);
      double amp = std::sqrt(cfg.beta0 / std::pow(d, cfg.alpha_pl));
      for (auto& e : h) e *= amp;
      real.h_ris_ue[r * cfg.K + k] = std::move(h);
    }
  }
  return real;
}

ChannelRealization make_realization(const Scenario& scn, Rng& rng,
                                    SteeringConvention conv) {
  const ScenarioConfig& cfg = scn.config;
  auto draw = [&](int count) {
    std::vector<std::vector<cx>> out(count);
    for (auto& v : out) {
      v.resize(cfg.L);
      for (auto& e : v) e = rng.cgaussian();
    }
    return out;
  };
  auto pa_ris = draw(cfg.B * cfg.R);
  auto ris_ue = draw(cfg.R * cfg.K);
  return realization_from_draws(scn, std::move(pa_ris), std::move(ris_ue),
                                conv);
}

CTensor pinching_matrix(const CTensor& x_b, const ScenarioConfig& cfg) {
  check_offsets(x_b.values(), cfg);
  cx coeff(-cfg.zeta, -kTwoPi / cfg.guided_wavelength());
  CTensor e = cexp(scalar_mul(x_b, coeff));
  return block_diag(reshape(e, {cfg.N, cfg.M}));
}

CTensor pa_ris_channel(const ChannelRealization& real, int b, int r,
                       const CTensor& x_b) {
  const ScenarioConfig& cfg = real.scenario.config;
  check_offsets(x_b.values(), cfg);
  const Vec3& rp = real.scenario.ris_positions[r];
  double a_los = std::sqrt(cfg.kappa / (1.0 + cfg.kappa));
  double a_nlos = std::sqrt(1.0 / (1.0 + cfg.kappa));
  CTensor nlos_col = scalar_mul(
      const_col(real.nlos_pa_ris[b * cfg.R + r]), cx(a_nlos, 0));

  std::vector<CTensor> blocks;
  blocks.reserve(cfg.N);
  for (int n = 0; n < cfg.N; ++n) {
    const Vec3& fp = real.scenario.feed(b, n);
    double dy = rp.y - fp.y;
    double dz = rp.z - fp.z;
    double yz2 = dy * dy + dz * dz;
    CTensor x_n = reshape(slice_rows(reshape(x_b, {cfg.N * cfg.M, 1}),
                                     int64_t(n) * cfg.M, cfg.M),
                          {1, cfg.M});
    CTensor t = sub(CTensor::scalar(cx(rp.x - fp.x, 0)), x_n);  // (1 x M)
    CTensor d2 = add(mul(t, t), CTensor::scalar(cx(yz2, 0)));
    for (const cx& e : d2.values())
      if (e.real() <= 1e-24)
        throw ConfigError("channel: PA and RIS positions coincide");
    CTensor amp = scalar_mul(pow_const(d2, -cfg.alpha_pl / 4.0),
                             cx(std::sqrt(cfg.beta0), 0));
    CTensor phi = wrap_two_pi(atan2_re(CTensor::scalar(cx(dy, 0)), t));
    CTensor los = steering_block(phi, cfg.L, cfg.elem_sep, cfg.lambda(),
                                 real.convention);
    CTensor fading = add(scalar_mul(los, cx(a_los, 0)), nlos_col);
    blocks.push_back(mul(fading, amp));  // (L x M) * (1 x M)
  }
  return cfg.N == 1 ? blocks[0] : concat(blocks, 1);
}

CTensor pa_ue_channel(const ChannelRealization& real, int b, int k,
                      const CTensor& x_b) {
  const ScenarioConfig& cfg = real.scenario.config;
  check_offsets(x_b.values(), cfg);
  const Vec3& up = real.scenario.ue_positions[k];
  double lambda = cfg.lambda();
  double amp0 = std::sqrt(cfg.eta());

  std::vector<CTensor> parts;
  parts.reserve(cfg.N);
  for (int n = 0; n < cfg.N; ++n) {
    const Vec3& fp = real.scenario.feed(b, n);
    double dy = up.y - fp.y;
    double dz = up.z - fp.z;
    double yz2 = dy * dy + dz * dz;
    CTensor x_n = slice_rows(reshape(x_b, {cfg.N * cfg.M, 1}),
                             int64_t(n) * cfg.M, cfg.M);  // (M x 1)
    CTensor t = sub(CTensor::scalar(cx(up.x - fp.x, 0)), x_n);
    CTensor d2 = add(mul(t, t), CTensor::scalar(cx(yz2, 0)));
    for (const cx& e : d2.values())
      if (e.real() <= 1e-24)
        throw ConfigError("channel: PA and UE positions coincide");
    CTensor d = pow_const(d2, 0.5);
    CTensor phase = cexp(scalar_mul(d, cx(0.0, -kTwoPi / lambda)));
    parts.push_back(scalar_mul(mul(phase, reciprocal(d)), cx(amp0, 0)));
  }
  return cfg.N == 1 ? parts[0] : concat(parts, 0);  // (M*N x 1)
}

CTensor effective_channel(const ChannelRealization& real, int b, int k,
                          const CTensor& x_b,
                          const std::vector<CTensor>& phi_rows) {
  const ScenarioConfig& cfg = real.scenario.config;
  if (!phi_rows.empty() &&
      static_cast<int>(phi_rows.size()) != cfg.R)
    throw ConfigError("channel: expected one phase row per RIS");
  CTensor row = hermitian(pa_ue_channel(real, b, k, x_b));  // (1 x M*N)
  if (!phi_rows.empty()) {
    for (int r = 0; r < cfg.R; ++r) {
      std::vector<cx> hh = real.ris_ue(r, k);
      for (auto& e : hh) e = std::conj(e);
      CTensor hH = CTensor::constant(TensorData({1, cfg.L}, std::move(hh)));
      CTensor reflected = matmul(mul(hH, phi_rows[r]),
                                 pa_ris_channel(real, b, r, x_b));
      row = add(row, reflected);
    }
  }
  return matmul(row, pinching_matrix(x_b, cfg));
}

}  // namespace pagnn
