#include "pagnn/baselines.hpp"

#include <cmath>

namespace pagnn {

TensorData fixed_pa_positions(const ScenarioConfig& cfg, bool uniform) {
  TensorData x = TensorData::zeros({int64_t(cfg.N) * cfg.M});
  for (int n = 0; n < cfg.N; ++n)
    for (int m = 0; m < cfg.M; ++m) {
      double v;
      if (!uniform) {
        v = m * cfg.delta_min;
      } else if (cfg.M == 1) {
        v = cfg.C / 2.0;
      } else {
        v = m * cfg.C / (cfg.M - 1);
        if (cfg.C / (cfg.M - 1) < cfg.delta_min)
          throw ConfigError("fixed_pa: uniform spread violates min spacing");
      }
      x.v[n * cfg.M + m] = cx(v, 0);
    }
  return x;
}

Model no_ris_mode(const Model& model) {
  Model out = model;
  out.cfg.ris_enabled = false;
  return out;
}

TensorData random_assoc(int B, int K, Rng& rng) {
  TensorData u = TensorData::zeros({B, K});
  for (int k = 0; k < K; ++k)
    u.v[static_cast<int64_t>(rng.uniform_int(B)) * K + k] = cx(1, 0);
  return u;
}

namespace {

// Per-BS power scale of the budget rescale for a given association.
std::vector<double> power_scales(const std::vector<std::vector<double>>& p_t,
                                 const TensorData& U,
                                 const ScenarioConfig& cfg) {
  std::vector<double> scale(cfg.B, 1.0);
  for (int b = 0; b < cfg.B; ++b) {
    double used = 0.0;
    for (int k = 0; k < cfg.K; ++k)
      used += U.v[b * cfg.K + k].real() * p_t[b][k];
    if (used > cfg.P_max) scale[b] = cfg.P_max / used;
  }
  return scale;
}

std::vector<std::vector<double>> beam_powers(
    const std::vector<CTensor>& w_hat, const ScenarioConfig& cfg) {
  std::vector<std::vector<double>> p(cfg.B, std::vector<double>(cfg.K, 0.0));
  for (int b = 0; b < cfg.B; ++b) {
    const auto& wv = w_hat[b].values();
    for (int k = 0; k < cfg.K; ++k)
      for (int n = 0; n < cfg.N; ++n)
        p[b][k] += std::norm(wv[n * cfg.K + k]);
  }
  return p;
}

}  // namespace

DecisionSet decisions_with_association(const ChannelRealization& real,
                                       const std::vector<CTensor>& x_pa,
                                       const std::vector<CTensor>& phi,
                                       const std::vector<CTensor>& w_hat,
                                       const TensorData& U) {
  const ScenarioConfig& cfg = real.scenario.config;
  auto p_t = beam_powers(w_hat, cfg);
  auto scale = power_scales(p_t, U, cfg);
  DecisionSet d;
  d.x_pa = x_pa;
  d.phi = phi;
  for (int b = 0; b < cfg.B; ++b)
    d.W.push_back(scalar_mul(w_hat[b], cx(std::sqrt(scale[b]), 0)));
  d.U = CTensor::constant(U);
  return d;
}

OracleResult oracle_association(const ChannelRealization& real,
                                const std::vector<CTensor>& x_pa,
                                const std::vector<CTensor>& phi,
                                const std::vector<CTensor>& w_hat) {
  const ScenarioConfig& cfg = real.scenario.config;
  double n_cand_d = std::pow(static_cast<double>(cfg.B), cfg.K);
  if (n_cand_d > 4096.0)
    throw ConfigError("oracle_association: B^K exceeds 4096");
  int64_t n_cand = static_cast<int64_t>(n_cand_d);

  // gains[b][kp][k] = h_hat^H_{b,k} w_hat_{b,kp}
  std::vector<std::vector<std::vector<cx>>> g(
      cfg.B, std::vector<std::vector<cx>>(cfg.K, std::vector<cx>(cfg.K)));
  for (int b = 0; b < cfg.B; ++b)
    for (int k = 0; k < cfg.K; ++k) {
      CTensor row = effective_channel(real, b, k, x_pa[b], phi);
      const auto& rv = row.values();
      const auto& wv = w_hat[b].values();
      for (int kp = 0; kp < cfg.K; ++kp) {
        cx acc(0);
        for (int n = 0; n < cfg.N; ++n) acc += rv[n] * wv[n * cfg.K + kp];
        g[b][kp][k] = acc;
      }
    }
  auto p_t = beam_powers(w_hat, cfg);

  OracleResult best;
  best.sr = -1.0;
  std::vector<int> assign(cfg.K, 0);
  for (int64_t c = 0; c < n_cand; ++c) {
    int64_t rem = c;
    for (int k = 0; k < cfg.K; ++k) {
      assign[k] = static_cast<int>(rem % cfg.B);
      rem /= cfg.B;
    }
    TensorData U = TensorData::zeros({cfg.B, cfg.K});
    for (int k = 0; k < cfg.K; ++k) U.v[assign[k] * cfg.K + k] = cx(1, 0);
    auto scale = power_scales(p_t, U, cfg);

    double sr = 0.0;
    for (int k = 0; k < cfg.K; ++k) {
      cx sig = std::sqrt(scale[assign[k]]) * g[assign[k]][k][k];
      double interf = cfg.sigma2;
      for (int kp = 0; kp < cfg.K; ++kp) {
        if (kp == k) continue;
        interf += scale[assign[kp]] * std::norm(g[assign[kp]][kp][k]);
      }
      sr += std::log2(1.0 + std::norm(sig) / interf);
    }
    if (sr > best.sr) {
      best.sr = sr;
      best.U = std::move(U);
    }
  }
  return best;
}

ProbeResult random_search_probe(const ChannelRealization& real, int budget,
                                Rng& rng) {
  const ScenarioConfig& cfg = real.scenario.config;
  ProbeResult best;
  best.sr = -1.0;
  for (int it = 0; it < budget; ++it) {
    TensorData raw = TensorData::zeros({int64_t(cfg.N) * cfg.M});
    for (auto& e : raw.v) e = cx(rng.gaussian(), 0);
    DecisionSet d;
    for (int b = 0; b < cfg.B; ++b)
      d.x_pa.push_back(spacing_readout(CTensor::constant(raw), cfg));
    for (int r = 0; r < cfg.R; ++r) {
      TensorData v = TensorData::zeros({1, cfg.L});
      for (auto& e : v.v) e = rng.cgaussian();
      d.phi.push_back(phase_readout(CTensor::constant(v)));
    }
    TensorData U = random_assoc(cfg.B, cfg.K, rng);
    d.U = CTensor::constant(U);

    // Random HZM coefficients and powers through the budget rescale.
    TensorData p_raw = TensorData::zeros({cfg.B, cfg.K});
    for (auto& e : p_raw.v) e = cx(rng.gaussian(), 0);
    CTensor p = power_readout(CTensor::constant(p_raw),
                              CTensor::constant(U), cfg);
    for (int b = 0; b < cfg.B; ++b) {
      std::vector<CTensor> z_rows;
      for (int k = 0; k < cfg.K; ++k)
        z_rows.push_back(effective_channel(real, b, k, d.x_pa[b], d.phi));
      CTensor Q = zf_matrix(concat(z_rows, 0));
      std::vector<CTensor> cols;
      for (int k = 0; k < cfg.K; ++k) {
        CTensor alpha = CTensor::scalar(cx(rng.uniform(), 0));
        CTensor dir =
            hzm_direction(hermitian(z_rows[k]), slice_cols(Q, k, 1), alpha);
        cols.push_back(
            scale_beam(dir, slice_cols(slice_rows(p, b, 1), k, 1)));
      }
      d.W.push_back(concat(cols, 1));
    }

    double sr = sum_rate(real, d).item().real();
    if (sr > best.sr) {
      best.sr = sr;
      best.ee = energy_efficiency(real, d).item().real();
      best.d = d;
    }
  }
  return best;
}

}  // namespace pagnn
