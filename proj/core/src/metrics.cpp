#include "pagnn/metrics.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace pagnn {

namespace {

void check_finite(const CTensor& t, const char* what) {
  for (const cx& e : t.values())
    if (!std::isfinite(e.real()) || !std::isfinite(e.imag()))
      throw ConfigError(std::string("metrics: non-finite ") + what);
}

void check_decisions(const DecisionSet& d, const ScenarioConfig& cfg) {
  if (static_cast<int>(d.x_pa.size()) != cfg.B ||
      static_cast<int>(d.W.size()) != cfg.B)
    throw ConfigError("metrics: decision set has wrong BS count");
  if (!d.phi.empty() && static_cast<int>(d.phi.size()) != cfg.R)
    throw ConfigError("metrics: decision set has wrong RIS count");
  for (const auto& t : d.x_pa) check_finite(t, "PA offsets");
  for (const auto& t : d.phi) check_finite(t, "phase values");
  for (const auto& t : d.W) check_finite(t, "beamformers");
  check_finite(d.U, "association weights");
}

CTensor entry(const CTensor& mat, int i, int j) {
  return slice_cols(slice_rows(mat, i, 1), j, 1);  // (1 x 1)
}

}  // namespace

EffectiveRows effective_rows(const ChannelRealization& real,
                             const DecisionSet& d) {
  const ScenarioConfig& cfg = real.scenario.config;
  check_decisions(d, cfg);
  EffectiveRows eff;
  eff.B = cfg.B;
  eff.K = cfg.K;
  eff.rows.reserve(static_cast<size_t>(cfg.B) * cfg.K);
  for (int b = 0; b < cfg.B; ++b)
    for (int k = 0; k < cfg.K; ++k)
      eff.rows.push_back(effective_channel(real, b, k, d.x_pa[b], d.phi));
  return eff;
}

CTensor per_user_rate(const ChannelRealization& real, const DecisionSet& d,
                      const EffectiveRows& eff) {
  const ScenarioConfig& cfg = real.scenario.config;
  check_decisions(d, cfg);
  const double inv_ln2 = 1.0 / std::numbers::ln2;

  // gains[b*K*K + kp*K + k] = h_hat^H_{b,k} w_{b,kp}
  std::vector<CTensor> gains(static_cast<size_t>(cfg.B) * cfg.K * cfg.K);
  for (int b = 0; b < cfg.B; ++b)
    for (int kp = 0; kp < cfg.K; ++kp) {
      CTensor w = slice_cols(d.W[b], kp, 1);  // (N x 1)
      for (int k = 0; k < cfg.K; ++k)
        gains[(b * cfg.K + kp) * cfg.K + k] = matmul(eff.at(b, k), w);
    }

  std::vector<CTensor> rates;
  rates.reserve(cfg.K);
  for (int k = 0; k < cfg.K; ++k) {
    CTensor signal;
    CTensor interference = CTensor::scalar(cx(cfg.sigma2, 0));
    for (int b = 0; b < cfg.B; ++b) {
      for (int kp = 0; kp < cfg.K; ++kp) {
        CTensor term =
            mul(entry(d.U, b, kp), gains[(b * cfg.K + kp) * cfg.K + k]);
        if (kp == k)
          signal = signal.valid() ? add(signal, term) : term;
        else
          interference = add(interference, modulus_sq(term));
      }
    }
    CTensor sinr = mul(modulus_sq(signal), reciprocal(interference));
    rates.push_back(scalar_mul(
        clog(add(sinr, CTensor::scalar(cx(1, 0)))), cx(inv_ln2, 0)));
  }
  return reshape(concat(rates, 0), {cfg.K, 1});
}

CTensor per_user_rate(const ChannelRealization& real, const DecisionSet& d) {
  return per_user_rate(real, d, effective_rows(real, d));
}

CTensor sum_rate(const ChannelRealization& real, const DecisionSet& d,
                 const EffectiveRows& eff) {
  return sum(per_user_rate(real, d, eff));
}

CTensor sum_rate(const ChannelRealization& real, const DecisionSet& d) {
  return sum(per_user_rate(real, d));
}

CTensor total_transmit_power(const DecisionSet& d) {
  CTensor total = CTensor::scalar(cx(0, 0));
  for (size_t b = 0; b < d.W.size(); ++b) {
    CTensor norms = sum_axis(modulus_sq(d.W[b]), 0);  // (1 x K)
    CTensor u_row = slice_rows(d.U, static_cast<int64_t>(b), 1);
    total = add(total, sum(mul(u_row, norms)));
  }
  return real_part(total);
}

CTensor energy_efficiency(const ChannelRealization& real,
                          const DecisionSet& d) {
  CTensor sr = sum_rate(real, d);
  CTensor consumed = add(total_transmit_power(d),
                         CTensor::scalar(cx(real.scenario.config.P_C, 0)));
  return mul(sr, reciprocal(consumed));
}

std::vector<double> per_bs_power(const DecisionSet& d) {
  std::vector<double> out(d.W.size(), 0.0);
  for (size_t b = 0; b < d.W.size(); ++b) {
    const auto& wv = d.W[b].values();
    int64_t N = d.W[b].rows(), K = d.W[b].cols();
    const auto& uv = d.U.values();
    for (int64_t k = 0; k < K; ++k) {
      double n2 = 0.0;
      for (int64_t n = 0; n < N; ++n) n2 += std::norm(wv[n * K + k]);
      out[b] += uv[b * K + k].real() * n2;
    }
  }
  return out;
}

std::string FeasibilityReport::describe() const {
  std::ostringstream out;
  auto flag = [&](const char* name, bool ok) {
    out << name << "=" << (ok ? "ok" : "FAIL") << " ";
  };
  flag("spacing", spacing_ok);
  flag("range", range_ok);
  flag("power", power_ok);
  flag("phase", phase_ok);
  flag("colsum", colsum_ok);
  flag("assoc", assoc_ok);
  return out.str();
}

FeasibilityReport check_feasibility(const DecisionSet& d,
                                    const ScenarioConfig& cfg, double tol,
                                    bool hard_u) {
  FeasibilityReport rep;
  const double unit_tol = 1e-12;

  for (int b = 0; b < cfg.B && b < static_cast<int>(d.x_pa.size()); ++b) {
    const auto& xv = d.x_pa[b].values();
    for (int n = 0; n < cfg.N; ++n)
      for (int m = 0; m < cfg.M; ++m) {
        double x = xv[n * cfg.M + m].real();
        if (x < -tol || x > cfg.C + tol) rep.range_ok = false;
        if (m > 0 &&
            x - xv[n * cfg.M + m - 1].real() < cfg.delta_min - tol)
          rep.spacing_ok = false;
      }
  }

  for (const auto& p : d.phi)
    for (const cx& e : p.values())
      if (std::abs(std::abs(e) - 1.0) > unit_tol) rep.phase_ok = false;

  for (double p : per_bs_power(d))
    if (p > cfg.P_max * (1.0 + tol)) rep.power_ok = false;

  const auto& uv = d.U.values();
  for (int k = 0; k < cfg.K; ++k) {
    double colsum = 0.0;
    int ones = 0;
    for (int b = 0; b < cfg.B; ++b) {
      double u = uv[b * cfg.K + k].real();
      colsum += u;
      if (u < -unit_tol || u > 1.0 + unit_tol) rep.assoc_ok = false;
      if (hard_u) {
        if (u != 0.0 && u != 1.0) rep.assoc_ok = false;
        if (u == 1.0) ++ones;
      }
    }
    if (std::abs(colsum - 1.0) > unit_tol) rep.colsum_ok = false;
    if (hard_u && ones != 1) rep.assoc_ok = false;
  }
  return rep;
}

}  // namespace pagnn
