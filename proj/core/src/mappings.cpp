#include "pagnn/mappings.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>

namespace pagnn {

namespace {

using CMat =
    Eigen::Matrix<cx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

const double kRawClamp = 30.0;  // sigmoid inputs clamped to keep grads finite

}  // namespace

CTensor spacing_readout(const CTensor& raw, const ScenarioConfig& cfg) {
  if (raw.numel() != int64_t(cfg.N) * cfg.M)
    throw ConfigError("spacing_readout: expected N*M raw values");
  double budget = spacing_budget(cfg);
  CTensor delta = scalar_mul(
      sigmoid_re(clamp_re(raw, -kRawClamp, kRawClamp)), cx(budget, 0));
  delta = reshape(delta, {int64_t(cfg.N) * cfg.M, 1});

  std::vector<CTensor> parts;
  parts.reserve(cfg.N);
  std::vector<cx> offsets(cfg.M);
  for (int m = 0; m < cfg.M; ++m) offsets[m] = cx(m * cfg.delta_min, 0);
  CTensor offs = CTensor::constant(TensorData({cfg.M, 1}, offsets));

  for (int n = 0; n < cfg.N; ++n) {
    CTensor d_n = slice_rows(delta, int64_t(n) * cfg.M, cfg.M);
    CTensor total = real_part(sum(d_n));
    if (total.item().real() > budget)
      d_n = scalar_mul(mul(d_n, reciprocal(total)), cx(budget, 0));
    parts.push_back(add(cumsum(d_n), offs));
  }
  CTensor x = cfg.N == 1 ? parts[0] : concat(parts, 0);
  return reshape(x, {int64_t(cfg.N) * cfg.M});
}

CTensor phase_readout(const CTensor& v, MappingFlags* flags) {
  const double tiny = 1e-12;
  std::vector<cx> keep(v.numel(), cx(1, 0)), fix(v.numel(), cx(0, 0));
  int degenerate = 0;
  const auto& vals = v.values();
  for (int64_t i = 0; i < v.numel(); ++i)
    if (std::abs(vals[i]) < tiny) {
      keep[i] = cx(0, 0);
      fix[i] = cx(1, 0);
      ++degenerate;
    }
  CTensor u = v;
  if (degenerate) {
    if (flags) flags->zero_phase += degenerate;
    u = add(mul(v, CTensor::constant(TensorData(v.shape(), keep))),
            CTensor::constant(TensorData(v.shape(), fix)));
  }
  return mul(u, reciprocal(modulus(u)));
}

CTensor zf_matrix(const CTensor& Z, MappingFlags* flags) {
  int64_t K = Z.rows(), N = Z.cols();
  if (K > N) throw ConfigError("zf_matrix: more rows than columns");
  CTensor gram = matmul(Z, hermitian(Z));  // (K x K)

  Eigen::Map<const CMat> g(gram.values().data(), K, K);
  Eigen::JacobiSVD<CMat> svd(g);
  double smax = svd.singularValues()(0);
  double smin = svd.singularValues()(K - 1);
  if (smax <= 0.0 || smin < 1e-12 * smax) {
    if (flags) flags->zf_regularized += 1;
    double tr = 0.0;
    for (int64_t i = 0; i < K; ++i)
      tr += gram.values()[i * K + i].real();
    double eps = tr > 0.0 ? 1e-9 * tr / static_cast<double>(K) : 1e-9;
    std::vector<cx> ridge(static_cast<size_t>(K) * K, cx(0, 0));
    for (int64_t i = 0; i < K; ++i) ridge[i * K + i] = cx(eps, 0);
    gram = add(gram, CTensor::constant(TensorData({K, K}, ridge)));
  }
  return matmul(hermitian(Z), inverse(gram));
}

CTensor hzm_direction(const CTensor& hhat, const CTensor& q,
                      const CTensor& alpha, MappingFlags* flags) {
  CTensor hn = norm(hhat), qn = norm(q);
  if (hn.item().real() <= 0.0 || qn.item().real() <= 0.0)
    throw ConfigError("hzm_direction: zero channel or ZF column");
  CTensor h_dir = mul(hhat, reciprocal(hn));
  CTensor q_dir = mul(q, reciprocal(qn));
  CTensor mixed = add(mul(alpha, q_dir),
                      mul(sub(CTensor::scalar(cx(1, 0)), alpha), h_dir));
  CTensor mn = norm(mixed);
  if (mn.item().real() < 1e-12) {
    if (flags) flags->hzm_fallback += 1;
    return h_dir;
  }
  return mul(mixed, reciprocal(mn));
}

CTensor scale_beam(const CTensor& direction, const CTensor& p) {
  return mul(direction, pow_const(p, 0.5));
}

CTensor gumbel_assoc_with_noise(const CTensor& logits, double tau,
                                const CTensor& noise, bool train) {
  int64_t B = logits.rows(), K = logits.cols();
  if (train) {
    if (tau <= 0.0)
      throw ConfigError("gumbel_assoc: tau must be positive in train mode");
    CTensor y = scalar_mul(add(logits, noise), cx(1.0 / tau, 0));
    return softmax_re(y, 0);
  }
  std::vector<cx> u(static_cast<size_t>(B) * K, cx(0, 0));
  const auto& lv = logits.values();
  for (int64_t k = 0; k < K; ++k) {
    int64_t best = 0;
    for (int64_t b = 1; b < B; ++b)
      if (lv[b * K + k].real() > lv[best * K + k].real()) best = b;
    u[best * K + k] = cx(1, 0);
  }
  return CTensor::constant(TensorData({B, K}, std::move(u)));
}

CTensor gumbel_assoc(const CTensor& logits, double tau, Rng& rng,
                     bool train) {
  if (!train)
    return gumbel_assoc_with_noise(logits, tau, CTensor(), false);
  TensorData g = TensorData::zeros(logits.shape());
  for (auto& e : g.v) e = cx(rng.gumbel(), 0);
  return gumbel_assoc_with_noise(logits, tau, CTensor::constant(g), true);
}

CTensor power_readout(const CTensor& p_raw, const CTensor& U,
                      const ScenarioConfig& cfg) {
  if (p_raw.rows() != cfg.B || p_raw.cols() != cfg.K)
    throw ConfigError("power_readout: expected (B x K) raw powers");
  CTensor p = scalar_mul(sigmoid_re(clamp_re(p_raw, -kRawClamp, kRawClamp)),
                         cx(cfg.P_max, 0));
  std::vector<CTensor> rows;
  rows.reserve(cfg.B);
  for (int b = 0; b < cfg.B; ++b) {
    CTensor row = slice_rows(p, b, 1);
    CTensor u_row = slice_rows(U, b, 1);
    CTensor used = real_part(sum(mul(u_row, row)));
    if (used.item().real() > cfg.P_max)
      row = scalar_mul(mul(row, reciprocal(used)), cx(cfg.P_max, 0));
    rows.push_back(row);
  }
  return cfg.B == 1 ? rows[0] : concat(rows, 0);
}

}  // namespace pagnn
