#include "pagnn/model.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "pagnn/baselines.hpp"

namespace pagnn {

void ModelConfig::validate() const {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(G1 >= 1 && G2 >= 1 && G3 >= 1 && G4 >= 1 && G5 >= 1 && G6 >= 1 &&
              G7 >= 1 && G8 >= 1 && G9 >= 1,
          "model: all layer counts must be >= 1");
  require(hidden >= 1 && heads >= 1, "model: hidden and heads must be >= 1");
  require(hidden % heads == 0, "model: heads must divide hidden dim");
  require(tau_gs > 0, "model: tau_gs must be positive");
}

std::string ModelConfig::to_text() const {
  std::ostringstream out;
  out << "G1 = " << G1 << "\nG2 = " << G2 << "\nG3 = " << G3
      << "\nG4 = " << G4 << "\nG5 = " << G5 << "\nG6 = " << G6
      << "\nG7 = " << G7 << "\nG8 = " << G8 << "\nG9 = " << G9
      << "\nhidden = " << hidden << "\nheads = " << heads;
  out.precision(17);
  out << "\ntau_gs = " << tau_gs
      << "\nno_message_passing = " << (ablation.no_message_passing ? 1 : 0)
      << "\nno_residual = " << (ablation.no_residual ? 1 : 0)
      << "\nno_cfl = " << (ablation.no_cfl ? 1 : 0)
      << "\nris_enabled = " << (ris_enabled ? 1 : 0)
      << "\nfixed_pa = " << (fixed_pa ? 1 : 0)
      << "\nfixed_pa_uniform = " << (fixed_pa_uniform ? 1 : 0)
      << "\nsteering_cos = "
      << (steering == SteeringConvention::kCosAngle ? 1 : 0) << "\n";
  return out.str();
}

ModelConfig parse_model_config(const std::string& text) {
  std::map<std::string, double> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty()) continue;
    try {
      kv[key] = std::stod(val);
    } catch (const std::exception&) {
      throw ConfigError("model config: bad value for key '" + key + "'");
    }
  }
  ModelConfig cfg;
  auto take = [&](const char* key, auto setter) {
    auto it = kv.find(key);
    if (it != kv.end()) {
      setter(it->second);
      kv.erase(it);
    }
  };
  take("G1", [&](double v) { cfg.G1 = static_cast<int>(v); });
  take("G2", [&](double v) { cfg.G2 = static_cast<int>(v); });
  take("G3", [&](double v) { cfg.G3 = static_cast<int>(v); });
  take("G4", [&](double v) { cfg.G4 = static_cast<int>(v); });
  take("G5", [&](double v) { cfg.G5 = static_cast<int>(v); });
  take("G6", [&](double v) { cfg.G6 = static_cast<int>(v); });
  take("G7", [&](double v) { cfg.G7 = static_cast<int>(v); });
  take("G8", [&](double v) { cfg.G8 = static_cast<int>(v); });
  take("G9", [&](double v) { cfg.G9 = static_cast<int>(v); });
  take("hidden", [&](double v) { cfg.hidden = static_cast<int>(v); });
  take("heads", [&](double v) { cfg.heads = static_cast<int>(v); });
  take("tau_gs", [&](double v) { cfg.tau_gs = v; });
  take("no_message_passing",
       [&](double v) { cfg.ablation.no_message_passing = v != 0; });
  take("no_residual", [&](double v) { cfg.ablation.no_residual = v != 0; });
  take("no_cfl", [&](double v) { cfg.ablation.no_cfl = v != 0; });
  take("ris_enabled", [&](double v) { cfg.ris_enabled = v != 0; });
  take("fixed_pa", [&](double v) { cfg.fixed_pa = v != 0; });
  take("fixed_pa_uniform",
       [&](double v) { cfg.fixed_pa_uniform = v != 0; });
  take("steering_cos", [&](double v) {
    cfg.steering = v != 0 ? SteeringConvention::kCosAngle
                          : SteeringConvention::kLiteralAngle;
  });
  if (!kv.empty())
    throw ConfigError("model config: unknown key '" + kv.begin()->first +
                      "'");
  cfg.validate();
  return cfg;
}

Model init_model(const ModelConfig& mcfg, const ScenarioConfig& scn,
                 uint64_t seed) {
  mcfg.validate();
  scn.validate();
  Model model;
  model.cfg = mcfg;
  model.scn = scn;
  Rng rng = Rng::stream(seed, 0x6d6f64656c);
  ParamStore& st = model.params;
  int h = mcfg.hidden;
  int nm = scn.N * scn.M;

  auto name = [](const char* base, int i) {
    return std::string(base) + std::to_string(i) + ".";
  };
  for (int g = 0; g < mcfg.G1; ++g) {
    std::vector<int> in_dims =
        g == 0 ? std::vector<int>{3 * scn.N, 3, 3}
               : std::vector<int>{h, h, h};
    register_chal(st, name("c1.h", g), in_dims, h, mcfg.heads, rng);
  }
  for (int f = 0; f + 1 < mcfg.G2; ++f)
    register_cfl(st, name("c1.pos", f), h, h, rng);
  register_linear(st, name("c1.pos", mcfg.G2 - 1), h, nm, rng);
  for (int f = 0; f + 1 < mcfg.G3; ++f)
    register_cfl(st, name("c1.phs", f), h, h, rng);
  register_linear(st, name("c1.phs", mcfg.G3 - 1), h, std::max(scn.L, 1),
                  rng);

  int n = scn.N;
  for (int g = 0; g < mcfg.G4; ++g)
    register_cgal(st, name("c2.a", g), g == 0 ? n : h, n, h, rng);
  for (int f = 0; f + 1 < mcfg.G5; ++f)
    register_cfl(st, name("c2.af", f), h, h, rng);
  register_linear(st, name("c2.af", mcfg.G5 - 1), h, 1, rng);
  for (int g = 0; g < mcfg.G6; ++g)
    register_cgal(st, name("c2.p", g), g == 0 ? n : h, n, h, rng);
  for (int f = 0; f + 1 < mcfg.G7; ++f)
    register_cfl(st, name("c2.pf", f), h, h, rng);
  register_linear(st, name("c2.pf", mcfg.G7 - 1), h, 1, rng);

  for (int g = 0; g < mcfg.G8; ++g)
    register_cgal(st, name("c3.g", g), g == 0 ? 1 : h, 1, h, rng);
  for (int f = 0; f + 1 < mcfg.G9; ++f)
    register_cfl(st, name("c3.f", f), h, h, rng);
  register_linear(st, name("c3.f", mcfg.G9 - 1), h, 1, rng);
  return model;
}

namespace {

CTensor entry(const CTensor& mat, int64_t i, int64_t j) {
  return slice_cols(slice_rows(mat, i, 1), j, 1);
}

std::string name(const char* base, int i) {
  return std::string(base) + std::to_string(i) + ".";
}

void check_finite_value(const CTensor& t, const char* what) {
  for (const cx& e : t.values())
    if (!std::isfinite(e.real()) || !std::isfinite(e.imag()))
      throw ConfigError(std::string("model: non-finite ") + what);
}

}  // namespace

void chan_gnn(const Scenario& scn, const Bound& P, Model& model, bool train,
              std::vector<CTensor>& x_pa, std::vector<CTensor>& phi,
              MappingFlags* flags) {
  const ScenarioConfig& cfg = scn.config;
  const ModelConfig& mc = model.cfg;
  bool use_ris = mc.ris_enabled && cfg.R > 0;
  double scale = 1.0 / cfg.D;

  std::vector<CTensor> feats(3);
  {
    TensorData bs = TensorData::zeros({cfg.B, 3 * int64_t(cfg.N)});
    for (int b = 0; b < cfg.B; ++b)
      for (int n2 = 0; n2 < cfg.N; ++n2) {
        const Vec3& f = scn.feed(b, n2);
        bs.v[b * 3 * cfg.N + 3 * n2 + 0] = cx(f.x * scale, 0);
        bs.v[b * 3 * cfg.N + 3 * n2 + 1] = cx(f.y * scale, 0);
        bs.v[b * 3 * cfg.N + 3 * n2 + 2] = cx(f.z * scale, 0);
      }
    feats[0] = CTensor::constant(std::move(bs));
    TensorData ue = TensorData::zeros({cfg.K, 3});
    for (int k = 0; k < cfg.K; ++k) {
      ue.v[3 * k + 0] = cx(scn.ue_positions[k].x * scale, 0);
      ue.v[3 * k + 1] = cx(scn.ue_positions[k].y * scale, 0);
      ue.v[3 * k + 2] = cx(scn.ue_positions[k].z * scale, 0);
    }
    feats[1] = CTensor::constant(std::move(ue));
    if (use_ris) {
      TensorData rs = TensorData::zeros({cfg.R, 3});
      for (int r = 0; r < cfg.R; ++r) {
        rs.v[3 * r + 0] = cx(scn.ris_positions[r].x * scale, 0);
        rs.v[3 * r + 1] = cx(scn.ris_positions[r].y * scale, 0);
        rs.v[3 * r + 2] = cx(scn.ris_positions[r].z * scale, 0);
      }
      feats[2] = CTensor::constant(std::move(rs));
    }
  }

  for (int g = 0; g < mc.G1; ++g)
    feats = chal_forward(feats, P, name("c1.h", g), mc.heads, mc.hidden,
                         mc.ablation);

  x_pa.clear();
  if (mc.fixed_pa) {
    TensorData fx = fixed_pa_positions(cfg, mc.fixed_pa_uniform);
    for (int b = 0; b < cfg.B; ++b) x_pa.push_back(CTensor::constant(fx));
  } else {
    CTensor v = feats[0];
    for (int f = 0; f + 1 < mc.G2; ++f)
      v = cfl_forward(v, P, name("c1.pos", f), model.params, train,
                      mc.ablation);
    v = linear_forward(v, P, name("c1.pos", mc.G2 - 1));
    for (int b = 0; b < cfg.B; ++b) {
      CTensor raw =
          reshape(slice_rows(v, b, 1), {int64_t(cfg.N) * cfg.M});
      x_pa.push_back(spacing_readout(real_part(raw), cfg));
    }
  }

  phi.clear();
  if (use_ris) {
    CTensor v = feats[2];
    for (int f = 0; f + 1 < mc.G3; ++f)
      v = cfl_forward(v, P, name("c1.phs", f), model.params, train,
                      mc.ablation);
    v = linear_forward(v, P, name("c1.phs", mc.G3 - 1));
    for (int r = 0; r < cfg.R; ++r)
      phi.push_back(phase_readout(slice_rows(v, r, 1), flags));
  }
}

ForwardResult model_forward(const ChannelRealization& real, const Bound& P,
                            Model& model, const ForwardOptions& opt) {
  const ScenarioConfig& cfg = real.scenario.config;
  const ModelConfig& mc = model.cfg;
  ForwardResult res;

  chan_gnn(real.scenario, P, model, opt.train, res.d.x_pa, res.d.phi,
           &res.flags);

  // Stage-2 pre-processing: effective channels as link-node features.
  std::vector<CTensor> rows;
  rows.reserve(static_cast<size_t>(cfg.B) * cfg.K);
  for (int b = 0; b < cfg.B; ++b)
    for (int k = 0; k < cfg.K; ++k)
      rows.push_back(
          effective_channel(real, b, k, res.d.x_pa[b], res.d.phi));
  CTensor vc = concat(rows, 0);  // (BK x N)
  check_finite_value(vc, "effective channel");
  CTensor rms = pow_const(mean(modulus_sq(vc)), 0.5);
  CTensor v0 = mul(vc, reciprocal(rms));
  auto nbr = link_graph(cfg.B, cfg.K);

  auto branch = [&](const char* gal, const char* fl, int n_gal,
                    int n_fl) -> CTensor {
    CTensor v = v0;
    for (int g = 0; g < n_gal; ++g)
      v = cgal_forward(v, v0, nbr, P, name(gal, g), mc.ablation);
    for (int f = 0; f + 1 < n_fl; ++f)
      v = cfl_forward(v, P, name(fl, f), model.params, opt.train,
                      mc.ablation);
    return linear_forward(v, P, name(fl, n_fl - 1));
  };

  CTensor alpha = sigmoid_re(
      clamp_re(real_part(branch("c2.a", "c2.af", mc.G4, mc.G5)), -30, 30));
  CTensor p_raw =
      clamp_re(real_part(branch("c2.p", "c2.pf", mc.G6, mc.G7)), -30, 30);
  CTensor p_tilde = scalar_mul(sigmoid_re(p_raw), cx(cfg.P_max, 0));

  // HZM directions and unconstrained beams.
  std::vector<CTensor> wbar(static_cast<size_t>(cfg.B) * cfg.K);
  std::vector<CTensor> gains;
  gains.reserve(wbar.size());
  for (int b = 0; b < cfg.B; ++b) {
    std::vector<CTensor> z_rows;
    z_rows.reserve(cfg.K);
    for (int k = 0; k < cfg.K; ++k) z_rows.push_back(rows[b * cfg.K + k]);
    CTensor Q = zf_matrix(concat(z_rows, 0), &res.flags);  // (N x K)
    std::vector<CTensor> w_cols;
    w_cols.reserve(cfg.K);
    for (int k = 0; k < cfg.K; ++k) {
      int i = b * cfg.K + k;
      CTensor h_col = hermitian(rows[i]);
      wbar[i] = hzm_direction(h_col, slice_cols(Q, k, 1),
                              slice_rows(alpha, i, 1), &res.flags);
      CTensor w_hat = scale_beam(wbar[i], slice_rows(p_tilde, i, 1));
      w_cols.push_back(w_hat);
      gains.push_back(modulus_sq(matmul(rows[i], w_hat)));
    }
    res.w_hat.push_back(concat(w_cols, 1));
  }

  // Stage 3: association from beam gains.
  CTensor g0 = concat(gains, 0);  // (BK x 1)
  CTensor g_norm = mul(g0, reciprocal(mean(g0)));
  CTensor v = g_norm;
  for (int g = 0; g < mc.G8; ++g)
    v = cgal_forward(v, g_norm, nbr, P, name("c3.g", g), mc.ablation);
  for (int f = 0; f + 1 < mc.G9; ++f)
    v = cfl_forward(v, P, name("c3.f", f), model.params, opt.train,
                    mc.ablation);
  v = linear_forward(v, P, name("c3.f", mc.G9 - 1));
  CTensor logits = reshape(real_part(v), {cfg.B, cfg.K});
  check_finite_value(logits, "association logits");
  res.assoc_logits = logits;

  if (opt.train) {
    if (opt.gumbel_noise)
      res.d.U = gumbel_assoc_with_noise(logits, mc.tau_gs,
                                        *opt.gumbel_noise, true);
    else if (opt.gumbel_rng)
      res.d.U = gumbel_assoc(logits, mc.tau_gs, *opt.gumbel_rng, true);
    else
      throw ConfigError("model: train mode needs an association noise source");
  } else {
    Rng unused(1);
    res.d.U = gumbel_assoc(logits, mc.tau_gs, unused, false);
  }

  CTensor p_final =
      power_readout(reshape(p_raw, {cfg.B, cfg.K}), res.d.U, cfg);
  for (int b = 0; b < cfg.B; ++b) {
    std::vector<CTensor> cols;
    cols.reserve(cfg.K);
    for (int k = 0; k < cfg.K; ++k)
      cols.push_back(scale_beam(wbar[b * cfg.K + k], entry(p_final, b, k)));
    res.d.W.push_back(concat(cols, 1));
  }

  EffectiveRows eff;
  eff.B = cfg.B;
  eff.K = cfg.K;
  eff.rows = rows;
  res.per_rate = per_user_rate(real, res.d, eff);
  res.sr = sum(res.per_rate);
  CTensor consumed = add(total_transmit_power(res.d),
                         CTensor::scalar(cx(cfg.P_C, 0)));
  res.ee = mul(res.sr, reciprocal(consumed));
  check_finite_value(res.sr, "sum rate");
  return res;
}

}  // namespace pagnn
