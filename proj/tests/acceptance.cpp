// Acceptance gate.  Run as `pagnn_acceptance <criterion>` with criterion in
// 1..10; each invocation prints one [PASS]/[FAIL] line and exits non-zero on
// failure.  Trained models are cached on disk under acceptance_cache/ so the
// training-heavy criteria (6, 7, 10) share work with the evaluation-only
// ones (5, 8).
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "pagnn/baselines.hpp"
#include "pagnn/checkpoint.hpp"
#include "pagnn/training.hpp"

using namespace pagnn;

namespace {

// ---- pinned tolerances and budgets ----------------------------------------
constexpr double kGradTol = 1e-4;          // criterion 1
constexpr double kSpacingTol = 1e-9;       // criterion 2
constexpr double kRangeTol = 1e-9;         // criterion 2
constexpr double kPhaseTol = 1e-12;        // criterion 2
constexpr double kPowerTol = 1e-9;         // criterion 2 (relative)
constexpr double kRateTol = 1e-10;         // criterion 3
constexpr double kLeakageTol = 1e-8;       // criterion 4
constexpr double kAlignTol = 1e-10;        // criterion 4
constexpr double kEquivTol = 1e-9;         // criterion 5
constexpr double kMarginRandomU = 1.03;    // criterion 6
constexpr double kMarginFixedPa = 1.02;    // criterion 6
constexpr double kMarginNoRis = 1.01;      // criterion 6
constexpr double kTrainWallLimit = 1800.0; // criterion 6, seconds
constexpr double kWinFraction = 0.80;      // criterion 8
constexpr double kColsumTol = 1e-12;       // criterion 9
constexpr int kNumSamples = 5000;          // criteria 6-8, 10
constexpr int kEpochs = 8;                 // <= 20 allowed; sized for the
                                           // 30-minute single-core budget
const char* kCacheDir = "acceptance_cache";

ScenarioConfig desk_config(int M = 2) {
  ScenarioConfig cfg;
  cfg.B = 2;
  cfg.R = 2;
  cfg.N = 4;
  cfg.M = M;
  cfg.L = 8;
  cfg.K = 3;
  cfg.seed = 1;
  cfg.validate();
  return cfg;
}

ModelConfig accept_model_config() {
  ModelConfig mc;
  mc.G1 = mc.G2 = mc.G3 = mc.G4 = mc.G5 = mc.G6 = mc.G7 = mc.G8 = mc.G9 = 1;
  mc.hidden = 16;
  mc.heads = 2;
  return mc;
}

TrainConfig accept_train_config(uint64_t seed) {
  TrainConfig tc;
  tc.epochs = kEpochs;
  tc.batch_size = 64;
  tc.lr = 3e-3;
  tc.milestones = {kEpochs * 6 / 10, kEpochs * 8 / 10};
  tc.decay = 0.5;
  tc.patience = 100;  // keep the full epoch budget
  tc.seed = seed;
  return tc;
}

const Dataset& desk_dataset(int M) {
  static std::map<int, Dataset> cache;
  auto it = cache.find(M);
  if (it != cache.end()) return it->second;
  std::filesystem::create_directories(kCacheDir);
  std::string path =
      std::string(kCacheDir) + "/ds_M" + std::to_string(M) + ".bin";
  if (std::filesystem::exists(path))
    return cache.emplace(M, load_dataset(path)).first->second;
  Dataset ds = generate_dataset(desk_config(M), kNumSamples);
  save_dataset(ds, path);
  return cache.emplace(M, std::move(ds)).first->second;
}

ModelConfig variant_config(const std::string& variant) {
  ModelConfig mc = accept_model_config();
  if (variant == "fixed_pa")
    mc.fixed_pa = true;
  else if (variant == "no_ris")
    mc.ris_enabled = false;
  else if (variant == "no_residual")
    mc.ablation.no_residual = true;
  else if (variant != "proposed")
    throw ConfigError("acceptance: unknown variant " + variant);
  return mc;
}

// Trains (or loads) one desk-scale model; returns the model and the wall
// seconds the training took when it actually ran (recorded in a sidecar so
// cached reloads still account for the original cost).
Model trained(const std::string& variant, int M, uint64_t seed,
              double* train_seconds = nullptr) {
  std::filesystem::create_directories(kCacheDir);
  std::ostringstream base;
  base << kCacheDir << "/ck_" << variant << "_M" << M << "_s" << seed;
  std::string ck = base.str() + ".bin";
  std::string side = base.str() + ".time";
  if (std::filesystem::exists(ck) && std::filesystem::exists(side)) {
    if (train_seconds) {
      std::ifstream in(side);
      in >> *train_seconds;
    }
    return load_checkpoint(ck);
  }
  const Dataset& ds = desk_dataset(M);
  Model m0 = init_model(variant_config(variant), desk_config(M), seed);
  auto t0 = std::chrono::steady_clock::now();
  TrainResult r = train(m0, ds, accept_train_config(seed));
  double secs = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
  save_checkpoint(r.best, ck);
  std::ofstream(side) << secs << "\n";
  if (train_seconds) *train_seconds = secs;
  return r.best;
}

double mean_test_sr(Model& model, const Dataset& ds) {
  return evaluate_means(model, ds, ds.test_begin(),
                        static_cast<int>(ds.samples.size()))
      .sr;
}

// Mean sum rate when the model's association is replaced by a uniform
// random one (positions, phases and beam directions kept).
double mean_random_assoc_sr(Model& model, const Dataset& ds, uint64_t seed) {
  const ScenarioConfig& cfg = ds.config;
  Bound P = bind_const(model.params);
  ForwardOptions opt;
  Rng rng(seed);
  double acc = 0;
  int cnt = 0;
  for (int i = ds.test_begin(); i < static_cast<int>(ds.samples.size());
       ++i) {
    ChannelRealization real = ds.realization(i, model.cfg.steering);
    ForwardResult res = model_forward(real, P, model, opt);
    TensorData U = random_assoc(cfg.B, cfg.K, rng);
    DecisionSet d = decisions_with_association(real, res.d.x_pa, res.d.phi,
                                               res.w_hat, U);
    acc += sum_rate(real, d).item().real();
    ++cnt;
  }
  return acc / cnt;
}

int report(int crit, bool ok, const std::string& detail) {
  std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << crit << ": "
            << detail << "\n";
  return ok ? 0 : 1;
}

// ---- criterion 1: end-to-end gradient correctness -------------------------
int criterion_1() {
  auto t0 = std::chrono::steady_clock::now();
  ScenarioConfig cfg;
  cfg.B = 2;
  cfg.R = 1;
  cfg.N = 2;
  cfg.M = 2;
  cfg.L = 4;
  cfg.K = 2;
  cfg.seed = 7;
  cfg.validate();
  ModelConfig mc = accept_model_config();  // hidden 16
  Model model = init_model(mc, cfg, 7);
  // Move off the symmetric init point, where two piecewise readouts sit
  // exactly on branch boundaries and finite differences straddle the kink.
  // The jitter stream is chosen so that no probed entry lands within the
  // +-eps window of the spacing budget-rescale branch either (the readout is
  // piecewise; near-boundary probes would compare a two-sided difference
  // against the correct one-sided derivative).
  Rng jr(1);
  for (auto& [pname, d] : model.params.learnable)
    for (auto& e : d.v) e += 0.05 * jr.cgaussian();
  Dataset ds = generate_dataset(cfg, 4);

  std::vector<std::string> names;
  std::vector<TensorData> params;
  for (const auto& [name, d] : model.params.learnable) {
    names.push_back(name);
    params.push_back(d);
  }
  TensorData noise = TensorData::zeros({cfg.B, cfg.K});
  Rng nr(99);
  for (auto& e : noise.v) e = cx(nr.gumbel(), 0);

  double max_err = 0;
  for (bool use_ee : {false, true}) {
    auto run = [&](const std::vector<TensorData>& p, Tape* tape,
                   std::map<std::string, TensorData>* grads) {
      Model m = model;
      for (size_t i = 0; i < names.size(); ++i)
        m.params.learnable[names[i]] = p[i];
      Bound B = tape ? bind(m.params, *tape) : bind_const(m.params);
      ForwardOptions opt;
      opt.train = true;
      CTensor noise_t = CTensor::constant(noise);
      opt.gumbel_noise = &noise_t;
      std::vector<CTensor> srs, pws;
      for (int i = 0; i < 2; ++i) {
        ChannelRealization real = ds.realization(i, m.cfg.steering);
        ForwardResult res = model_forward(real, B, m, opt);
        srs.push_back(res.sr);
        pws.push_back(total_transmit_power(res.d));
      }
      CTensor loss = use_ee ? loss_ee(srs, pws, cfg.P_C) : loss_sr(srs);
      if (tape) {
        tape->backward(loss);
        *grads = collect_grads(m.params, B, *tape);
      }
      return loss.item().real();
    };
    std::vector<std::vector<int64_t>> indices(params.size());
    Rng pick(use_ee ? 5 : 3);
    for (size_t i = 0; i < params.size(); ++i)
      indices[i].push_back(
          static_cast<int64_t>(pick.uniform_int(params[i].numel())));
    double err = grad_check(
        [&](const std::vector<TensorData>& p) {
          return run(p, nullptr, nullptr);
        },
        [&](const std::vector<TensorData>& p) {
          Tape tape;
          std::map<std::string, TensorData> grads;
          run(p, &tape, &grads);
          std::vector<TensorData> out;
          for (const auto& n : names) out.push_back(grads.at(n));
          return out;
        },
        params, indices);
    max_err = std::max(max_err, err);
  }
  double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  std::ostringstream msg;
  msg << "gradient check (sum-rate and energy-efficiency losses) max "
         "relative error "
      << max_err << " (tol " << kGradTol << "), " << secs << " s";
  return report(1, max_err < kGradTol && secs < 300.0, msg.str());
}

// ---- criterion 2: feasibility under random parameters ---------------------
int criterion_2() {
  const int kDraws = 10000;
  std::vector<ScenarioConfig> cfgs;
  {
    ScenarioConfig c;
    c.B = 2; c.R = 1; c.N = 2; c.M = 2; c.L = 4; c.K = 2; c.seed = 2;
    c.validate();
    cfgs.push_back(c);
    c.B = 1; c.R = 1; c.N = 3; c.M = 2; c.L = 4; c.K = 3; c.seed = 3;
    c.validate();
    cfgs.push_back(c);
    c.B = 3; c.R = 2; c.N = 4; c.M = 3; c.L = 6; c.K = 4; c.seed = 4;
    c.validate();
    cfgs.push_back(c);
    cfgs.push_back(desk_config());
  }
  std::vector<Dataset> data;
  for (const auto& c : cfgs) data.push_back(generate_dataset(c, 64));

  Rng jr(17);
  int failures = 0;
  std::string first_failure;
  for (int i = 0; i < kDraws; ++i) {
    const ScenarioConfig& cfg = cfgs[i % cfgs.size()];
    const Dataset& ds = data[i % cfgs.size()];
    Model m = init_model(accept_model_config(), cfg,
                         static_cast<uint64_t>(i) + 1);
    for (auto& [pname, d] : m.params.learnable)
      for (auto& e : d.v) e += 0.5 * jr.cgaussian();
    Bound P = bind_const(m.params);
    ForwardOptions opt;
    ChannelRealization real = ds.realization(
        i % static_cast<int>(ds.samples.size()), m.cfg.steering);
    ForwardResult res = model_forward(real, P, m, opt);
    const DecisionSet& d = res.d;

    std::ostringstream why;
    bool ok = true;
    for (int b = 0; b < cfg.B && ok; ++b) {
      const auto& x = d.x_pa[b].values();
      for (int n = 0; n < cfg.N && ok; ++n)
        for (int mm = 0; mm < cfg.M && ok; ++mm) {
          double v = x[n * cfg.M + mm].real();
          if (v < -kRangeTol || v > cfg.C + kRangeTol) {
            ok = false;
            why << "offset out of range: " << v;
          }
          if (mm > 0) {
            double gap = v - x[n * cfg.M + mm - 1].real();
            if (gap < cfg.delta_min - kSpacingTol) {
              ok = false;
              why << "spacing " << gap;
            }
          }
        }
    }
    for (const auto& row : d.phi)
      for (const cx& e : row.values())
        if (ok && std::abs(std::abs(e) - 1.0) >= kPhaseTol) {
          ok = false;
          why << "phase modulus " << std::abs(e);
        }
    for (double pw : per_bs_power(d))
      if (ok && pw > cfg.P_max * (1.0 + kPowerTol)) {
        ok = false;
        why << "power " << pw;
      }
    const auto& U = d.U.values();
    for (int k = 0; k < cfg.K && ok; ++k) {
      int ones = 0;
      for (int b = 0; b < cfg.B; ++b) {
        cx u = U[b * cfg.K + k];
        if (u == cx(1, 0))
          ++ones;
        else if (u != cx(0, 0)) {
          ok = false;
          why << "association entry " << u;
        }
      }
      if (ok && ones != 1) {
        ok = false;
        why << "association column not one-hot";
      }
    }
    if (!ok) {
      ++failures;
      if (first_failure.empty()) first_failure = why.str();
    }
  }
  std::ostringstream msg;
  msg << failures << " / " << kDraws
      << " infeasible infer-mode outputs (spacing tol " << kSpacingTol
      << ", range tol " << kRangeTol << ", phase tol " << kPhaseTol
      << ", power tol " << kPowerTol << ", exact one-hot)";
  if (failures > 0) msg << "; first: " << first_failure;
  return report(2, failures == 0, msg.str());
}

// ---- criterion 3: vectorized rate vs scalar triple loop -------------------
int criterion_3() {
  auto t0 = std::chrono::steady_clock::now();
  ScenarioConfig cfg = desk_config();
  Dataset ds = generate_dataset(cfg, 100);
  Rng rng(11);
  double worst = 0;
  for (int inst = 0; inst < 100; ++inst) {
    ChannelRealization real = ds.realization(inst, SteeringConvention::kLiteralAngle);
    ProbeResult probe = random_search_probe(real, 1, rng);
    double sr_vec = sum_rate(real, probe.d).item().real();
    std::vector<CTensor> rows;
    for (int b = 0; b < cfg.B; ++b)
      for (int k = 0; k < cfg.K; ++k)
        rows.push_back(
            effective_channel(real, b, k, probe.d.x_pa[b], probe.d.phi));
    double sr_loop = 0;
    for (int k = 0; k < cfg.K; ++k) {
      cx sig(0);
      double interf = cfg.sigma2;
      for (int b = 0; b < cfg.B; ++b)
        for (int kp = 0; kp < cfg.K; ++kp) {
          cx dot(0);
          for (int n = 0; n < cfg.N; ++n)
            dot += rows[b * cfg.K + k].values()[n] *
                   probe.d.W[b].values()[n * cfg.K + kp];
          cx term = probe.d.U.values()[b * cfg.K + kp].real() * dot;
          if (kp == k)
            sig += term;
          else
            interf += std::norm(term);
        }
      sr_loop += std::log2(1.0 + std::norm(sig) / interf);
    }
    worst = std::max(worst, std::abs(sr_vec - sr_loop) /
                                std::max({std::abs(sr_vec),
                                          std::abs(sr_loop), 1e-12}));
  }
  double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  std::ostringstream msg;
  msg << "100 instances, worst relative deviation " << worst << " (tol "
      << kRateTol << "), " << secs << " s";
  return report(3, worst < kRateTol && secs < 60.0, msg.str());
}

// ---- criterion 4: hybrid beam-direction limits ----------------------------
int criterion_4() {
  Rng rng(23);
  const int K = 3, N = 6;
  double worst_leak = 0, worst_align = 1;
  for (int trial = 0; trial < 200; ++trial) {
    TensorData Z = TensorData::zeros({K, N});
    for (auto& e : Z.v) e = rng.cgaussian();
    CTensor Zt = CTensor::constant(Z);
    CTensor Q = zf_matrix(Zt);
    for (int k = 0; k < K; ++k) {
      CTensor h_col = hermitian(slice_rows(Zt, k, 1));
      CTensor q_col = slice_cols(Q, k, 1);
      // pure zero-forcing: other users' channels see no leakage
      CTensor w1 = hzm_direction(h_col, q_col,
                                 CTensor::constant(TensorData(
                                     {1, 1}, {cx(1, 0)})));
      for (int j = 0; j < K; ++j) {
        if (j == k) continue;
        double leak =
            std::abs(matmul(slice_rows(Zt, j, 1), w1).item());
        double hj = std::sqrt(
            sum(modulus_sq(slice_rows(Zt, j, 1))).item().real());
        worst_leak = std::max(worst_leak, leak / hj);
      }
      // pure matched filter: unit overlap with the own channel direction
      CTensor w0 = hzm_direction(h_col, q_col,
                                 CTensor::constant(TensorData(
                                     {1, 1}, {cx(0, 0)})));
      double hk = std::sqrt(sum(modulus_sq(h_col)).item().real());
      double overlap =
          std::abs(matmul(hermitian(h_col), w0).item()) / hk;
      worst_align = std::min(worst_align, overlap);
    }
  }
  std::ostringstream msg;
  msg << "alpha=1 worst normalized leakage " << worst_leak << " (tol "
      << kLeakageTol << "); alpha=0 worst alignment " << worst_align
      << " (>= " << 1 - kAlignTol << ")";
  return report(4, worst_leak < kLeakageTol && worst_align > 1 - kAlignTol,
                msg.str());
}

// ---- criterion 5: UE-permutation equivariance and size transfer -----------
int criterion_5() {
  ScenarioConfig cfg = desk_config();
  const Dataset& ds = desk_dataset(2);
  Model model = init_model(accept_model_config(), cfg, 31);
  Rng jr(32);
  for (auto& [pname, d] : model.params.learnable)
    for (auto& e : d.v) e += 0.05 * jr.cgaussian();
  Bound P = bind_const(model.params);
  ForwardOptions opt;

  double worst = 0;
  std::vector<int> perm{2, 0, 1};
  for (int i = 0; i < 5; ++i) {
    ChannelRealization orig = ds.realization(i, model.cfg.steering);
    Scenario scn = orig.scenario;
    std::vector<std::vector<cx>> nlos_ru = orig.nlos_ris_ue;
    for (int k = 0; k < cfg.K; ++k) {
      scn.ue_positions[perm[k]] = orig.scenario.ue_positions[k];
      for (int r = 0; r < cfg.R; ++r)
        nlos_ru[r * cfg.K + perm[k]] = orig.nlos_ris_ue[r * cfg.K + k];
    }
    ChannelRealization permuted = realization_from_draws(
        std::move(scn), orig.nlos_pa_ris, std::move(nlos_ru),
        orig.convention);
    ForwardResult a = model_forward(orig, P, model, opt);
    ForwardResult b = model_forward(permuted, P, model, opt);
    for (int k = 0; k < cfg.K; ++k)
      worst = std::max(worst,
                       std::abs(a.per_rate.values()[k] -
                                b.per_rate.values()[perm[k]]));
  }

  int64_t c2 = init_model(accept_model_config(),
                          [] { auto c = desk_config(); c.K = 2; return c; }(),
                          1)
                   .params.count();
  int64_t c3 = init_model(accept_model_config(), desk_config(), 1)
                   .params.count();
  int64_t c4 = init_model(accept_model_config(),
                          [] { auto c = desk_config(); c.K = 4; return c; }(),
                          1)
                   .params.count();
  bool counts_ok = c2 == c3 && c3 == c4;

  // a model trained at K=3 evaluates at other UE counts
  Model tr = trained("proposed", 2, 1);
  bool transfer_ok = true;
  for (int k_eval : {2, 4}) {
    ScenarioConfig ce = desk_config();
    ce.K = k_eval;
    ce.seed = 40 + k_eval;
    Dataset de = generate_dataset(ce, 10);
    Bound Pt = bind_const(tr.params);
    for (int i = 0; i < 5; ++i) {
      ForwardResult res =
          model_forward(de.realization(i, tr.cfg.steering), Pt, tr, opt);
      if (!check_feasibility(res.d, ce, 1e-9, true).feasible() ||
          !std::isfinite(res.sr.item().real()))
        transfer_ok = false;
    }
  }
  std::ostringstream msg;
  msg << "UE-permutation deviation " << worst << " (tol " << kEquivTol
      << "); param counts K=2/3/4: " << c2 << "/" << c3 << "/" << c4
      << "; K=3-trained model evaluates K=2 and K=4 "
      << (transfer_ok ? "feasibly" : "INFEASIBLY");
  return report(5, worst < kEquivTol && counts_ok && transfer_ok, msg.str());
}

// ---- criterion 6: desk-scale ordering over system baselines ---------------
int criterion_6() {
  const Dataset& ds = desk_dataset(2);
  double total_train = 0;
  double sr_prop = 0, sr_fixed = 0, sr_noris = 0, sr_rand = 0;
  for (uint64_t seed : {1, 2, 3}) {
    double secs = 0;
    Model prop = trained("proposed", 2, seed, &secs);
    total_train += secs;
    sr_prop += mean_test_sr(prop, ds) / 3.0;
    sr_rand += mean_random_assoc_sr(prop, ds, 100 + seed) / 3.0;
    Model fx = trained("fixed_pa", 2, seed, &secs);
    total_train += secs;
    sr_fixed += mean_test_sr(fx, ds) / 3.0;
    Model nr = trained("no_ris", 2, seed, &secs);
    total_train += secs;
    sr_noris += mean_test_sr(nr, ds) / 3.0;
  }
  bool ok = sr_prop >= kMarginRandomU * sr_rand &&
            sr_prop >= kMarginFixedPa * sr_fixed &&
            sr_prop >= kMarginNoRis * sr_noris &&
            total_train < kTrainWallLimit;
  std::ostringstream msg;
  msg.precision(4);
  msg << "3-seed mean test SR: proposed " << sr_prop << ", random-assoc "
      << sr_rand << " (x" << sr_prop / sr_rand << ", need >= "
      << kMarginRandomU << "), fixed-PA " << sr_fixed << " (x"
      << sr_prop / sr_fixed << ", need >= " << kMarginFixedPa
      << "), no-RIS " << sr_noris << " (x" << sr_prop / sr_noris
      << ", need >= " << kMarginNoRis << "); training wall time "
      << total_train << " s (< " << kTrainWallLimit << ")";
  return report(6, ok, msg.str());
}

// ---- criterion 7: sum rate non-decreasing in the PA count -----------------
int criterion_7() {
  std::vector<double> means;
  for (int M : {2, 3, 4}) {
    const Dataset& ds = desk_dataset(M);
    double acc = 0;
    for (uint64_t seed : {1, 2, 3}) {
      Model m = trained("proposed", M, seed);
      acc += mean_test_sr(m, ds) / 3.0;
    }
    means.push_back(acc);
  }
  bool ok = means[1] >= means[0] && means[2] >= means[1];
  std::ostringstream msg;
  msg.precision(4);
  msg << "3-seed mean test SR at M=2/3/4: " << means[0] << " / " << means[1]
      << " / " << means[2] << (ok ? " (non-decreasing)" : " (DECREASING)");
  return report(7, ok, msg.str());
}

// ---- criterion 8: learned association vs random, with oracle bound --------
int criterion_8() {
  const Dataset& ds = desk_dataset(2);
  const ScenarioConfig& cfg = ds.config;
  Model m = trained("proposed", 2, 1);
  Bound P = bind_const(m.params);
  ForwardOptions opt;
  Rng rng(77);
  int wins = 0, total = 0;
  double sr_learned = 0, sr_random = 0, sr_oracle = 0;
  for (int i = ds.test_begin(); i < static_cast<int>(ds.samples.size());
       ++i) {
    ChannelRealization real = ds.realization(i, m.cfg.steering);
    ForwardResult res = model_forward(real, P, m, opt);
    double sl = res.sr.item().real();
    TensorData U = random_assoc(cfg.B, cfg.K, rng);
    DecisionSet d = decisions_with_association(real, res.d.x_pa, res.d.phi,
                                               res.w_hat, U);
    double sr = sum_rate(real, d).item().real();
    OracleResult orc =
        oracle_association(real, res.d.x_pa, res.d.phi, res.w_hat);
    sr_learned += sl;
    sr_random += sr;
    sr_oracle += orc.sr;
    wins += sl >= sr;
    ++total;
  }
  double frac = static_cast<double>(wins) / total;
  std::ostringstream msg;
  msg.precision(4);
  msg << "learned association wins on " << wins << " / " << total << " ("
      << 100 * frac << "%, need >= " << 100 * kWinFraction
      << "%); mean SR learned " << sr_learned / total << ", random "
      << sr_random / total << ", exhaustive oracle bound "
      << sr_oracle / total;
  return report(8, frac >= kWinFraction, msg.str());
}

// ---- criterion 9: Gumbel-Softmax contract ---------------------------------
int criterion_9() {
  Rng rng(5);
  bool limit_ok = true, colsum_ok = true;
  for (int trial = 0; trial < 50; ++trial) {
    int B = 2 + trial % 3, K = 2 + trial % 4;
    TensorData logits = TensorData::zeros({B, K});
    for (auto& e : logits.v) e = cx(rng.gaussian(), 0);
    CTensor lt = CTensor::constant(logits);
    // noiseless tau -> 0 limit vs exact argmax
    CTensor zero = CTensor::constant(TensorData::zeros({B, K}));
    CTensor soft = gumbel_assoc_with_noise(lt, 1e-9, zero, true);
    Rng unused(1);
    CTensor hard = gumbel_assoc(lt, 1.0, unused, false);
    for (int64_t i = 0; i < soft.numel(); ++i)
      if (soft.values()[i] != hard.values()[i]) limit_ok = false;
    // train-mode simplex property at tau = 1
    CTensor train_u = gumbel_assoc(lt, 1.0, rng, true);
    for (int k = 0; k < K; ++k) {
      double tot = 0;
      for (int b = 0; b < B; ++b)
        tot += train_u.values()[b * K + k].real();
      if (std::abs(tot - 1.0) > kColsumTol) colsum_ok = false;
    }
  }
  std::ostringstream msg;
  msg << "noiseless tau->0 equals argmax one-hot exactly: "
      << (limit_ok ? "yes" : "NO")
      << "; train-mode columns sum to 1 within " << kColsumTol << ": "
      << (colsum_ok ? "yes" : "NO");
  return report(9, limit_ok && colsum_ok, msg.str());
}

// ---- criterion 10: removing the residual connection degrades SR -----------
int criterion_10() {
  const Dataset& ds = desk_dataset(2);
  double sr_prop = 0, sr_nores = 0;
  for (uint64_t seed : {1, 2, 3}) {
    Model p = trained("proposed", 2, seed);
    sr_prop += mean_test_sr(p, ds) / 3.0;
    Model a = trained("no_residual", 2, seed);
    sr_nores += mean_test_sr(a, ds) / 3.0;
  }
  std::ostringstream msg;
  msg.precision(4);
  msg << "3-seed mean test SR: proposed " << sr_prop
      << ", no-residual ablation " << sr_nores << " (drop "
      << sr_prop - sr_nores << ", must be > 0)";
  return report(10, sr_prop > sr_nores, msg.str());
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: pagnn_acceptance <criterion 1..10>\n";
    return 2;
  }
  int crit = std::atoi(argv[1]);
  try {
    switch (crit) {
      case 1: return criterion_1();
      case 2: return criterion_2();
      case 3: return criterion_3();
      case 4: return criterion_4();
      case 5: return criterion_5();
      case 6: return criterion_6();
      case 7: return criterion_7();
      case 8: return criterion_8();
      case 9: return criterion_9();
      case 10: return criterion_10();
      default:
        std::cerr << "usage: pagnn_acceptance <criterion 1..10>\n";
        return 2;
    }
  } catch (const std::exception& e) {
    std::cout << "[FAIL] criterion " << crit << ": exception: " << e.what()
              << "\n";
    return 1;
  }
}
