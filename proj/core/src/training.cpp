#include "pagnn/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace pagnn {

ChannelRealization Dataset::realization(int idx,
                                        SteeringConvention conv) const {
  const Sample& s = samples.at(idx);
  Scenario scn;
  scn.config = config;
  scn.bs_feed_points = bs_feed_points;
  scn.ris_positions = ris_positions;
  scn.ue_positions = s.ue_positions;
  return realization_from_draws(std::move(scn), s.nlos_pa_ris,
                                s.nlos_ris_ue, conv);
}

Dataset generate_dataset(const ScenarioConfig& cfg, int n_samples) {
  if (n_samples < 3)
    throw ConfigError("dataset: need at least 3 samples for a split");
  Dataset ds;
  ds.config = cfg;
  place_infrastructure(cfg, ds.bs_feed_points, ds.ris_positions);
  ds.samples.reserve(n_samples);
  for (int i = 0; i < n_samples; ++i) {
    Rng rng = Rng::stream(cfg.seed, static_cast<uint64_t>(i) + 1);
    Sample s;
    s.ue_positions = sample_ues(cfg, rng);
    auto draw = [&](int count) {
      std::vector<std::vector<cx>> out(count);
      for (auto& v : out) {
        v.resize(cfg.L);
        for (auto& e : v) e = rng.cgaussian();
      }
      return out;
    };
    s.nlos_pa_ris = draw(cfg.B * cfg.R);
    s.nlos_ris_ue = draw(cfg.R * cfg.K);
    ds.samples.push_back(std::move(s));
  }
  ds.n_val = n_samples / 10;
  ds.n_test = n_samples / 10;
  ds.n_train = n_samples - ds.n_val - ds.n_test;
  return ds;
}

// ---- dataset file format --------------------------------------------------
// "PGDS" magic, u32 version, u32 config text length + text, u32 counts
// (samples, train, val, test), then per sample: K xyz f64 triples, B*R then
// R*K length-L complex draws as interleaved f64 pairs.  Little-endian.

namespace {

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw ConfigError("dataset: truncated file");
  return v;
}

void put_draws(std::ostream& out,
               const std::vector<std::vector<cx>>& draws) {
  for (const auto& v : draws)
    for (const cx& e : v) {
      put(out, e.real());
      put(out, e.imag());
    }
}

void get_draws(std::istream& in, std::vector<std::vector<cx>>& draws,
               int count, int len) {
  draws.assign(count, std::vector<cx>(len));
  for (auto& v : draws)
    for (auto& e : v) {
      double re = get<double>(in);
      double im = get<double>(in);
      e = cx(re, im);
    }
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("dataset: cannot write '" + path + "'");
  out.write("PGDS", 4);
  put<uint32_t>(out, 1);
  std::string cfg = config_to_text(ds.config);
  put<uint32_t>(out, static_cast<uint32_t>(cfg.size()));
  out.write(cfg.data(), static_cast<std::streamsize>(cfg.size()));
  put<uint32_t>(out, static_cast<uint32_t>(ds.samples.size()));
  put<uint32_t>(out, static_cast<uint32_t>(ds.n_train));
  put<uint32_t>(out, static_cast<uint32_t>(ds.n_val));
  put<uint32_t>(out, static_cast<uint32_t>(ds.n_test));
  for (const Sample& s : ds.samples) {
    for (const Vec3& u : s.ue_positions) {
      put(out, u.x);
      put(out, u.y);
      put(out, u.z);
    }
    put_draws(out, s.nlos_pa_ris);
    put_draws(out, s.nlos_ris_ue);
  }
  if (!out) throw ConfigError("dataset: write failed for '" + path + "'");
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("dataset: cannot open '" + path + "'");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "PGDS", 4) != 0)
    throw ConfigError("dataset: bad magic in '" + path + "'");
  if (get<uint32_t>(in) != 1)
    throw ConfigError("dataset: unsupported version");
  uint32_t cfg_len = get<uint32_t>(in);
  std::string cfg_text(cfg_len, '\0');
  in.read(cfg_text.data(), cfg_len);
  Dataset ds;
  ds.config = parse_config(cfg_text);
  place_infrastructure(ds.config, ds.bs_feed_points, ds.ris_positions);
  uint32_t n = get<uint32_t>(in);
  ds.n_train = static_cast<int>(get<uint32_t>(in));
  ds.n_val = static_cast<int>(get<uint32_t>(in));
  ds.n_test = static_cast<int>(get<uint32_t>(in));
  if (ds.n_train + ds.n_val + ds.n_test != static_cast<int>(n))
    throw ConfigError("dataset: inconsistent split counts");
  const ScenarioConfig& c = ds.config;
  ds.samples.resize(n);
  for (auto& s : ds.samples) {
    s.ue_positions.resize(c.K);
    for (auto& u : s.ue_positions) {
      u.x = get<double>(in);
      u.y = get<double>(in);
      u.z = get<double>(in);
    }
    get_draws(in, s.nlos_pa_ris, c.B * c.R, c.L);
    get_draws(in, s.nlos_ris_ue, c.R * c.K, c.L);
  }
  return ds;
}

// ---- losses ---------------------------------------------------------------

namespace {
const double kSrFloor = 1e-9;
}

CTensor loss_sr(const std::vector<CTensor>& srs) {
  std::vector<CTensor> inv;
  inv.reserve(srs.size());
  for (const auto& sr : srs)
    inv.push_back(
        reshape(reciprocal(clamp_re(sr, kSrFloor, 1e300)), {1, 1}));
  return real_part(mean(concat(inv, 0)));
}

CTensor loss_ee(const std::vector<CTensor>& srs,
                const std::vector<CTensor>& powers, double P_C) {
  if (srs.size() != powers.size())
    throw ConfigError("loss_ee: batch size mismatch");
  std::vector<CTensor> terms;
  terms.reserve(srs.size());
  for (size_t i = 0; i < srs.size(); ++i) {
    CTensor consumed = add(powers[i], CTensor::scalar(cx(P_C, 0)));
    terms.push_back(reshape(
        mul(consumed, reciprocal(clamp_re(srs[i], kSrFloor, 1e300))),
        {1, 1}));
  }
  return real_part(mean(concat(terms, 0)));
}

// ---- optimizer ------------------------------------------------------------

void adam_step(ParamStore& params,
               const std::map<std::string, TensorData>& grads,
               AdamState& state, double lr, double beta1, double beta2,
               double eps) {
  state.t += 1;
  double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
  double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
  for (auto& [name, p] : params.learnable) {
    auto git = grads.find(name);
    if (git == grads.end()) continue;
    const TensorData& g = git->second;
    if (g.numel() != p.numel())
      throw ConfigError("adam: gradient shape mismatch for '" + name + "'");
    auto& mom = state.per_param[name];
    if (static_cast<int64_t>(mom.m.v.size()) != p.numel()) {
      mom.m = TensorData::zeros(p.shape);
      mom.v = TensorData::zeros(p.shape);
    }
    for (int64_t i = 0; i < p.numel(); ++i) {
      // v holds per-part second moments in (re, im).
      double gr = g.v[i].real(), gi = g.v[i].imag();
      double mr = beta1 * mom.m.v[i].real() + (1 - beta1) * gr;
      double mi = beta1 * mom.m.v[i].imag() + (1 - beta1) * gi;
      double vr = beta2 * mom.v.v[i].real() + (1 - beta2) * gr * gr;
      double vi = beta2 * mom.v.v[i].imag() + (1 - beta2) * gi * gi;
      mom.m.v[i] = cx(mr, mi);
      mom.v.v[i] = cx(vr, vi);
      double step_r = lr * (mr / bc1) / (std::sqrt(vr / bc2) + eps);
      double step_i = lr * (mi / bc1) / (std::sqrt(vi / bc2) + eps);
      p.v[i] -= cx(step_r, step_i);
    }
  }
}

// ---- training loop --------------------------------------------------------

EvalMeans evaluate_means(Model& model, const Dataset& data, int begin,
                         int end) {
  Bound P = bind_const(model.params);
  ForwardOptions opt;
  opt.train = false;
  EvalMeans out;
  int n = 0;
  for (int i = begin; i < end; ++i) {
    ChannelRealization real = data.realization(i, model.cfg.steering);
    ForwardResult r = model_forward(real, P, model, opt);
    out.sr += r.sr.item().real();
    out.ee += r.ee.item().real();
    ++n;
  }
  if (n > 0) {
    out.sr /= n;
    out.ee /= n;
  }
  return out;
}

std::string history_csv(const std::vector<EpochRecord>& history) {
  std::ostringstream out;
  out.precision(12);
  out << "epoch,train_loss,val_SR,val_EE,lr\n";
  for (const auto& h : history)
    out << h.epoch << "," << h.train_loss << "," << h.val_sr << ","
        << h.val_ee << "," << h.lr << "\n";
  return out.str();
}

TrainResult train(const Model& model, const Dataset& data,
                  const TrainConfig& tc) {
  if (data.n_train < 1) throw ConfigError("train: empty training split");
  TrainResult result;
  Model current = model;
  AdamState adam;
  Rng order_rng = Rng::stream(tc.seed, 0x0d0e0d);
  Rng gumbel_rng = Rng::stream(tc.seed, 0x6765);
  bool use_ee = tc.objective == TrainConfig::Objective::kEnergyEfficiency;

  std::vector<int> idx(data.n_train);
  for (int i = 0; i < data.n_train; ++i) idx[i] = i;

  result.best = current;
  result.best_val = -1e300;
  result.best_epoch = 0;
  int since_best = 0;

  for (int epoch = 1; epoch <= tc.epochs; ++epoch) {
    double lr = tc.lr;
    for (int m : tc.milestones)
      if (epoch > m) lr *= tc.decay;

    // Deterministic shuffle.
    for (int i = data.n_train - 1; i > 0; --i) {
      int j = static_cast<int>(order_rng.uniform_int(i + 1));
      std::swap(idx[i], idx[j]);
    }

    double epoch_loss = 0.0;
    int n_batches = 0;
    for (int start = 0; start < data.n_train; start += tc.batch_size) {
      int stop = std::min(start + tc.batch_size, data.n_train);
      Tape tape;
      Bound P = bind(current.params, tape);
      ForwardOptions opt;
      opt.train = true;
      opt.gumbel_rng = &gumbel_rng;
      std::vector<CTensor> srs, powers;
      for (int i = start; i < stop; ++i) {
        ChannelRealization real =
            data.realization(idx[i], current.cfg.steering);
        ForwardResult r = model_forward(real, P, current, opt);
        srs.push_back(r.sr);
        if (use_ee) powers.push_back(total_transmit_power(r.d));
      }
      CTensor loss = use_ee ? loss_ee(srs, powers, data.config.P_C)
                            : loss_sr(srs);
      double lv = loss.item().real();
      if (!std::isfinite(lv))
        throw ConfigError("train: non-finite loss at epoch " +
                          std::to_string(epoch));
      tape.backward(loss);
      auto grads = collect_grads(current.params, P, tape);
      adam_step(current.params, grads, adam, lr);
      epoch_loss += lv;
      ++n_batches;
    }

    EvalMeans val =
        evaluate_means(current, data, data.val_begin(), data.test_begin());
    double objective = use_ee ? val.ee : val.sr;
    result.history.push_back({epoch, epoch_loss / std::max(n_batches, 1),
                              val.sr, val.ee, lr});

    if (objective > result.best_val) {
      result.best_val = objective;
      result.best_epoch = epoch;
      result.best = current;
      since_best = 0;
    } else if (++since_best >= tc.patience) {
      break;
    }
  }
  return result;
}

}  // namespace pagnn
