// Command-line front end: dataset generation, training, evaluation and
// report emission for the pinching-antenna system library.

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "pagnn/baselines.hpp"
#include "pagnn/checkpoint.hpp"
#include "pagnn/training.hpp"

namespace {

using namespace pagnn;

int thread_count() {
  if (const char* env = std::getenv("PAGNN_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

struct SampleRow {
  int id = 0;
  double sr = 0, ee = 0;
  std::vector<double> power;
  bool feasible = false;
  double infer_ms = 0;
};

std::string csv_header(const ScenarioConfig& cfg, uint64_t seed) {
  std::ostringstream out;
  out << "# config_hash=" << std::hex << config_hash(cfg) << std::dec
      << " seed=" << seed << "\n";
  out << "sample_id,K,B,R,SR_bit_s_Hz,EE_bit_J_Hz,power_W_per_bs,feasible,"
         "infer_ms\n";
  return out.str();
}

void write_rows(std::ostream& out, const ScenarioConfig& cfg,
                const std::vector<SampleRow>& rows) {
  out.precision(12);
  for (const auto& r : rows) {
    out << r.id << "," << cfg.K << "," << cfg.B << "," << cfg.R << ","
        << r.sr << "," << r.ee << ",";
    for (size_t b = 0; b < r.power.size(); ++b)
      out << (b ? ";" : "") << r.power[b];
    out << "," << (r.feasible ? 1 : 0) << "," << r.infer_ms << "\n";
  }
}

SampleRow eval_sample(Model& model, const Dataset& data, int idx,
                      const std::string& mode, uint64_t seed) {
  SampleRow row;
  row.id = idx;
  ChannelRealization real = data.realization(idx, model.cfg.steering);
  Bound P = bind_const(model.params);
  ForwardOptions opt;  // infer mode
  auto t0 = std::chrono::steady_clock::now();
  ForwardResult r = model_forward(real, P, model, opt);
  DecisionSet d = r.d;
  if (mode == "random-assoc") {
    Rng rng = Rng::stream(seed ^ 0xa550c, static_cast<uint64_t>(idx));
    TensorData U = random_assoc(data.config.B, data.config.K, rng);
    d = decisions_with_association(real, r.d.x_pa, r.d.phi, r.w_hat, U);
  } else if (mode == "oracle-assoc") {
    OracleResult best =
        oracle_association(real, r.d.x_pa, r.d.phi, r.w_hat);
    d = decisions_with_association(real, r.d.x_pa, r.d.phi, r.w_hat,
                                   best.U);
  }
  CTensor sr = sum_rate(real, d);
  CTensor ee = energy_efficiency(real, d);
  auto t1 = std::chrono::steady_clock::now();
  row.sr = sr.item().real();
  row.ee = ee.item().real();
  row.power = per_bs_power(d);
  row.feasible =
      check_feasibility(d, data.config, 1e-9, true).feasible();
  row.infer_ms =
      std::chrono::duration<double, std::milli>(t1 - t0).count();
  return row;
}

int cmd_generate(const std::string& config_path, const std::string& out,
                 int samples) {
  ScenarioConfig cfg = load_config(config_path);
  Dataset ds = generate_dataset(cfg, samples);
  save_dataset(ds, out);
  std::cout << "wrote " << ds.samples.size() << " samples (" << ds.n_train
            << "/" << ds.n_val << "/" << ds.n_test << " split) to " << out
            << "\nconfig_hash=" << std::hex << config_hash(cfg) << std::dec
            << " seed=" << cfg.seed << "\n";
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& data_path,
              const std::string& objective, const std::string& out,
              const TrainConfig& tc_in, const ModelConfig& mc) {
  ScenarioConfig cfg = load_config(config_path);
  Dataset ds = load_dataset(data_path);
  if (config_hash(cfg) != config_hash(ds.config))
    std::cerr << "warning: config file and dataset config differ; "
                 "using the dataset's parameters\n";
  TrainConfig tc = tc_in;
  if (objective == "ee")
    tc.objective = TrainConfig::Objective::kEnergyEfficiency;
  else if (objective != "sr")
    throw ConfigError("train: objective must be sr or ee");

  Model model = init_model(mc, ds.config, tc.seed);
  TrainResult result = train(model, ds, tc);
  save_checkpoint(result.best, out);
  std::ofstream hist(out + ".history.csv");
  hist << history_csv(result.history);
  std::cout << "best validation objective " << result.best_val
            << " at epoch " << result.best_epoch << "; checkpoint: " << out
            << "\nconfig_hash=" << std::hex << config_hash(ds.config)
            << std::dec << " seed=" << tc.seed << "\n";
  return 0;
}

int cmd_eval(const std::string& ckpt, const std::string& data_path,
             const std::string& mode, int k_test,
             const std::string& out_csv) {
  Model model = load_checkpoint(ckpt);
  Dataset ds = load_dataset(data_path);
  if (mode == "fixed-pa") model.cfg.fixed_pa = true;
  if (mode == "no-ris") model.cfg.ris_enabled = false;
  if (k_test > 0 && k_test != ds.config.K) {
    ScenarioConfig cfg = ds.config;
    cfg.K = k_test;
    cfg.seed ^= 0x6b74657374ull;
    cfg.validate();
    int n_test = std::max(ds.n_test, 3);
    Dataset fresh = generate_dataset(cfg, 10 * n_test);
    ds = std::move(fresh);
  }

  int begin = ds.test_begin();
  int end = static_cast<int>(ds.samples.size());
  std::vector<SampleRow> rows(end - begin);
  int workers = thread_count();
  std::atomic<int> next(begin);
  auto work = [&]() {
    Model local = model;  // private batch-norm buffers per worker
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= end) break;
      rows[i - begin] =
          eval_sample(local, ds, i, mode, ds.config.seed);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  double sr = 0, ee = 0, ms = 0;
  int feas = 0;
  for (const auto& r : rows) {
    sr += r.sr;
    ee += r.ee;
    ms += r.infer_ms;
    feas += r.feasible ? 1 : 0;
  }
  int n = static_cast<int>(rows.size());
  if (n == 0) throw ConfigError("eval: empty test split");

  std::ofstream out(out_csv);
  if (!out) throw ConfigError("eval: cannot write '" + out_csv + "'");
  out << csv_header(ds.config, ds.config.seed);
  write_rows(out, ds.config, rows);
  std::cout << "mode=" << mode << " samples=" << n << " mean_SR=" << sr / n
            << " mean_EE=" << ee / n << " feasible=" << feas << "/" << n
            << " mean_infer_ms=" << ms / n << "\n";
  if (feas != n) {
    std::cerr << "error: " << (n - feas) << " infeasible outputs\n";
    return 3;
  }
  return 0;
}

int cmd_report(const std::vector<std::string>& inputs,
               const std::string& out_path) {
  std::ofstream out(out_path);
  if (!out) throw ConfigError("report: cannot write '" + out_path + "'");
  out << "input,samples,mean_SR_bit_s_Hz,mean_EE_bit_J_Hz,feasible_rate\n";
  out.precision(12);
  for (const auto& path : inputs) {
    std::ifstream in(path);
    if (!in) throw ConfigError("report: cannot open '" + path + "'");
    std::string line;
    double sr = 0, ee = 0;
    int n = 0, feas = 0;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#' || line.rfind("sample_id", 0) == 0)
        continue;
      std::istringstream ls(line);
      std::string field;
      std::vector<std::string> fields;
      while (std::getline(ls, field, ',')) fields.push_back(field);
      if (fields.size() < 8) continue;
      sr += std::stod(fields[4]);
      ee += std::stod(fields[5]);
      feas += std::stoi(fields[7]);
      ++n;
    }
    if (n == 0) throw ConfigError("report: no data rows in '" + path + "'");
    out << path << "," << n << "," << sr / n << "," << ee / n << ","
        << static_cast<double>(feas) / n << "\n";
  }
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

int cmd_selftest() {
  // Gradient check on a miniature end-to-end instance.
  ScenarioConfig cfg;
  cfg.B = 2;
  cfg.R = 1;
  cfg.N = 2;
  cfg.M = 2;
  cfg.L = 4;
  cfg.K = 2;
  cfg.seed = 7;
  cfg.validate();
  ModelConfig mc;
  mc.G1 = mc.G2 = mc.G3 = mc.G4 = mc.G5 = mc.G6 = mc.G7 = mc.G8 = mc.G9 = 1;
  mc.hidden = 8;
  mc.heads = 2;
  Model model = init_model(mc, cfg, 7);
  // Perturb all parameters away from the symmetric initial point.  At init
  // the batch-normalized readout inputs sit exactly on piecewise boundaries
  // (spacing budget, zero-phase substitution), where finite differences
  // straddle a kink and cannot match the one-sided analytic derivative.
  {
    Rng jr(1234);
    for (auto& [pname, d] : model.params.learnable)
      for (auto& e : d.v) e += 0.05 * jr.cgaussian();
  }
  Dataset ds = generate_dataset(cfg, 4);

  std::vector<std::string> names;
  std::vector<TensorData> params;
  for (const auto& [name, d] : model.params.learnable) {
    names.push_back(name);
    params.push_back(d);
  }
  TensorData noise = TensorData::zeros({cfg.B, cfg.K});
  {
    Rng nr(99);
    for (auto& e : noise.v) e = cx(nr.gumbel(), 0);
  }
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
    std::vector<CTensor> srs;
    for (int i = 0; i < 2; ++i) {
      ChannelRealization real = ds.realization(i, m.cfg.steering);
      srs.push_back(model_forward(real, B, m, opt).sr);
    }
    CTensor loss = loss_sr(srs);
    if (tape) {
      tape->backward(loss);
      *grads = collect_grads(m.params, B, *tape);
    }
    return loss.item().real();
  };
  std::vector<std::vector<int64_t>> indices(params.size());
  Rng pick(3);
  for (size_t i = 0; i < params.size(); ++i) {
    indices[i].push_back(
        static_cast<int64_t>(pick.uniform_int(params[i].numel())));
  }
  double err = grad_check(
      [&](const std::vector<TensorData>& p) { return run(p, nullptr, nullptr); },
      [&](const std::vector<TensorData>& p) {
        Tape tape;
        std::map<std::string, TensorData> grads;
        run(p, &tape, &grads);
        std::vector<TensorData> out;
        for (const auto& n2 : names) out.push_back(grads.at(n2));
        return out;
      },
      params, indices);
  std::cout << "gradient check max relative error: " << err << "\n";
  if (!(err < 1e-4)) {
    std::cerr << "selftest: gradient check failed\n";
    return 3;
  }

  // Rate oracle equivalence on random decision sets.
  Rng rng(11);
  for (int inst = 0; inst < 10; ++inst) {
    ChannelRealization real = ds.realization(inst % 4, model.cfg.steering);
    ProbeResult probe = random_search_probe(real, 1, rng);
    CTensor rates = per_user_rate(real, probe.d);
    // independent scalar evaluation
    double sr_loop = 0;
    std::vector<CTensor> rows;
    for (int b = 0; b < cfg.B; ++b)
      for (int k = 0; k < cfg.K; ++k)
        rows.push_back(
            effective_channel(real, b, k, probe.d.x_pa[b], probe.d.phi));
    for (int k = 0; k < cfg.K; ++k) {
      cx sig(0);
      double interf = cfg.sigma2;
      for (int b = 0; b < cfg.B; ++b)
        for (int kp = 0; kp < cfg.K; ++kp) {
          cx dot(0);
          for (int n2 = 0; n2 < cfg.N; ++n2)
            dot += rows[b * cfg.K + k].values()[n2] *
                   probe.d.W[b].values()[n2 * cfg.K + kp];
          cx term = probe.d.U.values()[b * cfg.K + kp].real() * dot;
          if (kp == k)
            sig += term;
          else
            interf += std::norm(term);
        }
      sr_loop += std::log2(1.0 + std::norm(sig) / interf);
    }
    double sr_vec = sum(rates).item().real();
    double rel = std::abs(sr_vec - sr_loop) /
                 std::max({std::abs(sr_vec), std::abs(sr_loop), 1e-12});
    if (rel > 1e-10) {
      std::cerr << "selftest: rate oracle mismatch " << rel << "\n";
      return 3;
    }
  }
  std::cout << "rate oracle equivalence: ok\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-BS multi-RIS pinching-antenna system tool"};
  app.require_subcommand(1);

  std::string config_path, data_path, out_path, ckpt_path, objective = "sr";
  std::string mode = "proposed";
  int samples = 1000, k_test = 0;
  std::vector<std::string> report_inputs;
  TrainConfig tc;
  ModelConfig mc;

  auto* gen = app.add_subcommand("generate", "generate a dataset");
  gen->add_option("--config", config_path)->required();
  gen->add_option("--out", out_path)->required();
  gen->add_option("--samples", samples);

  auto* tr = app.add_subcommand("train", "train a model");
  tr->add_option("--config", config_path)->required();
  tr->add_option("--data", data_path)->required();
  tr->add_option("--objective", objective)
      ->check(CLI::IsMember({"sr", "ee"}));
  tr->add_option("--out", ckpt_path)->required();
  tr->add_option("--epochs", tc.epochs);
  tr->add_option("--batch", tc.batch_size);
  tr->add_option("--lr", tc.lr);
  tr->add_option("--patience", tc.patience);
  tr->add_option("--seed", tc.seed);
  tr->add_option("--hidden", mc.hidden);
  tr->add_option("--heads", mc.heads);
  tr->add_option("--tau", mc.tau_gs);
  tr->add_flag("--fixed-pa", mc.fixed_pa);
  tr->add_flag("--no-ris", [&mc](int64_t) { mc.ris_enabled = false; });
  tr->add_flag("--no-residual", mc.ablation.no_residual);
  tr->add_flag("--no-message-passing", mc.ablation.no_message_passing);
  tr->add_flag("--no-cfl", mc.ablation.no_cfl);

  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint");
  ev->add_option("--ckpt", ckpt_path)->required();
  ev->add_option("--data", data_path)->required();
  ev->add_option("--mode", mode)
      ->check(CLI::IsMember({"proposed", "fixed-pa", "no-ris",
                             "random-assoc", "oracle-assoc"}));
  ev->add_option("--k-test", k_test);
  ev->add_option("--out", out_path);

  auto* rep = app.add_subcommand("report", "aggregate evaluation CSVs");
  rep->add_option("--in", report_inputs)->required();
  rep->add_option("--out", out_path)->required();

  app.add_subcommand("selftest",
                     "run gradient-check and oracle-equivalence suites");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_generate(config_path, out_path, samples);
    if (tr->parsed())
      return cmd_train(config_path, data_path, objective, ckpt_path, tc, mc);
    if (ev->parsed()) {
      if (out_path.empty()) out_path = "eval_" + mode + ".csv";
      return cmd_eval(ckpt_path, data_path, mode, k_test, out_path);
    }
    if (rep->parsed()) return cmd_report(report_inputs, out_path);
    return cmd_selftest();
  } catch (const pagnn::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
