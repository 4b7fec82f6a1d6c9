#include "pagnn/scenario.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

namespace pagnn {

double distance(const Vec3& a, const Vec3& b) {
  double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double ScenarioConfig::eta() const {
  double d = 4.0 * std::numbers::pi * f_c;
  return kSpeedOfLight * kSpeedOfLight / (d * d);
}

void ScenarioConfig::validate() const {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(B >= 1, "config: B must be >= 1");
  require(R >= 0, "config: R must be >= 0");
  require(K >= 1, "config: K must be >= 1");
  require(N >= 1, "config: N must be >= 1");
  require(M >= 1, "config: M must be >= 1");
  require(R == 0 || L >= 1, "config: L must be >= 1 when R > 0");
  require(K <= N, "config: K must not exceed N (waveguides per BS)");
  require(D > 0 && S > 0 && H_b > 0 && C > 0 && delta_wg > 0,
          "config: all lengths must be strictly positive");
  require(P_max > 0 && P_C > 0 && sigma2 > 0,
          "config: powers and noise must be strictly positive");
  require(beta0 > 0 && kappa > 0 && f_c > 0 && n_eff > 0,
          "config: beta0, kappa, f_c, n_eff must be strictly positive");
  require(delta_min > 0 && elem_sep > 0,
          "config: delta_min and elem_sep must be strictly positive");
  require(delta_min * (M - 1) < C,
          "config: delta_min*(M-1) must be < C (empty PA spacing set)");
}

namespace {

double dbm_to_watt(double dbm) { return std::pow(10.0, dbm / 10.0) * 1e-3; }
double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      bool blank = line.find_first_not_of(" \t\r") == std::string::npos;
      if (!blank)
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": expected key = value");
      continue;
    }
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty())
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": empty key or value");
    kv[key] = val;
  }

  ScenarioConfig cfg;
  auto take = [&kv](const std::string& key, auto setter) {
    auto it = kv.find(key);
    if (it == kv.end()) return;
    try {
      setter(std::stod(it->second));
    } catch (const std::exception&) {
      throw ConfigError("config: bad numeric value for key '" + key + "'");
    }
    kv.erase(it);
  };
  take("B", [&](double v) { cfg.B = static_cast<int>(v); });
  take("R", [&](double v) { cfg.R = static_cast<int>(v); });
  take("K", [&](double v) { cfg.K = static_cast<int>(v); });
  take("N", [&](double v) { cfg.N = static_cast<int>(v); });
  take("M", [&](double v) { cfg.M = static_cast<int>(v); });
  take("L", [&](double v) { cfg.L = static_cast<int>(v); });
  take("D", [&](double v) { cfg.D = v; });
  take("S", [&](double v) { cfg.S = v; });
  take("H_b", [&](double v) { cfg.H_b = v; });
  take("C", [&](double v) { cfg.C = v; });
  take("delta_wg", [&](double v) { cfg.delta_wg = v; });
  take("P_max", [&](double v) { cfg.P_max = v; });
  take("P_C", [&](double v) { cfg.P_C = v; });
  take("sigma2", [&](double v) { cfg.sigma2 = v; });
  take("sigma2_dbm", [&](double v) { cfg.sigma2 = dbm_to_watt(v); });
  take("f_c", [&](double v) { cfg.f_c = v; });
  take("n_eff", [&](double v) { cfg.n_eff = v; });
  take("zeta", [&](double v) { cfg.zeta = v; });
  take("kappa", [&](double v) { cfg.kappa = v; });
  take("kappa_db", [&](double v) { cfg.kappa = db_to_linear(v); });
  take("alpha_pl", [&](double v) { cfg.alpha_pl = v; });
  take("beta0", [&](double v) { cfg.beta0 = v; });
  take("beta0_db", [&](double v) { cfg.beta0 = db_to_linear(v); });
  take("delta_min", [&](double v) { cfg.delta_min = v; });
  take("elem_sep", [&](double v) { cfg.elem_sep = v; });
  take("seed", [&](double v) { cfg.seed = static_cast<uint64_t>(v); });
  if (!kv.empty())
    throw ConfigError("config: unknown key '" + kv.begin()->first + "'");
  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_text(const ScenarioConfig& cfg) {
  std::ostringstream out;
  out.precision(17);
  out << "B = " << cfg.B << "\nR = " << cfg.R << "\nK = " << cfg.K
      << "\nN = " << cfg.N << "\nM = " << cfg.M << "\nL = " << cfg.L
      << "\nD = " << cfg.D << "\nS = " << cfg.S << "\nH_b = " << cfg.H_b
      << "\nC = " << cfg.C << "\ndelta_wg = " << cfg.delta_wg
      << "\nP_max = " << cfg.P_max << "\nP_C = " << cfg.P_C
      << "\nsigma2 = " << cfg.sigma2 << "\nf_c = " << cfg.f_c
      << "\nn_eff = " << cfg.n_eff << "\nzeta = " << cfg.zeta
      << "\nkappa = " << cfg.kappa << "\nalpha_pl = " << cfg.alpha_pl
      << "\nbeta0 = " << cfg.beta0 << "\ndelta_min = " << cfg.delta_min
      << "\nelem_sep = " << cfg.elem_sep << "\nseed = " << cfg.seed << "\n";
  return out.str();
}

uint64_t config_hash(const ScenarioConfig& cfg) {
  std::string text = config_to_text(cfg);
  uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::pair<int, int> grid_dims(int count, double D, double S) {
  if (count < 1 || D <= 0 || S <= 0)
    throw ConfigError("grid_dims: count >= 1, D > 0, S > 0 required");
  double aspect = D / S;
  int best_p = 1, best_q = count;
  double best_obj = HUGE_VAL;
  for (int p = 1; p <= 2 * count; ++p) {
    for (int q = 1; static_cast<long>(p) * q <= 2 * count; ++q) {
      if (static_cast<long>(p) * q < count) continue;
      double obj = std::abs(static_cast<double>(q) / p - aspect);
      long pq = static_cast<long>(p) * q;
      long best_pq = static_cast<long>(best_p) * best_q;
      bool better = obj < best_obj - 1e-15;
      bool tie = std::abs(obj - best_obj) <= 1e-15;
      if (better || (tie && (pq < best_pq || (pq == best_pq && p < best_p)))) {
        best_obj = obj;
        best_p = p;
        best_q = q;
      }
    }
  }
  return {best_p, best_q};
}

namespace {

std::vector<Vec3> grid_centers(int count, double D, double S, double z) {
  auto [rows, cols] = grid_dims(count, D, S);
  std::vector<Vec3> out;
  out.reserve(count);
  for (int r = 0; r < rows && static_cast<int>(out.size()) < count; ++r)
    for (int c = 0; c < cols && static_cast<int>(out.size()) < count; ++c)
      out.push_back({(c + 0.5) * D / cols, (r + 0.5) * S / rows, z});
  return out;
}

}  // namespace

void place_infrastructure(const ScenarioConfig& cfg,
                          std::vector<Vec3>& bs_feed_points,
                          std::vector<Vec3>& ris_positions) {
  cfg.validate();
  if (cfg.C > cfg.D)
    throw ConfigError("config: waveguide length C exceeds region length D");
  std::vector<Vec3> bs = grid_centers(cfg.B, cfg.D, cfg.S, cfg.H_b);
  bs_feed_points.clear();
  bs_feed_points.reserve(static_cast<size_t>(cfg.B) * cfg.N);
  for (const Vec3& c : bs) {
    for (int n = 0; n < cfg.N; ++n) {
      // Waveguides centered on the BS grid point; feed at the left end.
      double y = c.y + (n - (cfg.N - 1) / 2.0) * cfg.delta_wg;
      bs_feed_points.push_back({c.x - cfg.C / 2.0, y, cfg.H_b});
    }
  }
  ris_positions = cfg.R > 0
                      ? grid_centers(cfg.R, cfg.D, cfg.S, cfg.H_b / 2.0)
                      : std::vector<Vec3>{};
}

std::vector<Vec3> sample_ues(const ScenarioConfig& cfg, Rng& rng) {
  std::vector<Vec3> out(cfg.K);
  for (auto& u : out) {
    u.x = rng.uniform(0.0, cfg.D);
    u.y = rng.uniform(0.0, cfg.S);
    u.z = 0.0;
  }
  return out;
}

Scenario build_scenario(const ScenarioConfig& cfg, Rng& rng) {
  Scenario s;
  s.config = cfg;
  place_infrastructure(cfg, s.bs_feed_points, s.ris_positions);
  s.ue_positions = sample_ues(cfg, rng);
  return s;
}

}  // namespace pagnn
