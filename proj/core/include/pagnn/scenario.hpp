#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pagnn/rng.hpp"

namespace pagnn {

inline constexpr double kSpeedOfLight = 3.0e8;  // m/s

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Vec3 {
  double x = 0, y = 0, z = 0;
};

double distance(const Vec3& a, const Vec3& b);

// Physical constants and counts for one deployment.  Defaults follow the
// standard simulation parameter set; B/R/K/N/M/L must be set by the caller.
struct ScenarioConfig {
  int B = 0;                // base stations
  int R = 0;                // RISs
  int K = 0;                // UEs
  int N = 0;                // waveguides per BS
  int M = 0;                // PAs per waveguide
  int L = 0;                // RIS elements
  double D = 30.0;          // region length (m)
  double S = 30.0;          // region width (m)
  double H_b = 5.0;         // waveguide height (m)
  double C = 10.0;          // waveguide length (m)
  double delta_wg = 0.7;    // waveguide y-spacing (m)
  double P_max = 10.0;      // power budget (W)
  double P_C = 5.0;         // circuit power (W)
  double sigma2 = 1e-9;     // noise power (W); -60 dBm
  double f_c = 6e9;         // carrier frequency (Hz)
  double n_eff = 1.4;       // effective refractive index
  double zeta = 0.0046;     // in-waveguide attenuation (1/m)
  double kappa = 1.9952623149688795;  // Rician factor, linear (3 dB)
  double alpha_pl = 2.8;    // path-loss exponent
  double beta0 = 0.01;      // channel gain at 1 m, linear (-20 dB)
  double delta_min = 0.1;   // minimum PA spacing (m)
  double elem_sep = 0.025;  // RIS element separation (m); lambda/2
  uint64_t seed = 1;

  double lambda() const { return kSpeedOfLight / f_c; }
  double guided_wavelength() const { return lambda() / n_eff; }
  double eta() const;  // c^2 / (4 pi f_c)^2

  void validate() const;  // throws ConfigError
};

ScenarioConfig load_config(const std::string& path);
ScenarioConfig parse_config(const std::string& text);
std::string config_to_text(const ScenarioConfig& cfg);
// Stable hash of all fields; stamped into artifacts for reproducibility.
uint64_t config_hash(const ScenarioConfig& cfg);

struct Scenario {
  ScenarioConfig config;
  std::vector<Vec3> bs_feed_points;  // B*N, waveguide-major per BS
  std::vector<Vec3> ris_positions;   // R
  std::vector<Vec3> ue_positions;    // K, z = 0

  const Vec3& feed(int b, int n) const {
    return bs_feed_points[b * config.N + n];
  }
};

// Smallest grid (rows, cols) with rows*cols in [count, 2*count] whose aspect
// ratio cols/rows best matches D/S; ties broken by smaller area, then fewer
// rows.
std::pair<int, int> grid_dims(int count, double D, double S);

void place_infrastructure(const ScenarioConfig& cfg,
                          std::vector<Vec3>& bs_feed_points,
                          std::vector<Vec3>& ris_positions);

std::vector<Vec3> sample_ues(const ScenarioConfig& cfg, Rng& rng);

Scenario build_scenario(const ScenarioConfig& cfg, Rng& rng);

}  // namespace pagnn
