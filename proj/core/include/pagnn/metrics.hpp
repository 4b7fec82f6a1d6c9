#pragma once

#include <string>
#include <vector>

#include "pagnn/channel.hpp"
#include "pagnn/tensor.hpp"

namespace pagnn {

// Full solution for one sample.  Entries may be tracked (training) or
// constant (evaluation).
struct DecisionSet {
  std::vector<CTensor> x_pa;  // per BS: PA offsets, shape (N*M), real
  std::vector<CTensor> phi;   // per RIS: phase diagonal, shape (1 x L)
  std::vector<CTensor> W;     // per BS: beamformers, shape (N x K)
  CTensor U;                  // association weights, shape (B x K), real
};

// Effective channel rows h_hat^H_{b,k}, computed once per decision set and
// shared between the rate and report paths.
struct EffectiveRows {
  std::vector<CTensor> rows;  // [b*K + k], shape (1 x N)
  int B = 0, K = 0;
  const CTensor& at(int b, int k) const { return rows[b * K + k]; }
};

EffectiveRows effective_rows(const ChannelRealization& real,
                             const DecisionSet& d);

// Per-UE achievable rate (bit/s/Hz), shape (K x 1).  Differentiable.
CTensor per_user_rate(const ChannelRealization& real, const DecisionSet& d);
CTensor per_user_rate(const ChannelRealization& real, const DecisionSet& d,
                      const EffectiveRows& eff);

CTensor sum_rate(const ChannelRealization& real, const DecisionSet& d);
CTensor sum_rate(const ChannelRealization& real, const DecisionSet& d,
                 const EffectiveRows& eff);

// Total association-weighted transmit power (W), real scalar.
CTensor total_transmit_power(const DecisionSet& d);

// SR / (transmit power + P_C), in bit/J/Hz.
CTensor energy_efficiency(const ChannelRealization& real,
                          const DecisionSet& d);

std::vector<double> per_bs_power(const DecisionSet& d);

struct FeasibilityReport {
  bool spacing_ok = true;    // adjacent PA spacing >= delta_min
  bool range_ok = true;      // 0 <= x <= C
  bool power_ok = true;      // per-BS power <= P_max
  bool phase_ok = true;      // | |phi| - 1 | small
  bool colsum_ok = true;     // association columns sum to 1
  bool assoc_ok = true;      // u in [0,1]; one-hot when hard

  bool feasible() const {
    return spacing_ok && range_ok && power_ok && phase_ok && colsum_ok &&
           assoc_ok;
  }
  std::string describe() const;
};

// Evaluates the decision-set invariants.  `tol` covers spacing, position
// range and power; phase modulus and column sums use 1e-12.  In hard mode
// the association entries must be exactly 0 or 1.
FeasibilityReport check_feasibility(const DecisionSet& d,
                                    const ScenarioConfig& cfg,
                                    double tol = 1e-9, bool hard_u = false);

}  // namespace pagnn
