#pragma once

#include <vector>

#include "pagnn/metrics.hpp"
#include "pagnn/model.hpp"

namespace pagnn {

// Fixed PA geometry: minimal packing from the feed, or (with `uniform`)
// spread evenly along the waveguide.  Shape (N*M), real.
TensorData fixed_pa_positions(const ScenarioConfig& cfg,
                              bool uniform = false);

// Same model without RIS assistance: the RIS summation in the effective
// channel disappears and the phase branch is inactive.
Model no_ris_mode(const Model& model);

// Uniformly random one-hot association, shape (B x K).
TensorData random_assoc(int B, int K, Rng& rng);

// Final decisions for a given hard/soft association: per-(b,k) powers are
// read from the unconstrained beams, the per-BS budget rescale is applied
// for this association, and the beams are rescaled accordingly.
DecisionSet decisions_with_association(const ChannelRealization& real,
                                       const std::vector<CTensor>& x_pa,
                                       const std::vector<CTensor>& phi,
                                       const std::vector<CTensor>& w_hat,
                                       const TensorData& U);

struct OracleResult {
  TensorData U;
  double sr = 0.0;
};

// Exhaustive best association for frozen positions/phases/beams (B^K
// candidates; rejects B^K > 4096).
OracleResult oracle_association(const ChannelRealization& real,
                                const std::vector<CTensor>& x_pa,
                                const std::vector<CTensor>& phi,
                                const std::vector<CTensor>& w_hat);

struct ProbeResult {
  DecisionSet d;
  double sr = 0.0;
  double ee = 0.0;
};

// Random sampling through the feasibility-preserving readouts; returns the
// best sum-rate decision found within the budget.
ProbeResult random_search_probe(const ChannelRealization& real, int budget,
                                Rng& rng);

}  // namespace pagnn
