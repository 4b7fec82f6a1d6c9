#pragma once

#include "pagnn/rng.hpp"
#include "pagnn/scenario.hpp"
#include "pagnn/tensor.hpp"

namespace pagnn {

// Flags raised when a readout had to take a guarded fallback path.
struct MappingFlags {
  int zero_phase = 0;     // near-zero phase entries replaced by 1+0j
  int zf_regularized = 0; // rank-deficient Gram regularized
  int hzm_fallback = 0;   // degenerate combination replaced by channel dir
};

// Largest total spacing available on one waveguide.
inline double spacing_budget(const ScenarioConfig& cfg) {
  return cfg.C - (cfg.M - 1) * cfg.delta_min;
}

// Raw reals (N*M) -> feasible PA offsets (N*M).  Spacing >= delta_min and
// 0 <= x <= C hold for any finite input.  Differentiable.
CTensor spacing_readout(const CTensor& raw, const ScenarioConfig& cfg);

// Complex vector -> unit-modulus phase diagonal of the same shape.
CTensor phase_readout(const CTensor& v, MappingFlags* flags = nullptr);

// Stacked channel rows Z (K x N) -> Q = Z^H (Z Z^H)^{-1}, shape (N x K).
CTensor zf_matrix(const CTensor& Z, MappingFlags* flags = nullptr);

// Unit-norm convex mix of the normalized ZF column and channel direction.
// `alpha` is a real scalar tensor in [0, 1]; hhat and q are (N x 1).
CTensor hzm_direction(const CTensor& hhat, const CTensor& q,
                      const CTensor& alpha, MappingFlags* flags = nullptr);

// w = sqrt(p) * direction; `p` is a real scalar tensor.
CTensor scale_beam(const CTensor& direction, const CTensor& p);

// Association from logits (B x K).  Train mode: column-wise Gumbel-Softmax
// at temperature tau; infer mode: exact argmax one-hot, no noise.
CTensor gumbel_assoc(const CTensor& logits, double tau, Rng& rng,
                     bool train);
// Same, with caller-supplied noise (B x K real); used by tests and by
// deterministic replay.
CTensor gumbel_assoc_with_noise(const CTensor& logits, double tau,
                                const CTensor& noise, bool train);

// Raw reals (B x K) -> per-(b,k) powers with per-BS budget enforced:
// p = P_max*sigmoid(raw), then each BS row is rescaled when the
// association-weighted sum exceeds P_max.  Differentiable.
CTensor power_readout(const CTensor& p_raw, const CTensor& U,
                      const ScenarioConfig& cfg);

}  // namespace pagnn
