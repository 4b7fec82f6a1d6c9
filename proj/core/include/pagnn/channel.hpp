#pragma once

#include <vector>

#include "pagnn/rng.hpp"
#include "pagnn/scenario.hpp"
#include "pagnn/tensor.hpp"

namespace pagnn {

// Steering phase progression: the literal angle value, or its cosine.
enum class SteeringConvention { kLiteralAngle, kCosAngle };

// One sample's channels.  NLoS draws are frozen so that evaluating the
// channel at different PA positions within one sample reuses identical
// fading.
struct ChannelRealization {
  Scenario scenario;
  SteeringConvention convention = SteeringConvention::kLiteralAngle;
  std::vector<std::vector<cx>> nlos_pa_ris;  // [b*R + r], length L
  std::vector<std::vector<cx>> nlos_ris_ue;  // [r*K + k], length L
  std::vector<std::vector<cx>> h_ris_ue;     // [r*K + k], length L

  const std::vector<cx>& ris_ue(int r, int k) const {
    return h_ris_ue[r * scenario.config.K + k];
  }
};

// Azimuth of (to - from) in the x-y plane, wrapped to [0, 2*pi).
double azimuth(const Vec3& from, const Vec3& to);

std::vector<cx> los_steering(double aod, int L, double elem_sep,
                             double lambda, SteeringConvention conv);

std::vector<cx> draw_rician(const std::vector<cx>& los, double kappa,
                            Rng& rng);

std::vector<cx> rician_mix(const std::vector<cx>& los,
                           const std::vector<cx>& nlos, double kappa);

// Draws fresh NLoS fading and precomputes the RIS-UE channels.
ChannelRealization make_realization(
    const Scenario& scn, Rng& rng,
    SteeringConvention conv = SteeringConvention::kLiteralAngle);

// Rebuilds a realization from stored draws (dataset replay).
ChannelRealization realization_from_draws(
    Scenario scn, std::vector<std::vector<cx>> nlos_pa_ris,
    std::vector<std::vector<cx>> nlos_ris_ue,
    SteeringConvention conv = SteeringConvention::kLiteralAngle);

// ---- differentiable channel synthesis ------------------------------------
// `x_b` holds BS b's PA offsets from the feed, waveguide-major, shape (N*M).
// All functions accept tracked or constant tensors.

// In-waveguide pinching matrix G_b, shape (M*N x N), block-diagonal.
CTensor pinching_matrix(const CTensor& x_b, const ScenarioConfig& cfg);

// PA-RIS channel H_{b,r}, shape (L x M*N).
CTensor pa_ris_channel(const ChannelRealization& real, int b, int r,
                       const CTensor& x_b);

// Direct PA-UE channel f_{b,k}, shape (M*N x 1).
CTensor pa_ue_channel(const ChannelRealization& real, int b, int k,
                      const CTensor& x_b);

// Effective channel row h_hat^H_{b,k}, shape (1 x N).  `phi_rows[r]` holds
// the diagonal of Phi_r as a (1 x L) tensor; pass an empty vector for a
// RIS-free system.
CTensor effective_channel(const ChannelRealization& real, int b, int k,
                          const CTensor& x_b,
                          const std::vector<CTensor>& phi_rows);

}  // namespace pagnn
