#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pagnn/channel.hpp"
#include "pagnn/layers.hpp"
#include "pagnn/mappings.hpp"
#include "pagnn/metrics.hpp"

namespace pagnn {

struct ModelConfig {
  int G1 = 2;  // stage-1 heterogeneous attention layers
  int G2 = 2;  // stage-1 position head (fully-connected)
  int G3 = 2;  // stage-1 phase head
  int G4 = 2;  // stage-2 alpha branch attention layers
  int G5 = 2;  // stage-2 alpha head
  int G6 = 2;  // stage-2 power branch attention layers
  int G7 = 2;  // stage-2 power head
  int G8 = 2;  // stage-3 attention layers
  int G9 = 2;  // stage-3 head
  int hidden = 64;
  int heads = 4;
  double tau_gs = 1.0;
  AblationFlags ablation;
  bool ris_enabled = true;   // false: ignore RIS entirely (no-RIS variant)
  bool fixed_pa = false;     // PA positions fixed instead of learned
  bool fixed_pa_uniform = false;  // spread fixed PAs over C instead of packing
  SteeringConvention steering = SteeringConvention::kLiteralAngle;

  void validate() const;
  std::string to_text() const;
};

ModelConfig parse_model_config(const std::string& text);

struct Model {
  ModelConfig cfg;
  ScenarioConfig scn;  // dimensions the parameters were built for
  ParamStore params;
};

Model init_model(const ModelConfig& mcfg, const ScenarioConfig& scn,
                 uint64_t seed);

struct ForwardOptions {
  bool train = false;
  Rng* gumbel_rng = nullptr;          // train-mode association noise
  const CTensor* gumbel_noise = nullptr;  // overrides rng when set
};

struct ForwardResult {
  DecisionSet d;
  std::vector<CTensor> w_hat;  // per BS: unconstrained beams, (N x K)
  CTensor per_rate;            // (K x 1)
  CTensor assoc_logits;        // (B x K) real association scores
  CTensor sr;
  CTensor ee;
  MappingFlags flags;
};

// Stage 1: location features -> PA offsets (per BS) and phase rows (per RIS).
void chan_gnn(const Scenario& scn, const Bound& P, Model& model, bool train,
              std::vector<CTensor>& x_pa, std::vector<CTensor>& phi,
              MappingFlags* flags);

// Full pipeline.  The mutable model reference is for batch-norm running
// statistics; parameters themselves are read through `P`.
ForwardResult model_forward(const ChannelRealization& real, const Bound& P,
                            Model& model, const ForwardOptions& opt);

}  // namespace pagnn
