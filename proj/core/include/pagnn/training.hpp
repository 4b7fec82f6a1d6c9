#pragma once

#include <map>
#include <string>
#include <vector>

#include "pagnn/model.hpp"

namespace pagnn {

struct TrainConfig {
  enum class Objective { kSumRate, kEnergyEfficiency };
  Objective objective = Objective::kSumRate;
  int epochs = 50;
  int batch_size = 128;
  double lr = 5e-5;
  std::vector<int> milestones = {20, 35};  // lr *= decay after these epochs
  double decay = 0.5;
  int patience = 10;  // early stopping on the validation objective
  uint64_t seed = 1;
};

struct Sample {
  std::vector<Vec3> ue_positions;
  std::vector<std::vector<cx>> nlos_pa_ris;
  std::vector<std::vector<cx>> nlos_ris_ue;
};

// Fixed infrastructure, i.i.d. samples, contiguous 8:1:1 split.
struct Dataset {
  ScenarioConfig config;
  std::vector<Vec3> bs_feed_points;
  std::vector<Vec3> ris_positions;
  std::vector<Sample> samples;
  int n_train = 0, n_val = 0, n_test = 0;

  int val_begin() const { return n_train; }
  int test_begin() const { return n_train + n_val; }
  ChannelRealization realization(int idx, SteeringConvention conv) const;
};

Dataset generate_dataset(const ScenarioConfig& cfg, int n_samples);
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

// Unsupervised losses; each entry is one sample's real scalar.
CTensor loss_sr(const std::vector<CTensor>& srs);
CTensor loss_ee(const std::vector<CTensor>& srs,
                const std::vector<CTensor>& powers, double P_C);

struct AdamState {
  struct Moments {
    TensorData m, v;
  };
  std::map<std::string, Moments> per_param;
  int64_t t = 0;
};

// Standard Adam on real/imaginary parts as independent coordinates.
void adam_step(ParamStore& params,
               const std::map<std::string, TensorData>& grads,
               AdamState& state, double lr, double beta1 = 0.9,
               double beta2 = 0.999, double eps = 1e-8);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0;
  double val_sr = 0;
  double val_ee = 0;
  double lr = 0;
};

struct TrainResult {
  Model best;
  std::vector<EpochRecord> history;
  double best_val = 0;
  int best_epoch = 0;
};

TrainResult train(const Model& model, const Dataset& data,
                  const TrainConfig& tc);

// Mean infer-mode SR and EE over [begin, end) of the dataset.
struct EvalMeans {
  double sr = 0, ee = 0;
};
EvalMeans evaluate_means(Model& model, const Dataset& data, int begin,
                         int end);

std::string history_csv(const std::vector<EpochRecord>& history);

}  // namespace pagnn
