#pragma once

#include <map>
#include <string>
#include <vector>

#include "pagnn/rng.hpp"
#include "pagnn/scenario.hpp"
#include "pagnn/tensor.hpp"

namespace pagnn {

// Named parameter arrays.  `learnable` receives gradients; `buffers` holds
// batch-norm running statistics, updated at value level during training.
struct ParamStore {
  std::map<std::string, TensorData> learnable;
  std::map<std::string, TensorData> buffers;

  void add(const std::string& name, TensorData d);
  void add_buffer(const std::string& name, TensorData d);
  int64_t count() const;  // total learnable scalar (complex) entries
};

// Parameters materialized as tensors, either tape leaves (training) or
// constants (evaluation).  Keyed by the store's names.
struct Bound {
  std::map<std::string, CTensor> t;
  const CTensor& operator[](const std::string& name) const;
};

Bound bind(const ParamStore& store, Tape& tape);
Bound bind_const(const ParamStore& store);

// Writes the tape's gradients back into a name->grad map (zero for params
// that did not participate).
std::map<std::string, TensorData> collect_grads(const ParamStore& store,
                                                const Bound& bound,
                                                const Tape& tape);

struct AblationFlags {
  bool no_message_passing = false;
  bool no_residual = false;
  bool no_cfl = false;  // fully-connected layers become plain linear maps
};

// Complex Kaiming-normal: re/im ~ N(0, 1/(2*fan_in)).
TensorData kaiming_init(int64_t rows, int64_t cols, Rng& rng);

// ---- heterogeneous attention layer ---------------------------------------
// Node types are indexed by position in `feats`; absent types hold invalid
// tensors.  All present type pairs are connected by directed edges.

extern const char* const kHeteroTypes[3];  // "bs", "ue", "ris"

void register_chal(ParamStore& store, const std::string& prefix,
                   const std::vector<int>& in_dims, int s_out, int heads,
                   Rng& rng);

std::vector<CTensor> chal_forward(const std::vector<CTensor>& feats,
                                  const Bound& P, const std::string& prefix,
                                  int heads, int s_out,
                                  const AblationFlags& fl);

// ---- homogeneous attention layer -----------------------------------------

void register_cgal(ParamStore& store, const std::string& prefix, int s_in,
                   int s_skip, int s_out, Rng& rng);

// `nbr[i]` lists the neighbors of node i; `v0` is the layer-0 skip input.
CTensor cgal_forward(const CTensor& v, const CTensor& v0,
                     const std::vector<std::vector<int>>& nbr,
                     const Bound& P, const std::string& prefix,
                     const AblationFlags& fl);

// Link-graph adjacency: nodes b*K+k; edges join same-UE and same-BS pairs.
std::vector<std::vector<int>> link_graph(int B, int K);

// ---- fully-connected layer with batch norm --------------------------------

void register_cfl(ParamStore& store, const std::string& prefix, int s_in,
                  int s_out, Rng& rng);

// ReLU(xW + b) followed by complex batch normalization over the node axis.
// In train mode running statistics in `store` are updated (momentum 0.1).
CTensor cfl_forward(const CTensor& v, const Bound& P,
                    const std::string& prefix, ParamStore& store, bool train,
                    const AblationFlags& fl);

CTensor complex_batch_norm(const CTensor& v, const Bound& P,
                           const std::string& prefix, ParamStore& store,
                           bool train);

// ---- affine readout projection --------------------------------------------
// Readout chains end in a plain affine map: an activation or batch norm on
// the final layer would pin small-width outputs to a shared constant (dead
// rectifier ties), which is fatal for argmax-style consumers.

void register_linear(ParamStore& store, const std::string& prefix, int s_in,
                     int s_out, Rng& rng);

CTensor linear_forward(const CTensor& v, const Bound& P,
                       const std::string& prefix);

}  // namespace pagnn
