#include "pagnn/layers.hpp"

#include <cmath>

namespace pagnn {

const char* const kHeteroTypes[3] = {"bs", "ue", "ris"};

void ParamStore::add(const std::string& name, TensorData d) {
  if (!learnable.emplace(name, std::move(d)).second)
    throw ConfigError("params: duplicate name '" + name + "'");
}

void ParamStore::add_buffer(const std::string& name, TensorData d) {
  if (!buffers.emplace(name, std::move(d)).second)
    throw ConfigError("params: duplicate buffer '" + name + "'");
}

int64_t ParamStore::count() const {
  int64_t n = 0;
  for (const auto& [_, d] : learnable) n += d.numel();
  return n;
}

const CTensor& Bound::operator[](const std::string& name) const {
  auto it = t.find(name);
  if (it == t.end())
    throw ConfigError("params: missing parameter '" + name + "'");
  return it->second;
}

Bound bind(const ParamStore& store, Tape& tape) {
  Bound b;
  for (const auto& [name, d] : store.learnable) b.t.emplace(name, tape.leaf(d));
  return b;
}

Bound bind_const(const ParamStore& store) {
  Bound b;
  for (const auto& [name, d] : store.learnable)
    b.t.emplace(name, CTensor::constant(d));
  return b;
}

std::map<std::string, TensorData> collect_grads(const ParamStore& store,
                                                const Bound& bound,
                                                const Tape& tape) {
  std::map<std::string, TensorData> out;
  for (const auto& [name, d] : store.learnable) {
    (void)d;
    out.emplace(name, tape.grad_tensor(bound[name]));
  }
  return out;
}

TensorData kaiming_init(int64_t rows, int64_t cols, Rng& rng) {
  TensorData d = TensorData::zeros({rows, cols});
  double sd = std::sqrt(1.0 / (2.0 * static_cast<double>(rows)));
  for (auto& e : d.v) {
    double re = sd * rng.gaussian();
    double im = sd * rng.gaussian();
    e = cx(re, im);
  }
  return d;
}

// ---- CHAL -----------------------------------------------------------------

namespace {

std::string head_w(const std::string& p, int type, int d) {
  return p + "W." + kHeteroTypes[type] + "." + std::to_string(d);
}
std::string head_a(const std::string& p, int dst, int src, int d) {
  return p + "a." + kHeteroTypes[dst] + "." + kHeteroTypes[src] + "." +
         std::to_string(d);
}

}  // namespace

void register_chal(ParamStore& store, const std::string& prefix,
                   const std::vector<int>& in_dims, int s_out, int heads,
                   Rng& rng) {
  if (in_dims.size() != 3)
    throw ConfigError("register_chal: expected 3 node-type input dims");
  if (s_out % heads != 0)
    throw ConfigError("register_chal: head count must divide feature dim");
  int s_h = s_out / heads;
  for (int ty = 0; ty < 3; ++ty)
    for (int d = 0; d < heads; ++d)
      store.add(head_w(prefix, ty, d), kaiming_init(in_dims[ty], s_h, rng));
  for (int dst = 0; dst < 3; ++dst)
    for (int src = 0; src < 3; ++src) {
      if (dst == src) continue;
      for (int d = 0; d < heads; ++d)
        store.add(head_a(prefix, dst, src, d),
                  kaiming_init(2 * s_h, 1, rng));
    }
  store.add(prefix + "Wbar", kaiming_init(s_out, s_out, rng));
  store.add(prefix + "q", kaiming_init(s_out, 1, rng));
  for (int ty = 0; ty < 3; ++ty)
    store.add(prefix + "What." + kHeteroTypes[ty],
              kaiming_init(in_dims[ty], s_out, rng));
}

std::vector<CTensor> chal_forward(const std::vector<CTensor>& feats,
                                  const Bound& P, const std::string& prefix,
                                  int heads, int s_out,
                                  const AblationFlags& fl) {
  int s_h = s_out / heads;
  // Per-type per-head projections, shared across edge types.
  std::vector<std::vector<CTensor>> proj(3);
  for (int ty = 0; ty < 3; ++ty) {
    if (!feats[ty].valid()) continue;
    proj[ty].resize(heads);
    for (int d = 0; d < heads; ++d)
      proj[ty][d] = matmul(feats[ty], P[head_w(prefix, ty, d)]);
  }

  std::vector<CTensor> out(3);
  for (int dst = 0; dst < 3; ++dst) {
    if (!feats[dst].valid()) continue;
    CTensor residual = matmul(feats[dst], P[prefix + "What." + kHeteroTypes[dst]]);
    if (fl.no_message_passing) {
      out[dst] = crelu(residual);
      continue;
    }

    // One fused feature matrix per adjacent (source) type.
    std::vector<CTensor> per_src;
    std::vector<CTensor> scores;
    for (int src = 0; src < 3; ++src) {
      if (src == dst || !feats[src].valid()) continue;
      std::vector<CTensor> head_out;
      head_out.reserve(heads);
      for (int d = 0; d < heads; ++d) {
        const CTensor& a = P[head_a(prefix, dst, src, d)];
        CTensor a1 = slice_rows(a, 0, s_h), a2 = slice_rows(a, s_h, s_h);
        CTensor e = add(matmul(proj[dst][d], a1),
                        transpose(matmul(proj[src][d], a2)));
        CTensor att =
            softmax_re(leaky_relu_re(real_part(e)), 1);
        head_out.push_back(crelu(matmul(att, proj[src][d])));
      }
      CTensor fused = concat(head_out, 1);  // (M_dst x s_out)
      per_src.push_back(fused);
      CTensor score = real_part(mean(matmul(
          tanh_re(real_part(matmul(fused, P[prefix + "Wbar"]))),
          P[prefix + "q"])));
      scores.push_back(reshape(score, {1, 1}));
    }

    CTensor sem = softmax_re(concat(scores, 0), 0);  // (#src x 1)
    CTensor agg;
    for (size_t s = 0; s < per_src.size(); ++s) {
      CTensor term = mul(slice_rows(sem, static_cast<int64_t>(s), 1),
                         per_src[s]);
      agg = agg.valid() ? add(agg, term) : term;
    }
    out[dst] = crelu(fl.no_residual ? agg : add(agg, residual));
  }
  return out;
}

// ---- CGAL -----------------------------------------------------------------

void register_cgal(ParamStore& store, const std::string& prefix, int s_in,
                   int s_skip, int s_out, Rng& rng) {
  store.add(prefix + "W", kaiming_init(s_in, s_out, rng));
  store.add(prefix + "a", kaiming_init(2 * s_out, 1, rng));
  store.add(prefix + "Wres_prev", kaiming_init(s_in, s_out, rng));
  store.add(prefix + "Wres_skip", kaiming_init(s_skip, s_out, rng));
}

std::vector<std::vector<int>> link_graph(int B, int K) {
  std::vector<std::vector<int>> nbr(static_cast<size_t>(B) * K);
  for (int b = 0; b < B; ++b)
    for (int k = 0; k < K; ++k) {
      auto& list = nbr[b * K + k];
      for (int bp = 0; bp < B; ++bp)
        if (bp != b) list.push_back(bp * K + k);
      for (int kp = 0; kp < K; ++kp)
        if (kp != k) list.push_back(b * K + kp);
    }
  return nbr;
}

CTensor cgal_forward(const CTensor& v, const CTensor& v0,
                     const std::vector<std::vector<int>>& nbr,
                     const Bound& P, const std::string& prefix,
                     const AblationFlags& fl) {
  CTensor residual = add(matmul(v, P[prefix + "Wres_prev"]),
                         matmul(v0, P[prefix + "Wres_skip"]));
  if (fl.no_message_passing)
    return fl.no_residual ? matmul(v, P[prefix + "Wres_prev"]) : residual;

  int64_t n = v.rows();
  int64_t s_out = P[prefix + "W"].cols();
  CTensor proj = matmul(v, P[prefix + "W"]);
  const CTensor& a = P[prefix + "a"];
  CTensor a1 = slice_rows(a, 0, s_out), a2 = slice_rows(a, s_out, s_out);
  CTensor e = add(matmul(proj, a1), transpose(matmul(proj, a2)));

  TensorData bias = TensorData::zeros({n, n});
  TensorData mask = TensorData::zeros({n, n});
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t j = 0; j < n; ++j) bias.v[i * n + j] = cx(-1e30, 0);
    for (int j : nbr[i]) {
      bias.v[i * n + j] = cx(0, 0);
      mask.v[i * n + j] = cx(1, 0);
    }
  }
  CTensor att = softmax_re(
      add(leaky_relu_re(real_part(e)), CTensor::constant(bias)), 1);
  att = mul(att, CTensor::constant(mask));
  CTensor agg = crelu(matmul(att, proj));
  return fl.no_residual ? agg : add(agg, residual);
}

// ---- CFL + batch norm -----------------------------------------------------

void register_cfl(ParamStore& store, const std::string& prefix, int s_in,
                  int s_out, Rng& rng) {
  store.add(prefix + "W", kaiming_init(s_in, s_out, rng));
  store.add(prefix + "b", TensorData::zeros({1, s_out}));
  store.add(prefix + "bn.scale", TensorData::full({1, s_out}, cx(1, 0)));
  store.add(prefix + "bn.shift", TensorData::zeros({1, s_out}));
  store.add_buffer(prefix + "bn.mean", TensorData::zeros({1, s_out}));
  store.add_buffer(prefix + "bn.var", TensorData::full({1, s_out}, cx(1, 0)));
}

CTensor complex_batch_norm(const CTensor& v, const Bound& P,
                           const std::string& prefix, ParamStore& store,
                           bool train) {
  const double eps = 1e-5;
  if (v.rows() < 1) throw ConfigError("batch norm on empty batch");
  CTensor centered, denom;
  if (train) {
    CTensor mu = mean_axis(v, 0);  // (1 x S)
    centered = sub(v, mu);
    CTensor var = real_part(mean_axis(modulus_sq(centered), 0));
    denom = pow_const(add(var, CTensor::scalar(cx(eps, 0))), 0.5);
    // EMA update of running statistics (value level).
    auto& rm = store.buffers.at(prefix + "bn.mean");
    auto& rv = store.buffers.at(prefix + "bn.var");
    for (int64_t i = 0; i < rm.numel(); ++i) {
      rm.v[i] = 0.9 * rm.v[i] + 0.1 * mu.values()[i];
      rv.v[i] = 0.9 * rv.v[i] + 0.1 * var.values()[i];
    }
  } else {
    const auto& rm = store.buffers.at(prefix + "bn.mean");
    const auto& rv = store.buffers.at(prefix + "bn.var");
    centered = sub(v, CTensor::constant(rm));
    TensorData dv = rv;
    for (auto& e : dv.v) e = cx(std::sqrt(e.real() + eps), 0);
    denom = CTensor::constant(dv);
  }
  CTensor normalized = mul(centered, reciprocal(denom));
  return add(mul(normalized, P[prefix + "bn.scale"]),
             P[prefix + "bn.shift"]);
}

CTensor cfl_forward(const CTensor& v, const Bound& P,
                    const std::string& prefix, ParamStore& store, bool train,
                    const AblationFlags& fl) {
  CTensor y = add(matmul(v, P[prefix + "W"]), P[prefix + "b"]);
  if (fl.no_cfl) return y;
  return complex_batch_norm(crelu(y), P, prefix, store, train);
}

void register_linear(ParamStore& store, const std::string& prefix, int s_in,
                     int s_out, Rng& rng) {
  store.add(prefix + "W", kaiming_init(s_in, s_out, rng));
  store.add(prefix + "b", TensorData::zeros({1, s_out}));
}

CTensor linear_forward(const CTensor& v, const Bound& P,
                       const std::string& prefix) {
  return add(matmul(v, P[prefix + "W"]), P[prefix + "b"]);
}

}  // namespace pagnn
