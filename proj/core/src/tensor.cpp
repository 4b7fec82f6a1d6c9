#include "pagnn/tensor.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pagnn {

namespace {

using MatC =
    Eigen::Matrix<cx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapC = Eigen::Map<MatC>;
using CMapC = Eigen::Map<const MatC>;

[[noreturn]] void shape_error(const char* what) {
  throw std::invalid_argument(std::string("tensor: ") + what);
}

int64_t shape_numel(const std::vector<int64_t>& s) {
  int64_t n = 1;
  for (int64_t d : s) n *= d;
  return n;
}

Tape* tape_of(std::initializer_list<const CTensor*> ins) {
  Tape* t = nullptr;
  for (const CTensor* a : ins) {
    if (a->tracked()) {
      if (t && t != a->tape()) shape_error("inputs live on different tapes");
      t = a->tape();
    }
  }
  return t;
}

CTensor emit(TensorData out, std::initializer_list<const CTensor*> ins,
             const std::function<Tape::BackwardFn()>& make_back) {
  Tape* t = tape_of(ins);
  auto data = std::make_shared<const TensorData>(std::move(out));
  if (!t) return CTensor(data, nullptr, -1);
  std::vector<int> parents;
  for (const CTensor* a : ins) parents.push_back(a->tracked() ? a->node() : -1);
  return t->track(data, std::move(parents), make_back());
}

// Broadcast index map for right-aligned shapes.
struct Bcast {
  std::vector<int64_t> out_shape;
  std::vector<int64_t> stride_a, stride_b;  // per out dim, 0 where broadcast
  int64_t numel;

  Bcast(const std::vector<int64_t>& sa, const std::vector<int64_t>& sb) {
    size_t rank = std::max(sa.size(), sb.size());
    out_shape.resize(rank);
    stride_a.resize(rank);
    stride_b.resize(rank);
    std::vector<int64_t> da(rank, 1), db(rank, 1);
    for (size_t i = 0; i < sa.size(); ++i) da[rank - sa.size() + i] = sa[i];
    for (size_t i = 0; i < sb.size(); ++i) db[rank - sb.size() + i] = sb[i];
    for (size_t i = 0; i < rank; ++i) {
      if (da[i] != db[i] && da[i] != 1 && db[i] != 1)
        shape_error("incompatible broadcast shapes");
      out_shape[i] = std::max(da[i], db[i]);
    }
    int64_t ra = 1, rb = 1;
    for (size_t i = rank; i-- > 0;) {
      stride_a[i] = (da[i] == 1 && out_shape[i] != 1) ? 0 : ra;
      stride_b[i] = (db[i] == 1 && out_shape[i] != 1) ? 0 : rb;
      ra *= da[i];
      rb *= db[i];
    }
    numel = shape_numel(out_shape);
  }

  // Calls fn(out_idx, a_idx, b_idx) for every output element.
  template <class F>
  void for_each(F&& fn) const {
    size_t rank = out_shape.size();
    std::vector<int64_t> idx(rank, 0);
    for (int64_t o = 0; o < numel; ++o) {
      int64_t ia = 0, ib = 0;
      for (size_t i = 0; i < rank; ++i) {
        ia += idx[i] * stride_a[i];
        ib += idx[i] * stride_b[i];
      }
      fn(o, ia, ib);
      for (size_t i = rank; i-- > 0;) {
        if (++idx[i] < out_shape[i]) break;
        idx[i] = 0;
      }
    }
  }
};

// Binary elementwise op with Wirtinger adjoints.  dfa/dfb take (a, b, out)
// and return {dw/dz, dw/dzbar} wrt that input; the propagated gradient is
// g_in = conj(g)*dzbar + g*conj(dz).
template <class F, class DA, class DB>
CTensor binary_ew(const CTensor& a, const CTensor& b, F f, DA dfa, DB dfb) {
  if (a.numel() == 0 || b.numel() == 0) shape_error("op on empty tensor");
  Bcast bc(a.shape(), b.shape());
  TensorData out(bc.out_shape, std::vector<cx>(bc.numel));
  const auto& av = a.values();
  const auto& bv = b.values();
  bc.for_each([&](int64_t o, int64_t ia, int64_t ib) {
    out.v[o] = f(av[ia], bv[ib]);
  });
  auto ad = a.data();
  auto bd = b.data();
  auto od = std::make_shared<TensorData>(out);
  return emit(std::move(out), {&a, &b}, [&]() -> Tape::BackwardFn {
    int na = a.tracked() ? a.node() : -1;
    int nb = b.tracked() ? b.node() : -1;
    return [=, bc = std::move(bc)](Tape& t, const std::vector<cx>& g) {
      std::vector<cx> ga(na >= 0 ? ad->numel() : 0, cx(0));
      std::vector<cx> gb(nb >= 0 ? bd->numel() : 0, cx(0));
      bc.for_each([&](int64_t o, int64_t ia, int64_t ib) {
        if (na >= 0) {
          auto [dz, dzb] = dfa(ad->v[ia], bd->v[ib], od->v[o]);
          ga[ia] += std::conj(g[o]) * dzb + g[o] * std::conj(dz);
        }
        if (nb >= 0) {
          auto [dz, dzb] = dfb(ad->v[ia], bd->v[ib], od->v[o]);
          gb[ib] += std::conj(g[o]) * dzb + g[o] * std::conj(dz);
        }
      });
      if (na >= 0) t.accumulate(na, ga);
      if (nb >= 0) t.accumulate(nb, gb);
    };
  });
}

// Unary elementwise op; df returns {dw/dz, dw/dzbar}.
template <class F, class DF>
CTensor unary_ew(const CTensor& a, F f, DF df) {
  if (a.numel() == 0) shape_error("op on empty tensor");
  TensorData out(a.shape(), std::vector<cx>(a.numel()));
  const auto& av = a.values();
  for (int64_t i = 0; i < a.numel(); ++i) out.v[i] = f(av[i]);
  auto ad = a.data();
  auto od = std::make_shared<TensorData>(out);
  return emit(std::move(out), {&a}, [&]() -> Tape::BackwardFn {
    int na = a.node();
    return [=](Tape& t, const std::vector<cx>& g) {
      std::vector<cx> ga(ad->numel());
      for (size_t i = 0; i < ga.size(); ++i) {
        auto [dz, dzb] = df(ad->v[i], od->v[i]);
        ga[i] = std::conj(g[i]) * dzb + g[i] * std::conj(dz);
      }
      t.accumulate(na, ga);
    };
  });
}

// Unary op acting on the real part only, producing a real output with
// derivative d(x); g_in = Re(g) * d(x).
template <class F, class DF>
CTensor unary_real(const CTensor& a, F f, DF df) {
  if (a.numel() == 0) shape_error("op on empty tensor");
  TensorData out(a.shape(), std::vector<cx>(a.numel()));
  const auto& av = a.values();
  for (int64_t i = 0; i < a.numel(); ++i) out.v[i] = cx(f(av[i].real()), 0.0);
  auto ad = a.data();
  return emit(std::move(out), {&a}, [&]() -> Tape::BackwardFn {
    int na = a.node();
    return [=](Tape& t, const std::vector<cx>& g) {
      std::vector<cx> ga(ad->numel());
      for (size_t i = 0; i < ga.size(); ++i)
        ga[i] = cx(g[i].real() * df(ad->v[i].real()), 0.0);
      t.accumulate(na, ga);
    };
  });
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

// ---- TensorData / CTensor / Tape ----------------------------------------

TensorData::TensorData(std::vector<int64_t> s, std::vector<cx> vals)
    : shape(std::move(s)), v(std::move(vals)) {
  if (numel() != static_cast<int64_t>(v.size()))
    shape_error("shape/data length mismatch");
}

TensorData TensorData::zeros(std::vector<int64_t> s) {
  int64_t n = shape_numel(s);
  return TensorData(std::move(s), std::vector<cx>(n, cx(0)));
}

TensorData TensorData::full(std::vector<int64_t> s, cx value) {
  int64_t n = shape_numel(s);
  return TensorData(std::move(s), std::vector<cx>(n, value));
}

int64_t TensorData::numel() const { return shape_numel(shape); }

int64_t TensorData::rows() const {
  return shape.size() >= 2 ? shape[shape.size() - 2] : 1;
}

int64_t TensorData::cols() const {
  return shape.empty() ? 1 : shape.back();
}

CTensor::CTensor(std::shared_ptr<const TensorData> d, Tape* tape, int node)
    : data_(std::move(d)), tape_(tape), node_(node) {}

CTensor CTensor::constant(TensorData d) {
  return CTensor(std::make_shared<const TensorData>(std::move(d)), nullptr, -1);
}

CTensor CTensor::scalar(cx value) {
  return constant(TensorData({1}, {value}));
}

cx CTensor::item() const {
  if (numel() != 1) shape_error("item() on non-scalar");
  return data_->v[0];
}

CTensor Tape::leaf(const TensorData& d) {
  auto data = std::make_shared<const TensorData>(d);
  nodes_.push_back(Node{{}, nullptr, d.numel(), d.shape});
  return CTensor(data, this, static_cast<int>(nodes_.size()) - 1);
}

CTensor Tape::track(std::shared_ptr<const TensorData> d,
                    std::vector<int> parents, BackwardFn fn) {
  nodes_.push_back(
      Node{std::move(parents), std::move(fn), d->numel(), d->shape});
  return CTensor(std::move(d), this, static_cast<int>(nodes_.size()) - 1);
}

void Tape::backward(const CTensor& loss) {
  if (!loss.tracked() || loss.tape() != this)
    throw std::invalid_argument("backward: loss is not recorded on this tape");
  if (loss.numel() != 1)
    throw std::invalid_argument("backward: loss must be scalar");
  if (std::abs(loss.item().imag()) > 1e-9 * (1.0 + std::abs(loss.item())))
    throw std::invalid_argument("backward: loss must be real");
  grads_.assign(nodes_.size(), {});
  grads_[loss.node()] = {cx(1.0, 0.0)};
  for (int i = loss.node(); i >= 0; --i) {
    if (grads_[i].empty()) continue;
    if (nodes_[i].back) {
      nodes_[i].back(*this, grads_[i]);
      grads_[i].clear();
      grads_[i].shrink_to_fit();
    }
    // leaves keep their gradient for retrieval
  }
}

bool Tape::has_grad(int node) const {
  return node >= 0 && node < static_cast<int>(grads_.size()) &&
         !grads_[node].empty();
}

const std::vector<cx>& Tape::grad(int node) const {
  static const std::vector<cx> empty;
  return has_grad(node) ? grads_[node] : empty;
}

TensorData Tape::grad_tensor(const CTensor& t) const {
  TensorData g = TensorData::zeros(t.shape());
  if (t.tracked() && has_grad(t.node())) g.v = grads_[t.node()];
  return g;
}

void Tape::accumulate(int node, const std::vector<cx>& g) {
  if (node < 0) return;
  auto& acc = grads_[node];
  if (acc.empty()) acc.assign(nodes_[node].numel, cx(0));
  if (acc.size() != g.size()) shape_error("gradient shape mismatch");
  for (size_t i = 0; i < g.size(); ++i) acc[i] += g[i];
}

// ---- arithmetic -----------------------------------------------------------

CTensor add(const CTensor& a, const CTensor& b) {
  return binary_ew(
      a, b, [](cx x, cx y) { return x + y; },
      [](cx, cx, cx) { return std::pair<cx, cx>{cx(1), cx(0)}; },
      [](cx, cx, cx) { return std::pair<cx, cx>{cx(1), cx(0)}; });
}

CTensor sub(const CTensor& a, const CTensor& b) {
  return binary_ew(
      a, b, [](cx x, cx y) { return x - y; },
      [](cx, cx, cx) { return std::pair<cx, cx>{cx(1), cx(0)}; },
      [](cx, cx, cx) { return std::pair<cx, cx>{cx(-1), cx(0)}; });
}

CTensor neg(const CTensor& a) { return scalar_mul(a, cx(-1)); }

CTensor mul(const CTensor& a, const CTensor& b) {
  return binary_ew(
      a, b, [](cx x, cx y) { return x * y; },
      [](cx, cx y, cx) { return std::pair<cx, cx>{y, cx(0)}; },
      [](cx x, cx, cx) { return std::pair<cx, cx>{x, cx(0)}; });
}

CTensor scalar_mul(const CTensor& a, cx c) {
  return unary_ew(
      a, [c](cx x) { return c * x; },
      [c](cx, cx) { return std::pair<cx, cx>{c, cx(0)}; });
}

CTensor matmul(const CTensor& a, const CTensor& b) {
  if (a.shape().size() != 2 || b.shape().size() != 2)
    shape_error("matmul expects rank-2 tensors");
  int64_t m = a.rows(), k = a.cols(), k2 = b.rows(), n = b.cols();
  if (k != k2) shape_error("matmul inner dimension mismatch");
  TensorData out = TensorData::zeros({m, n});
  CMapC A(a.values().data(), m, k), B(b.values().data(), k, n);
  MapC(out.v.data(), m, n) = A * B;
  auto ad = a.data();
  auto bd = b.data();
  return emit(std::move(out), {&a, &b}, [&]() -> Tape::BackwardFn {
    int na = a.tracked() ? a.node() : -1;
    int nb = b.tracked() ? b.node() : -1;
    return [=](Tape& t, const std::vector<cx>& g) {
      CMapC G(g.data(), m, n);
      CMapC A2(ad->v.data(), m, k), B2(bd->v.data(), k, n);
      if (na >= 0) {
        std::vector<cx> ga(m * k);
        MapC(ga.data(), m, k) = G * B2.adjoint();
        t.accumulate(na, ga);
      }
      if (nb >= 0) {
        std::vector<cx> gb(k * n);
        MapC(gb.data(), k, n) = A2.adjoint() * G;
        t.accumulate(nb, gb);
      }
    };
  });
}

CTensor conj(const CTensor& a) {
  return unary_ew(
      a, [](cx x) { return std::conj(x); },
      [](cx, cx) { return std::pair<cx, cx>{cx(0), cx(1)}; });
}

CTensor transpose(const CTensor& a) {
  if (a.shape().size() != 2) shape_error("transpose expects rank-2");
  int64_t m = a.rows(), n = a.cols();
  TensorData out = TensorData::zeros({n, m});
  for (int64_t i = 0; i < m; ++i)
    for (int64_t j = 0; j < n; ++j) out.v[j * m + i] = a.values()[i * n + j];
  return emit(std::move(out), {&a}, [&]() -> Tape::BackwardFn {
    int na = a.node();
    return [=](Tape& t, const std::vector<cx>& g) {
      std::vector<cx> ga(m * n);
      for (int64_t i = 0; i < m; ++i)
        for (int64_t j = 0; j < n; ++j) ga[i * n + j] = g[j * m + i];
      t.accumulate(na, ga);
    };
  });
}

CTensor hermitian(const CTensor& a) { return conj(transpose(a)); }

CTensor reshape(const CTensor& a, std::vector<int64_t> shape) {
  if (shape_numel(shape) != a.numel()) shape_error("reshape numel mismatch");
  TensorData out(shape, a.values());
  return emit(std::move(out), {&a}, [&]() -> Tape::BackwardFn {
    int na = a.node();
    return [=](Tape& t, const std::vector<cx>& g) { t.accumulate(na, g); };
  });
}

CTensor concat(const std::vector<CTensor>& parts, int axis) {
  if (parts.empty()) shape_error("concat of nothing");
  if (parts.size() == 1) return parts[0];
  for (const auto& p : parts)
    if (p.shape().size() != 2) shape_error("concat expects rank-2 parts");
  int64_t m = parts[0].rows(), n = parts[0].cols();
  int64_t total = 0;
  for (const auto& p : parts) {
    if (axis == 0 && p.cols() != n) shape_error("concat col mismatch");
    if (axis == 1 && p.rows() != m) shape_error("concat row mismatch");
    total += axis == 0 ? p.rows() : p.cols();
  }
  int64_t om = axis == 0 ? total : m;
  int64_t on = axis == 0 ? n : total;
  TensorData out = TensorData::zeros({om, on});
  std::vector<int64_t> offsets;
  int64_t off = 0;
  for (const auto& p : parts) {
    offsets.push_back(off);
    for (int64_t i = 0; i < p.rows(); ++i)
      for (int64_t j = 0; j < p.cols(); ++j) {
        int64_t oi = axis == 0 ? off + i : i;
        int64_t oj = axis == 0 ? j : off + j;
        out.v[oi * on + oj] = p.values()[i * p.cols() + j];
      }
    off += axis == 0 ? p.rows() : p.cols();
  }
  Tape* tape = nullptr;
  for (const auto& p : parts)
    if (p.tracked()) tape = p.tape();
  auto data = std::make_shared<const TensorData>(std::move(out));
  if (!tape) return CTensor(data, nullptr, -1);
  std::vector<int> parent_nodes;
  struct Piece {
    int node;
    int64_t off, rows, cols;
  };
  std::vector<Piece> pieces;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (!parts[i].tracked()) continue;
    parent_nodes.push_back(parts[i].node());
    pieces.push_back(
        Piece{parts[i].node(), offsets[i], parts[i].rows(), parts[i].cols()});
  }
  return tape->track(
      data, parent_nodes,
      [pieces, axis, on](Tape& t, const std::vector<cx>& g) {
        for (const auto& pc : pieces) {
          std::vector<cx> gp(pc.rows * pc.cols);
          for (int64_t i = 0; i < pc.rows; ++i)
            for (int64_t j = 0; j < pc.cols; ++j) {
              int64_t oi = axis == 0 ? pc.off + i : i;
              int64_t oj = axis == 0 ? j : pc.off + j;
              gp[i * pc.cols + j] = g[oi * on + oj];
            }
          t.accumulate(pc.node, gp);
        }
      });
}

CTensor slice_rows(const CTensor& a, int64_t i0, int64_t n) {
  if (a.shape().size() > 2) shape_error("slice expects rank <= 2");
  int64_t m = a.rows(), c = a.cols();
  bool vec = a.shape().size() < 2;
  if (vec) {
    m = a.cols();
    c = 1;
  }
  if (i0 < 0 || i0 + n > m) shape_error("slice out of range");
  TensorData out =
      vec ? TensorData::zeros({n}) : TensorData::zeros({n, c});
  for (int64_t i = 0; i < n * c; ++i) out.v[i] = a.values()[i0 * c + i];
  return emit(std::move(out), {&a}, [&]() -> Tape::BackwardFn {
    int na = a.node();
    int64_t total = m * c;
    return [=](Tape& t, const std::vector<cx>& g) {
      std::vector<cx> ga(total, cx(0));
      for (int64_t i = 0; i < n * c; ++i) ga[i0 * c + i] = g[i];
      t.accumulate(na, ga);
    };
  });
}

CTensor slice_cols(const CTensor& a, int64_t j0, int64_t n) {
  if (a.shape().size() != 2) shape_error("slice_cols expects rank-2");
  int64_t m = a.rows(), c = a.cols();
  if (j0 < 0 || j0 + n > c) shape_error("slice out of range");
  TensorData out = TensorData::zeros({m, n});
  for (int64_t i = 0; i < m; ++i)
    for (int64_t j = 0; j < n; ++j) out.v[i * n + j] = a.values()[i * c + j0 + j];
  return emit(std::move(out), {&a}, [&]() -> Tape::BackwardFn {
    int na = a.node();
    return [=](Tape& t, const std::vector<cx>& g) {
      std::vector<cx> ga(m * c, cx(0));
      for (int64_t i = 0; i < m; ++i)
        for (int64_t j = 0; j < n; ++j) ga[i * c + j0 + j] = g[i * n + j];
      t.accumulate(na, ga);
    };
  });
}

CTensor sum(const CTensor& a) {
  cx s(0);
  for (cx x : a.values()) s += x;
  TensorData out({1}, {s});
  return emit(std::move(out), {&a}, [&]() -> Tape::BackwardFn {
    int na = a.node();
    int64_t n = a.numel();
    return [=](Tape& t, const std::vector<cx>& g) {
      t.accumulate(na, std::vector<cx>(n, g[0]));
    };
  });
}

CTensor mean(const CTensor& a) {
  return scalar_mul(sum(a), cx(1.0 / static_cast<double>(a.numel())));
}

CTensor sum_axis(const CTensor& a, int axis) {
  if (a.shape().size() != 2) shape_error("sum_axis expects rank-2");
  int64_t m = a.rows(), n = a.cols();
  int64_t om = axis == 0 ? 1 : m, on = axis == 0 ? n : 1;
  TensorData out = TensorData::zeros({om, on});
  for (int64_t i = 0; i < m; ++i)
    for (int64_t j = 0; j < n; ++j)
      out.v[axis == 0 ? j : i] += a.values()[i * n + j];
  return emit(std::move(out), {&a}, [&]() -> Tape::BackwardFn {
    int na = a.node();
    return [=](Tape& t, const std::vector<cx>& g) {
      std::vector<cx> ga(m * n);
      for (int64_t i = 0; i < m; ++i)
        for (int64_t j = 0; j < n; ++j) ga[i * n + j] = g[axis == 0 ? j : i];
      t.accumulate(na, ga);
    };
  });
}

CTensor mean_axis(const CTensor& a, int axis) {
  int64_t d = axis == 0 ? a.rows() : a.cols();
  return scalar_mul(sum_axis(a, axis), cx(1.0 / static_cast<double>(d)));
}

CTensor cumsum(const CTensor& a) {
  int64_t n = a.numel();
  TensorData out(a.shape(), std::vector<cx>(n));
  cx acc(0);
  for (int64_t i = 0; i < n; ++i) out.v[i] = (acc += a.values()[i]);
  return emit(std::move(out), {&a}, [&]() -> Tape::BackwardFn {
    int na = a.node();
    return [=](Tape& t, const std::vector<cx>& g) {
      std::vector<cx> ga(n);
      cx acc2(0);
      for (int64_t i = n; i-- > 0;) ga[i] = (acc2 += g[i]);
      t.accumulate(na, ga);
    };
  });
}

// ---- non-holomorphic ------------------------------------------------------

CTensor modulus(const CTensor& a) {
  return unary_ew(
      a, [](cx x) { return cx(std::abs(x), 0); },
      [](cx x, cx w) {
        double r = w.real();
        if (r == 0.0) return std::pair<cx, cx>{cx(0), cx(0)};
        return std::pair<cx, cx>{std::conj(x) / (2 * r), x / (2 * r)};
      });
}

CTensor modulus_sq(const CTensor& a) {
  return unary_ew(
      a, [](cx x) { return cx(std::norm(x), 0); },
      [](cx x, cx) { return std::pair<cx, cx>{std::conj(x), x}; });
}

CTensor real_part(const CTensor& a) {
  return unary_ew(
      a, [](cx x) { return cx(x.real(), 0); },
      [](cx, cx) { return std::pair<cx, cx>{cx(0.5), cx(0.5)}; });
}

CTensor imag_part(const CTensor& a) {
  return unary_ew(
      a, [](cx x) { return cx(x.imag(), 0); },
      [](cx, cx) {
        return std::pair<cx, cx>{cx(0, -0.5), cx(0, 0.5)};
      });
}

CTensor cexp(const CTensor& a) {
  return unary_ew(
      a, [](cx x) { return std::exp(x); },
      [](cx, cx w) { return std::pair<cx, cx>{w, cx(0)}; });
}

CTensor clog(const CTensor& a) {
  return unary_ew(
      a, [](cx x) { return std::log(x); },
      [](cx x, cx) { return std::pair<cx, cx>{cx(1) / x, cx(0)}; });
}

CTensor reciprocal(const CTensor& a) {
  return unary_ew(
      a, [](cx x) { return cx(1) / x; },
      [](cx, cx w) { return std::pair<cx, cx>{-w * w, cx(0)}; });
}

CTensor csqrt(const CTensor& a) {
  return unary_ew(
      a, [](cx x) { return std::sqrt(x); },
      [](cx, cx w) { return std::pair<cx, cx>{cx(0.5) / w, cx(0)}; });
}

CTensor pow_const(const CTensor& a, double p) {
  return unary_real(
      a, [p](double x) { return std::pow(x, p); },
      [p](double x) { return p * std::pow(x, p - 1.0); });
}

CTensor sigmoid_re(const CTensor& a) {
  return unary_real(a, sigmoid, [](double x) {
    double s = sigmoid(x);
    return s * (1.0 - s);
  });
}

CTensor tanh_re(const CTensor& a) {
  return unary_real(
      a, [](double x) { return std::tanh(x); },
      [](double x) {
        double t = std::tanh(x);
        return 1.0 - t * t;
      });
}

CTensor leaky_relu_re(const CTensor& a, double slope) {
  return unary_real(
      a, [slope](double x) { return x >= 0 ? x : slope * x; },
      [slope](double x) { return x >= 0 ? 1.0 : slope; });
}

CTensor crelu(const CTensor& a) {
  if (a.numel() == 0) shape_error("op on empty tensor");
  TensorData out(a.shape(), std::vector<cx>(a.numel()));
  const auto& av = a.values();
  for (int64_t i = 0; i < a.numel(); ++i)
    out.v[i] = cx(std::max(av[i].real(), 0.0), std::max(av[i].imag(), 0.0));
  auto ad = a.data();
  return emit(std::move(out), {&a}, [&]() -> Tape::BackwardFn {
    int na = a.node();
    return [=](Tape& t, const std::vector<cx>& g) {
      std::vector<cx> ga(ad->numel());
      for (size_t i = 0; i < ga.size(); ++i)
        ga[i] = cx(ad->v[i].real() > 0 ? g[i].real() : 0.0,
                   ad->v[i].imag() > 0 ? g[i].imag() : 0.0);
      t.accumulate(na, ga);
    };
  });
}

CTensor softmax_re(const CTensor& a, int axis) {
  if (a.shape().size() > 2) shape_error("softmax expects rank <= 2");
  int64_t m = a.rows(), n = a.cols();
  if (a.shape().size() < 2) {
    m = 1;
    n = a.numel();
    axis = 1;
  }
  int64_t groups = axis == 0 ? n : m;
  int64_t glen = axis == 0 ? m : n;
  auto at = [axis, n](int64_t grp, int64_t i) {
    return axis == 0 ? i * n + grp : grp * n + i;
  };
  TensorData out(a.shape(), std::vector<cx>(a.numel()));
  const auto& av = a.values();
  for (int64_t grp = 0; grp < groups; ++grp) {
    double mx = -HUGE_VAL;
    for (int64_t i = 0; i < glen; ++i)
      mx = std::max(mx, av[at(grp, i)].real());
    double z = 0;
    for (int64_t i = 0; i < glen; ++i)
      z += std::exp(av[at(grp, i)].real() - mx);
    for (int64_t i = 0; i < glen; ++i)
      out.v[at(grp, i)] = cx(std::exp(av[at(grp, i)].real() - mx) / z, 0);
  }
  auto od = std::make_shared<TensorData>(out);
  return emit(std::move(out), {&a}, [&]() -> Tape::BackwardFn {
    int na = a.node();
    return [=](Tape& t, const std::vector<cx>& g) {
      std::vector<cx> ga(od->numel(), cx(0));
      for (int64_t grp = 0; grp < groups; ++grp) {
        double dot = 0;
        for (int64_t i = 0; i < glen; ++i)
          dot += g[at(grp, i)].real() * od->v[at(grp, i)].real();
        for (int64_t i = 0; i < glen; ++i) {
          double p = od->v[at(grp, i)].real();
          ga[at(grp, i)] = cx(p * (g[at(grp, i)].real() - dot), 0);
        }
      }
      t.accumulate(na, ga);
    };
  });
}

CTensor cos_re(const CTensor& a) {
  return unary_real(
      a, [](double x) { return std::cos(x); },
      [](double x) { return -std::sin(x); });
}

CTensor sin_re(const CTensor& a) {
  return unary_real(
      a, [](double x) { return std::sin(x); },
      [](double x) { return std::cos(x); });
}

CTensor atan2_re(const CTensor& y, const CTensor& x) {
  auto re = [](cx v) { return v.real(); };
  return binary_ew(
      y, x,
      [&](cx a, cx b) { return cx(std::atan2(a.real(), b.real()), 0); },
      [re](cx a, cx b, cx) {
        double r2 = re(a) * re(a) + re(b) * re(b);
        double d = r2 > 0 ? re(b) / r2 : 0.0;
        return std::pair<cx, cx>{cx(d / 2), cx(d / 2)};
      },
      [re](cx a, cx b, cx) {
        double r2 = re(a) * re(a) + re(b) * re(b);
        double d = r2 > 0 ? -re(a) / r2 : 0.0;
        return std::pair<cx, cx>{cx(d / 2), cx(d / 2)};
      });
}

CTensor wrap_two_pi(const CTensor& a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  return unary_real(
      a,
      [](double x) {
        double w = std::fmod(x, two_pi);
        if (w < 0) w += two_pi;
        return w;
      },
      [](double) { return 1.0; });
}

CTensor clamp_re(const CTensor& a, double lo, double hi) {
  return unary_real(
      a, [lo, hi](double x) { return std::clamp(x, lo, hi); },
      [lo, hi](double x) { return (x > lo && x < hi) ? 1.0 : 0.0; });
}

CTensor norm(const CTensor& a) { return csqrt(sum(modulus_sq(a))); }

CTensor inverse(const CTensor& a) {
  if (a.shape().size() != 2 || a.rows() != a.cols())
    shape_error("inverse expects a square matrix");
  int64_t n = a.rows();
  TensorData out = TensorData::zeros({n, n});
  CMapC A(a.values().data(), n, n);
  MatC Y = A.partialPivLu().inverse();
  MapC(out.v.data(), n, n) = Y;
  auto od = std::make_shared<TensorData>(out);
  return emit(std::move(out), {&a}, [&]() -> Tape::BackwardFn {
    int na = a.node();
    return [=](Tape& t, const std::vector<cx>& g) {
      CMapC G(g.data(), n, n), Yv(od->v.data(), n, n);
      std::vector<cx> ga(n * n);
      MapC(ga.data(), n, n) = -(Yv.adjoint() * G * Yv.adjoint());
      t.accumulate(na, ga);
    };
  });
}

CTensor block_diag(const CTensor& a) {
  if (a.shape().size() != 2) shape_error("block_diag expects rank-2");
  int64_t n = a.rows(), m = a.cols();
  TensorData out = TensorData::zeros({n * m, n});
  for (int64_t i = 0; i < n; ++i)
    for (int64_t j = 0; j < m; ++j)
      out.v[(i * m + j) * n + i] = a.values()[i * m + j];
  return emit(std::move(out), {&a}, [&]() -> Tape::BackwardFn {
    int na = a.node();
    return [=](Tape& t, const std::vector<cx>& g) {
      std::vector<cx> ga(n * m);
      for (int64_t i = 0; i < n; ++i)
        for (int64_t j = 0; j < m; ++j) ga[i * m + j] = g[(i * m + j) * n + i];
      t.accumulate(na, ga);
    };
  });
}

// ---- grad_check -----------------------------------------------------------

double grad_check(
    const std::function<double(const std::vector<TensorData>&)>& value_fn,
    const std::function<std::vector<TensorData>(
        const std::vector<TensorData>&)>& grad_fn,
    std::vector<TensorData> params,
    const std::vector<std::vector<int64_t>>& indices, double eps) {
  std::vector<TensorData> analytic = grad_fn(params);
  double gmax = 0;
  for (const auto& g : analytic)
    for (cx v : g.v) gmax = std::max({gmax, std::abs(v.real()), std::abs(v.imag())});
  double worst = 0;
  for (size_t p = 0; p < params.size(); ++p) {
    std::vector<int64_t> idx;
    if (p < indices.size() && !indices[p].empty()) {
      idx = indices[p];
    } else {
      idx.resize(params[p].numel());
      for (int64_t i = 0; i < params[p].numel(); ++i) idx[i] = i;
    }
    for (int64_t i : idx) {
      for (int part = 0; part < 2; ++part) {
        cx orig = params[p].v[i];
        cx delta = part == 0 ? cx(eps, 0) : cx(0, eps);
        params[p].v[i] = orig + delta;
        double fp = value_fn(params);
        params[p].v[i] = orig - delta;
        double fm = value_fn(params);
        params[p].v[i] = orig;
        double fd = (fp - fm) / (2 * eps);
        double an = part == 0 ? analytic[p].v[i].real() : analytic[p].v[i].imag();
        double denom = std::max({std::abs(an), std::abs(fd), 0.01 * gmax, 1e-12});
        worst = std::max(worst, std::abs(an - fd) / denom);
      }
    }
  }
  return worst;
}

}  // namespace pagnn
