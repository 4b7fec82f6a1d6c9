#pragma once

// Complex-valued reverse-mode differentiation on a tape of recorded ops.
//
// Gradients follow the real-pair convention: for a real scalar loss L and a
// complex value z = x + iy, the gradient stored for z is dL/dx + i*dL/dy
// (equivalently 2*dL/d(conj z)).  Real and imaginary parts can therefore be
// optimized as independent real coordinates, and finite differences on x and
// y match the stored gradient componentwise.

#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace pagnn {

using cx = std::complex<double>;

struct TensorData {
  std::vector<int64_t> shape;
  std::vector<cx> v;

  TensorData() = default;
  TensorData(std::vector<int64_t> s, std::vector<cx> vals);
  static TensorData zeros(std::vector<int64_t> s);
  static TensorData full(std::vector<int64_t> s, cx value);

  int64_t numel() const;
  int64_t rows() const;  // 1 for rank < 2
  int64_t cols() const;  // last dimension
};

class Tape;

// Value-semantic handle to a tensor, optionally tracked on a tape.
class CTensor {
 public:
  CTensor() = default;
  CTensor(std::shared_ptr<const TensorData> d, Tape* tape, int node);

  static CTensor constant(TensorData d);
  static CTensor scalar(cx value);

  bool valid() const { return data_ != nullptr; }
  bool tracked() const { return tape_ != nullptr; }
  const std::vector<int64_t>& shape() const { return data_->shape; }
  int64_t numel() const { return data_->numel(); }
  int64_t rows() const { return data_->rows(); }
  int64_t cols() const { return data_->cols(); }
  const std::vector<cx>& values() const { return data_->v; }
  cx item() const;
  const std::shared_ptr<const TensorData>& data() const { return data_; }
  Tape* tape() const { return tape_; }
  int node() const { return node_; }

 private:
  std::shared_ptr<const TensorData> data_;
  Tape* tape_ = nullptr;
  int node_ = -1;
};

// Records operations in execution order; creation order is a topological
// order, so backward is a single reverse sweep.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, const std::vector<cx>&)>;

  CTensor leaf(const TensorData& d);
  CTensor track(std::shared_ptr<const TensorData> d, std::vector<int> parents,
                BackwardFn fn);

  // Seeds the (real scalar) loss with 1 and sweeps the tape once.
  void backward(const CTensor& loss);

  bool has_grad(int node) const;
  const std::vector<cx>& grad(int node) const;
  TensorData grad_tensor(const CTensor& t) const;

  void accumulate(int node, const std::vector<cx>& g);
  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    std::vector<int> parents;
    BackwardFn back;  // empty for leaves
    int64_t numel = 0;
    std::vector<int64_t> shape;
  };
  std::vector<Node> nodes_;
  std::vector<std::vector<cx>> grads_;
};

// ---- ops ----------------------------------------------------------------

CTensor add(const CTensor& a, const CTensor& b);
CTensor sub(const CTensor& a, const CTensor& b);
CTensor neg(const CTensor& a);
CTensor mul(const CTensor& a, const CTensor& b);  // elementwise, broadcasting
CTensor scalar_mul(const CTensor& a, cx c);
CTensor matmul(const CTensor& a, const CTensor& b);
CTensor conj(const CTensor& a);
CTensor transpose(const CTensor& a);
CTensor hermitian(const CTensor& a);
CTensor reshape(const CTensor& a, std::vector<int64_t> shape);
CTensor concat(const std::vector<CTensor>& parts, int axis);
CTensor slice_rows(const CTensor& a, int64_t i0, int64_t n);
CTensor slice_cols(const CTensor& a, int64_t j0, int64_t n);
CTensor sum(const CTensor& a);
CTensor mean(const CTensor& a);
CTensor sum_axis(const CTensor& a, int axis);   // rank-2 only, keeps dim
CTensor mean_axis(const CTensor& a, int axis);
CTensor cumsum(const CTensor& a);               // over the flattened tensor
CTensor modulus(const CTensor& a);
CTensor modulus_sq(const CTensor& a);
CTensor real_part(const CTensor& a);
CTensor imag_part(const CTensor& a);
CTensor cexp(const CTensor& a);
CTensor clog(const CTensor& a);                 // principal branch
CTensor reciprocal(const CTensor& a);
CTensor csqrt(const CTensor& a);
CTensor pow_const(const CTensor& a, double p);  // real inputs
CTensor sigmoid_re(const CTensor& a);
CTensor tanh_re(const CTensor& a);
CTensor leaky_relu_re(const CTensor& a, double slope = 0.01);
CTensor crelu(const CTensor& a);                // split ReLU on re/im parts
CTensor softmax_re(const CTensor& a, int axis);
CTensor cos_re(const CTensor& a);
CTensor sin_re(const CTensor& a);
CTensor atan2_re(const CTensor& y, const CTensor& x);
CTensor wrap_two_pi(const CTensor& a);          // Re into [0, 2*pi), grad 1
CTensor clamp_re(const CTensor& a, double lo, double hi);
CTensor norm(const CTensor& a);                 // Euclidean, real scalar
CTensor inverse(const CTensor& a);              // square complex matrix
// Lays an (N x M) tensor into the (N*M x N) block-diagonal pinching layout:
// out[n*M + m, n] = in[n, m].
CTensor block_diag(const CTensor& a);

// grad_check support: max relative error between analytic gradients and
// central differences on real/imag parts.  `f` maps the parameter list to a
// real scalar; `indices[i]` selects which flat entries of params[i] to probe
// (empty = all entries).
double grad_check(
    const std::function<double(const std::vector<TensorData>&)>& value_fn,
    const std::function<std::vector<TensorData>(
        const std::vector<TensorData>&)>& grad_fn,
    std::vector<TensorData> params,
    const std::vector<std::vector<int64_t>>& indices, double eps = 1e-6);

}  // namespace pagnn
