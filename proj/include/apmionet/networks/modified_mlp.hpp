#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "apmionet/diffcore/hyper.hpp"
#include "apmionet/diffcore/layout.hpp"

namespace apmionet {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<const RowMat>;
using MutMatMap = Eigen::Map<RowMat>;
using VecMap = Eigen::Map<const Eigen::RowVectorXd>;

/// Layer sizes [m0, m1, ..., m1, out] of a modified MLP and the offsets of
/// every weight block inside a flat parameter array.
///
/// Flat order: W1, b1, W2, b2, Wz[0] (m0 x m1), bz[0], then Wz[k] (m1 x m1),
/// bz[k] for each gated layer, then the output layer. Matrices are row-major.
class MlpShape {
 public:
  MlpShape() = default;
  /// Needs at least one hidden layer; all hidden widths must agree.
  explicit MlpShape(std::vector<int> sizes);

  const std::vector<int>& sizes() const { return sizes_; }
  int in() const { return sizes_.front(); }
  int out() const { return sizes_.back(); }
  int width() const { return sizes_[1]; }
  /// K: the number of hidden layers H1..HK.
  int n_hidden() const { return static_cast<int>(sizes_.size()) - 2; }
  std::size_t n_params() const { return n_params_; }

  std::size_t off_W1() const { return 0; }
  std::size_t off_b1() const { return off_W1() + in() * width(); }
  std::size_t off_W2() const { return off_b1() + width(); }
  std::size_t off_b2() const { return off_W2() + in() * width(); }
  /// Layer k = 0 is the input layer, 1..K-1 gated layers, K the output layer.
  std::size_t off_Wz(int k) const { return layer_off_[static_cast<std::size_t>(k)]; }
  std::size_t off_bz(int k) const { return off_Wz(k) + static_cast<std::size_t>(rows(k) * cols(k)); }
  int rows(int k) const { return k == 0 ? in() : width(); }
  int cols(int k) const { return k == n_hidden() ? out() : width(); }

  bool operator==(const MlpShape& o) const { return sizes_ == o.sizes_; }

 private:
  std::vector<int> sizes_;
  std::vector<std::size_t> layer_off_;
  std::size_t n_params_ = 0;
};

/// Owning parameter set of one modified MLP.
struct ModifiedMlpParams {
  MlpShape shape;
  std::vector<double> values;

  MatMap W1() const { return {values.data() + shape.off_W1(), shape.in(), shape.width()}; }
  VecMap b1() const { return {values.data() + shape.off_b1(), shape.width()}; }
  MatMap W2() const { return {values.data() + shape.off_W2(), shape.in(), shape.width()}; }
  VecMap b2() const { return {values.data() + shape.off_b2(), shape.width()}; }
  MatMap Wz(int k) const { return {values.data() + shape.off_Wz(k), shape.rows(k), shape.cols(k)}; }
  VecMap bz(int k) const { return {values.data() + shape.off_bz(k), shape.cols(k)}; }
};

/// Glorot-normal weights, zero biases, fully determined by the seed.
void glorot_fill(const MlpShape& shape, std::uint64_t seed, std::span<double> out);
ModifiedMlpParams glorot_init(std::uint64_t seed, const std::vector<int>& sizes);

/// Reference evaluation on individual hyper-dual scalars (any T).
template <class T>
std::vector<Hyper<T>> modified_mlp_forward(const MlpShape& shape, std::span<const double> w,
                                           const std::vector<Hyper<T>>& input);

template <class T>
std::vector<Hyper<T>> modified_mlp_forward(const ModifiedMlpParams& p, const std::vector<Hyper<T>>& input) {
  return modified_mlp_forward<T>(p.shape, p.values, input);
}

/// Batched evaluation over B points whose derivative components are stacked
/// vertically: rows [c*B, (c+1)*B) hold component c of the layout.
class MlpBatch {
 public:
  MlpBatch(const MlpShape& shape, const Layout& layout, int batch);

  /// X: (C*B) x m0. Keeps the intermediates needed by backward().
  const RowMat& forward(std::span<const double> w, const RowMat& X);
  const RowMat& output() const { return Y_; }

  /// Accumulates d(sum Ybar . Y)/dw into gw. Inputs are treated as constants.
  void backward(std::span<const double> w, const RowMat& Ybar, std::span<double> gw) const;

  int batch() const { return B_; }
  int components() const { return C_; }

 private:
  const MlpShape* shape_;
  Layout layout_;
  int B_;
  int C_;
  RowMat X_, aU_, U_, aV_, V_, aH0_, Y_;
  std::vector<RowMat> aZ_, Z_, H_;
};

namespace batch_ops {

/// s = swish(a) on stacked hyper-dual components.
void activate(const Layout& L, int B, const RowMat& a, RowMat& s);
/// Adjoint of activate: abar from sbar.
void activate_backward(const Layout& L, int B, const RowMat& a, const RowMat& sbar, RowMat& abar);
/// Hyper-dual elementwise product P = A * D.
void product(const Layout& L, int B, const RowMat& A, const RowMat& D, RowMat& P);
/// Adjoint of product with respect to A, given D and Pbar (symmetric in the roles).
void product_backward(const Layout& L, int B, const RowMat& D, const RowMat& Pbar, RowMat& Abar);

}  // namespace batch_ops

}  // namespace apmionet
