#include "apmionet/networks/modified_mlp.hpp"

#include <random>
#include <stdexcept>
#include <string>

namespace apmionet {

MlpShape::MlpShape(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 3) throw std::invalid_argument("modified MLP needs at least one hidden layer");
  for (int s : sizes_) {
    if (s < 1) throw std::invalid_argument("layer sizes must be >= 1");
  }
  for (std::size_t k = 2; k + 1 < sizes_.size(); ++k) {
    if (sizes_[k] != sizes_[1]) throw std::invalid_argument("hidden widths of a modified MLP must agree");
  }
  std::size_t off = 2 * static_cast<std::size_t>(in() * width() + width());
  layer_off_.resize(static_cast<std::size_t>(n_hidden()) + 1);
  for (int k = 0; k <= n_hidden(); ++k) {
    layer_off_[static_cast<std::size_t>(k)] = off;
    off += static_cast<std::size_t>(rows(k) * cols(k) + cols(k));
  }
  n_params_ = off;
}

void glorot_fill(const MlpShape& shape, std::uint64_t seed, std::span<double> out) {
  if (out.size() != shape.n_params()) throw std::invalid_argument("glorot_fill: size mismatch");
  std::mt19937_64 rng(seed);
  std::fill(out.begin(), out.end(), 0.0);
  auto fill = [&](std::size_t off, int fan_in, int fan_out) {
    std::normal_distribution<double> N(0.0, std::sqrt(2.0 / (fan_in + fan_out)));
    for (std::size_t i = 0; i < static_cast<std::size_t>(fan_in * fan_out); ++i) out[off + i] = N(rng);
  };
  fill(shape.off_W1(), shape.in(), shape.width());
  fill(shape.off_W2(), shape.in(), shape.width());
  for (int k = 0; k <= shape.n_hidden(); ++k) fill(shape.off_Wz(k), shape.rows(k), shape.cols(k));
}

ModifiedMlpParams glorot_init(std::uint64_t seed, const std::vector<int>& sizes) {
  ModifiedMlpParams p{MlpShape(sizes), {}};
  p.values.resize(p.shape.n_params());
  glorot_fill(p.shape, seed, p.values);
  return p;
}

template <class T>
std::vector<Hyper<T>> modified_mlp_forward(const MlpShape& shape, std::span<const double> w,
                                           const std::vector<Hyper<T>>& input) {
  if (static_cast<int>(input.size()) != shape.in()) {
    throw std::invalid_argument("modified_mlp_forward: input length " + std::to_string(input.size()) +
                                " != " + std::to_string(shape.in()));
  }
  if (w.size() != shape.n_params()) throw std::invalid_argument("modified_mlp_forward: parameter size mismatch");
  using H = Hyper<T>;
  auto affine = [&](const std::vector<H>& x, std::size_t offW, std::size_t offb, int rows, int cols) {
    std::vector<H> z(static_cast<std::size_t>(cols));
    for (int j = 0; j < cols; ++j) {
      H acc(w[offb + static_cast<std::size_t>(j)]);
      for (int i = 0; i < rows; ++i) acc += x[static_cast<std::size_t>(i)] * w[offW + static_cast<std::size_t>(i * cols + j)];
      z[static_cast<std::size_t>(j)] = acc;
    }
    return z;
  };
  auto act = [](std::vector<H> z) {
    for (auto& e : z) e = swish(e);
    return z;
  };
  const int m = shape.width();
  const auto U = act(affine(input, shape.off_W1(), shape.off_b1(), shape.in(), m));
  const auto V = act(affine(input, shape.off_W2(), shape.off_b2(), shape.in(), m));
  auto Hk = act(affine(input, shape.off_Wz(0), shape.off_bz(0), shape.in(), m));
  for (int k = 1; k < shape.n_hidden(); ++k) {
    const auto Z = act(affine(Hk, shape.off_Wz(k), shape.off_bz(k), m, m));
    for (std::size_t j = 0; j < Hk.size(); ++j) Hk[j] = (1.0 - Z[j]) * U[j] + Z[j] * V[j];
  }
  const int K = shape.n_hidden();
  return affine(Hk, shape.off_Wz(K), shape.off_bz(K), m, shape.out());
}

template std::vector<Hyper<double>> modified_mlp_forward(const MlpShape&, std::span<const double>,
                                                         const std::vector<Hyper<double>>&);
template std::vector<Hyper<Var>> modified_mlp_forward(const MlpShape&, std::span<const double>,
                                                      const std::vector<Hyper<Var>>&);

namespace batch_ops {

void activate(const Layout& L, int B, const RowMat& a, RowMat& s) {
  s.resize(a.rows(), a.cols());
  const auto a0 = a.topRows(B).array();
  const Eigen::ArrayXXd sig = (1.0 + (-a0).exp()).inverse();
  s.topRows(B) = a0 * sig;
  if (L.is_constant()) return;
  const Eigen::ArrayXXd q = sig * (1.0 - sig);
  const Eigen::ArrayXXd d1 = sig + a0 * q;
  for (int i = 0; i < L.n_first(); ++i) {
    s.middleRows((1 + i) * B, B) = d1 * a.middleRows((1 + i) * B, B).array();
  }
  if (L.n_second() == 0) return;
  const Eigen::ArrayXXd d2 = 2.0 * q + a0 * q * (1.0 - 2.0 * sig);
  for (int k = 0; k < L.n_second(); ++k) {
    const int c = 1 + L.n_first() + k;
    const auto ai = a.middleRows((1 + L.second_base(k)) * B, B).array();
    s.middleRows(c * B, B) = d1 * a.middleRows(c * B, B).array() + d2 * ai.square();
  }
}

void activate_backward(const Layout& L, int B, const RowMat& a, const RowMat& sbar, RowMat& abar) {
  abar.resize(a.rows(), a.cols());
  const auto a0 = a.topRows(B).array();
  const Eigen::ArrayXXd sig = (1.0 + (-a0).exp()).inverse();
  const Eigen::ArrayXXd q = sig * (1.0 - sig);
  const Eigen::ArrayXXd d1 = sig + a0 * q;
  abar.topRows(B) = d1 * sbar.topRows(B).array();
  if (L.is_constant()) return;
  Eigen::ArrayXXd d2, d3;
  if (L.n_first() > 0) {
    const Eigen::ArrayXXd mm = 1.0 - 2.0 * sig;
    d2 = 2.0 * q + a0 * q * mm;
    if (L.n_second() > 0) d3 = 3.0 * q * mm + a0 * q * (mm.square() - 2.0 * q);
  }
  for (int i = 0; i < L.n_first(); ++i) {
    const auto ai = a.middleRows((1 + i) * B, B).array();
    const auto sbi = sbar.middleRows((1 + i) * B, B).array();
    abar.topRows(B).array() += d2 * ai * sbi;
    abar.middleRows((1 + i) * B, B) = d1 * sbi;
  }
  for (int k = 0; k < L.n_second(); ++k) {
    const int c = 1 + L.n_first() + k;
    const int ci = 1 + L.second_base(k);
    const auto ai = a.middleRows(ci * B, B).array();
    const auto akk = a.middleRows(c * B, B).array();
    const auto sbk = sbar.middleRows(c * B, B).array();
    abar.topRows(B).array() += (d3 * ai.square() + d2 * akk) * sbk;
    abar.middleRows(ci * B, B).array() += 2.0 * d2 * ai * sbk;
    abar.middleRows(c * B, B) = d1 * sbk;
  }
}

void product(const Layout& L, int B, const RowMat& A, const RowMat& D, RowMat& P) {
  P.resize(A.rows(), A.cols());
  const auto A0 = A.topRows(B).array();
  const auto D0 = D.topRows(B).array();
  P.topRows(B) = A0 * D0;
  for (int i = 0; i < L.n_first(); ++i) {
    const int r = (1 + i) * B;
    P.middleRows(r, B) = A.middleRows(r, B).array() * D0 + A0 * D.middleRows(r, B).array();
  }
  for (int k = 0; k < L.n_second(); ++k) {
    const int r = (1 + L.n_first() + k) * B;
    const int ri = (1 + L.second_base(k)) * B;
    P.middleRows(r, B) = A.middleRows(r, B).array() * D0 +
                         2.0 * A.middleRows(ri, B).array() * D.middleRows(ri, B).array() +
                         A0 * D.middleRows(r, B).array();
  }
}

void product_backward(const Layout& L, int B, const RowMat& D, const RowMat& Pbar, RowMat& Abar) {
  Abar.resize(Pbar.rows(), Pbar.cols());
  const auto D0 = D.topRows(B).array();
  Abar.topRows(B) = D0 * Pbar.topRows(B).array();
  for (int i = 0; i < L.n_first(); ++i) {
    const int r = (1 + i) * B;
    Abar.topRows(B).array() += D.middleRows(r, B).array() * Pbar.middleRows(r, B).array();
    Abar.middleRows(r, B) = D0 * Pbar.middleRows(r, B).array();
  }
  for (int k = 0; k < L.n_second(); ++k) {
    const int r = (1 + L.n_first() + k) * B;
    const int ri = (1 + L.second_base(k)) * B;
    Abar.topRows(B).array() += D.middleRows(r, B).array() * Pbar.middleRows(r, B).array();
    Abar.middleRows(ri, B).array() += 2.0 * D.middleRows(ri, B).array() * Pbar.middleRows(r, B).array();
    Abar.middleRows(r, B) = D0 * Pbar.middleRows(r, B).array();
  }
}

}  // namespace batch_ops

namespace {

void affine(const RowMat& X, const double* W, const double* b, int rows, int cols, int B, RowMat& out) {
  out.noalias() = X * MatMap(W, rows, cols);
  out.topRows(B).rowwise() += VecMap(b, cols);
}

void affine_backward(const RowMat& X, const RowMat& abar, int rows, int cols, int B, double* gW, double* gb) {
  MutMatMap(gW, rows, cols).noalias() += X.transpose() * abar;
  Eigen::Map<Eigen::RowVectorXd>(gb, cols) += abar.topRows(B).colwise().sum();
}

}  // namespace

MlpBatch::MlpBatch(const MlpShape& shape, const Layout& layout, int batch)
    : shape_(&shape), layout_(layout), B_(batch), C_(layout.components()) {
  if (batch < 1) throw std::invalid_argument("MlpBatch: empty batch");
}

const RowMat& MlpBatch::forward(std::span<const double> w, const RowMat& X) {
  const MlpShape& s = *shape_;
  if (X.rows() != static_cast<Eigen::Index>(C_) * B_ || X.cols() != s.in()) {
    throw std::invalid_argument("MlpBatch: input has shape " + std::to_string(X.rows()) + "x" +
                                std::to_string(X.cols()) + ", expected " + std::to_string(C_ * B_) + "x" +
                                std::to_string(s.in()));
  }
  if (w.size() != s.n_params()) throw std::invalid_argument("MlpBatch: parameter size mismatch");
  const double* p = w.data();
  const int m = s.width();
  X_ = X;
  affine(X_, p + s.off_W1(), p + s.off_b1(), s.in(), m, B_, aU_);
  batch_ops::activate(layout_, B_, aU_, U_);
  affine(X_, p + s.off_W2(), p + s.off_b2(), s.in(), m, B_, aV_);
  batch_ops::activate(layout_, B_, aV_, V_);
  affine(X_, p + s.off_Wz(0), p + s.off_bz(0), s.in(), m, B_, aH0_);
  const int K = s.n_hidden();
  H_.resize(static_cast<std::size_t>(K));
  aZ_.resize(static_cast<std::size_t>(K));
  Z_.resize(static_cast<std::size_t>(K));
  batch_ops::activate(layout_, B_, aH0_, H_[0]);
  RowMat D = V_ - U_;
  for (int k = 1; k < K; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    affine(H_[kk - 1], p + s.off_Wz(k), p + s.off_bz(k), m, m, B_, aZ_[kk]);
    batch_ops::activate(layout_, B_, aZ_[kk], Z_[kk]);
    batch_ops::product(layout_, B_, Z_[kk], D, H_[kk]);
    H_[kk] += U_;
  }
  affine(H_[static_cast<std::size_t>(K - 1)], p + s.off_Wz(K), p + s.off_bz(K), m, s.out(), B_, Y_);
  return Y_;
}

void MlpBatch::backward(std::span<const double> w, const RowMat& Ybar, std::span<double> gw) const {
  const MlpShape& s = *shape_;
  if (gw.size() != s.n_params()) throw std::invalid_argument("MlpBatch::backward: gradient size mismatch");
  const double* p = w.data();
  double* g = gw.data();
  const int m = s.width();
  const int K = s.n_hidden();
  const auto last = static_cast<std::size_t>(K - 1);
  affine_backward(H_[last], Ybar, m, s.out(), B_, g + s.off_Wz(K), g + s.off_bz(K));
  RowMat Hbar = Ybar * MatMap(p + s.off_Wz(K), m, s.out()).transpose();
  RowMat Ubar = RowMat::Zero(U_.rows(), m);
  RowMat Vbar = RowMat::Zero(V_.rows(), m);
  RowMat D, Dbar, Zbar, aZbar;
  if (K > 1) D = V_ - U_;
  for (int k = K - 1; k >= 1; --k) {
    const auto kk = static_cast<std::size_t>(k);
    batch_ops::product_backward(layout_, B_, Z_[kk], Hbar, Dbar);
    batch_ops::product_backward(layout_, B_, D, Hbar, Zbar);
    Ubar += Hbar - Dbar;
    Vbar += Dbar;
    batch_ops::activate_backward(layout_, B_, aZ_[kk], Zbar, aZbar);
    affine_backward(H_[kk - 1], aZbar, m, m, B_, g + s.off_Wz(k), g + s.off_bz(k));
    Hbar.noalias() = aZbar * MatMap(p + s.off_Wz(k), m, m).transpose();
  }
  RowMat abar;
  batch_ops::activate_backward(layout_, B_, aH0_, Hbar, abar);
  affine_backward(X_, abar, s.in(), m, B_, g + s.off_Wz(0), g + s.off_bz(0));
  batch_ops::activate_backward(layout_, B_, aU_, Ubar, abar);
  affine_backward(X_, abar, s.in(), m, B_, g + s.off_W1(), g + s.off_b1());
  batch_ops::activate_backward(layout_, B_, aV_, Vbar, abar);
  affine_backward(X_, abar, s.in(), m, B_, g + s.off_W2(), g + s.off_b2());
}

}  // namespace apmionet
