#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "apmionet/networks/fourier_embed.hpp"
#include "apmionet/networks/mionet.hpp"
#include "apmionet/networks/modified_mlp.hpp"
#include "apmionet/networks/operator_triple.hpp"

using namespace apmionet;

namespace {

const Layout kFull{{Direction::t, Direction::x, Direction::v}, {Direction::x, Direction::v}};

double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8}); }

std::vector<double> random_vec(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N(0.0, scale);
  std::vector<double> v(n);
  for (auto& e : v) e = N(rng);
  return v;
}

// Random weights and biases; Glorot leaves biases at zero, which hides bias bugs.
ModifiedMlpParams random_mlp(const std::vector<int>& sizes, std::uint64_t seed) {
  ModifiedMlpParams p{MlpShape(sizes), {}};
  p.values = random_vec(p.shape.n_params(), seed, 0.5);
  return p;
}

double checksum(const std::vector<double>& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * static_cast<double>(i % 97 + 1);
  return s;
}

}  // namespace

TEST(Glorot, Reproducible) {
  const auto a = glorot_init(123, {2, 64, 64, 1});
  const auto b = glorot_init(123, {2, 64, 64, 1});
  EXPECT_EQ(checksum(a.values), checksum(b.values));
  EXPECT_EQ(a.values, b.values);
  const auto c = glorot_init(124, {2, 64, 64, 1});
  EXPECT_NE(a.values, c.values);
}

TEST(Glorot, VarianceOfSquareBlock) {
  const auto p = glorot_init(9, {2, 64, 64, 1});
  const auto W = p.Wz(1);
  ASSERT_EQ(W.size(), 4096);
  const double mean = W.mean();
  const double var = (W.array() - mean).square().sum() / (W.size() - 1);
  EXPECT_NEAR(var, 2.0 / 128.0, 0.2 * 2.0 / 128.0);
}

TEST(Glorot, BiasesZero) {
  const auto p = glorot_init(5, {3, 16, 16, 16, 4});
  EXPECT_TRUE((p.b1().array() == 0.0).all());
  EXPECT_TRUE((p.b2().array() == 0.0).all());
  for (int k = 0; k <= p.shape.n_hidden(); ++k) EXPECT_TRUE((p.bz(k).array() == 0.0).all());
}

TEST(Glorot, RejectsBadSizes) {
  EXPECT_THROW(MlpShape({2, 0, 1}), std::invalid_argument);
  EXPECT_THROW(MlpShape({2, 1}), std::invalid_argument);
  EXPECT_THROW(MlpShape({2, 8, 16, 1}), std::invalid_argument);
}

TEST(ModifiedMlp, ZeroWeightsGiveZero) {
  ModifiedMlpParams p{MlpShape({3, 8, 8, 8, 2}), {}};
  p.values.assign(p.shape.n_params(), 0.0);
  const auto y = modified_mlp_forward<double>(p, {HyperScalar(0.3), HyperScalar(-1.0), HyperScalar(2.0)});
  for (const auto& e : y) EXPECT_EQ(e.value(), 0.0);
}

TEST(ModifiedMlp, SingleHiddenLayerReduction) {
  const auto p = random_mlp({2, 5, 3}, 11);
  const std::vector<double> x{0.4, -0.9};
  const auto y = modified_mlp_forward<double>(p, {HyperScalar(x[0]), HyperScalar(x[1])});
  for (int o = 0; o < 3; ++o) {
    double acc = p.bz(1)(o);
    for (int j = 0; j < 5; ++j) {
      const double z = p.bz(0)(j) + x[0] * p.Wz(0)(0, j) + x[1] * p.Wz(0)(1, j);
      acc += swish(z) * p.Wz(1)(j, o);
    }
    EXPECT_NEAR(y[static_cast<std::size_t>(o)].value(), acc, 1e-14);
  }
}

TEST(ModifiedMlp, HandComputedTwoByTwo) {
  // sizes [2,2,2,1]: one gated layer. Independent long-double evaluation.
  const auto p = random_mlp({2, 2, 2, 1}, 21);
  const long double x0 = 0.25L, x1 = -0.75L;
  auto sw = [](long double z) { return z / (1.0L + std::exp(-z)); };
  auto lin = [&](const MatMap& W, const VecMap& b, long double a0, long double a1, int j) {
    return static_cast<long double>(b(j)) + a0 * W(0, j) + a1 * W(1, j);
  };
  long double U[2], V[2], H[2], Z[2], Hn[2];
  for (int j = 0; j < 2; ++j) {
    U[j] = sw(lin(p.W1(), p.b1(), x0, x1, j));
    V[j] = sw(lin(p.W2(), p.b2(), x0, x1, j));
    H[j] = sw(lin(p.Wz(0), p.bz(0), x0, x1, j));
  }
  for (int j = 0; j < 2; ++j) Z[j] = sw(lin(p.Wz(1), p.bz(1), H[0], H[1], j));
  for (int j = 0; j < 2; ++j) Hn[j] = (1.0L - Z[j]) * U[j] + Z[j] * V[j];
  const long double expect = p.bz(2)(0) + Hn[0] * p.Wz(2)(0, 0) + Hn[1] * p.Wz(2)(1, 0);
  const auto y = modified_mlp_forward<double>(p, {HyperScalar(0.25), HyperScalar(-0.75)});
  EXPECT_NEAR(y[0].value(), static_cast<double>(expect), 1e-12);
}

TEST(ModifiedMlp, ShapeMismatchRejected) {
  const auto p = random_mlp({2, 4, 1}, 1);
  EXPECT_THROW(modified_mlp_forward<double>(p, {HyperScalar(1.0)}), std::invalid_argument);
  MlpBatch mb(p.shape, Layout{}, 3);
  EXPECT_THROW(mb.forward(p.values, RowMat::Zero(3, 5)), std::invalid_argument);
}

// The batched path with stacked components reproduces the scalar hyper-dual path.
TEST(ModifiedMlp, BatchMatchesScalar) {
  const auto p = random_mlp({3, 6, 6, 6, 2}, 31);
  const int B = 4;
  const int C = kFull.components();
  RowMat X = RowMat::Zero(C * B, 3);
  std::vector<std::vector<HyperScalar>> xs;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int b = 0; b < B; ++b) {
    std::vector<HyperScalar> in;
    for (int i = 0; i < 3; ++i) {
      HyperScalar h(U(rng), kFull);
      for (int c = 1; c < C; ++c) h.component(c) = U(rng);
      in.push_back(h);
      for (int c = 0; c < C; ++c) X(c * B + b, i) = h.component(c);
    }
    xs.push_back(in);
  }
  MlpBatch mb(p.shape, kFull, B);
  const RowMat& Y = mb.forward(p.values, X);
  for (int b = 0; b < B; ++b) {
    const auto y = modified_mlp_forward<double>(p, xs[static_cast<std::size_t>(b)]);
    for (int o = 0; o < 2; ++o) {
      for (int c = 0; c < C; ++c) EXPECT_NEAR(Y(c * B + b, o), y[static_cast<std::size_t>(o)].component(c), 1e-12);
    }
  }
}

// Hand-derived batched adjoints agree with the scalar tape path and with finite differences.
TEST(ModifiedMlp, BatchBackwardMatchesTapeAndFiniteDifferences) {
  auto p = random_mlp({3, 5, 5, 5, 2}, 41);
  const int B = 3;
  const int C = kFull.components();
  const RowMat X = Eigen::Map<const RowMat>(random_vec(static_cast<std::size_t>(C * B * 3), 7).data(), C * B, 3);
  const RowMat Ybar = Eigen::Map<const RowMat>(random_vec(static_cast<std::size_t>(C * B * 2), 8).data(), C * B, 2);
  auto objective = [&](const std::vector<double>& w) {
    MlpBatch mb(p.shape, kFull, B);
    return mb.forward(w, X).cwiseProduct(Ybar).sum();
  };
  MlpBatch mb(p.shape, kFull, B);
  mb.forward(p.values, X);
  std::vector<double> g(p.shape.n_params(), 0.0);
  mb.backward(p.values, Ybar, g);

  ParamTape tape(p.shape.n_params());
  std::vector<Var> wv;
  for (std::size_t i = 0; i < p.values.size(); ++i) wv.push_back(tape.parameter(i, p.values[i]));
  // Scalar path over Hyper<Var>: the weights enter as tape leaves via a manual forward.
  Var total(0.0);
  for (int b = 0; b < B; ++b) {
    std::vector<HyperVar> in;
    for (int i = 0; i < 3; ++i) {
      HyperVar h(Var(X(b, i)), kFull);
      for (int c = 1; c < C; ++c) h.component(c) = Var(X(c * B + b, i));
      in.push_back(h);
    }
    const MlpShape& s = p.shape;
    auto affine = [&](const std::vector<HyperVar>& x, std::size_t offW, std::size_t offb, int rows, int cols) {
      std::vector<HyperVar> z;
      for (int j = 0; j < cols; ++j) {
        HyperVar acc(wv[offb + static_cast<std::size_t>(j)]);
        for (int i = 0; i < rows; ++i) {
          acc = acc + x[static_cast<std::size_t>(i)] * HyperVar(wv[offW + static_cast<std::size_t>(i * cols + j)]);
        }
        z.push_back(acc);
      }
      return z;
    };
    auto act = [](std::vector<HyperVar> z) {
      for (auto& e : z) e = swish(e);
      return z;
    };
    const auto Uv = act(affine(in, s.off_W1(), s.off_b1(), 3, 5));
    const auto Vv = act(affine(in, s.off_W2(), s.off_b2(), 3, 5));
    auto H = act(affine(in, s.off_Wz(0), s.off_bz(0), 3, 5));
    for (int k = 1; k < s.n_hidden(); ++k) {
      const auto Z = act(affine(H, s.off_Wz(k), s.off_bz(k), 5, 5));
      for (std::size_t j = 0; j < 5; ++j) H[j] = Uv[j] + Z[j] * (Vv[j] - Uv[j]);
    }
    const auto y = affine(H, s.off_Wz(s.n_hidden()), s.off_bz(s.n_hidden()), 5, 2);
    for (int o = 0; o < 2; ++o) {
      for (int c = 0; c < C; ++c) total = total + y[static_cast<std::size_t>(o)].component(c) * Var(Ybar(c * B + b, o));
    }
  }
  const auto gt = reverse_sweep(tape, total);
  EXPECT_NEAR(total.value(), objective(p.values), 1e-11);
  int bad = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_NEAR(g[i], gt[i], 1e-10 * std::max(1.0, std::abs(gt[i]))) << "param " << i;
    auto wp = p.values, wm = p.values;
    wp[i] += 1e-5;
    wm[i] -= 1e-5;
    const double fd = (objective(wp) - objective(wm)) / 2e-5;
    if (rel_err(g[i], fd) > 1e-5 && std::abs(g[i] - fd) > 1e-8) ++bad;
  }
  EXPECT_EQ(bad, 0);
}

TEST(FourierEmbed, Examples) {
  const auto e0 = fourier_embed(0.0, 3.7);
  EXPECT_EQ(e0[0], 1.0);
  EXPECT_EQ(e0[1], 0.0);
  const auto e = fourier_embed(std::numbers::pi, 4 * std::numbers::pi);
  EXPECT_NEAR(e[0], 0.0, 1e-15);
  EXPECT_NEAR(e[1], 1.0, 1e-15);
  EXPECT_THROW(fourier_embed(0.0, 0.0), std::invalid_argument);
  EXPECT_THROW(fourier_embed(0.0, 1.0, 0), std::invalid_argument);
}

TEST(FourierEmbed, Periodic) {
  for (double P : {1.0, 2.0, 4 * std::numbers::pi}) {
    for (double x : {-0.3, 0.0, 0.77, 5.1}) {
      const auto a = fourier_embed(x, P, 3), b = fourier_embed(x + P, P, 3);
      for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
    }
  }
}

TEST(Mionet, CombineArithmetic) {
  const std::vector<HyperScalar> b1{1.0, 2.0}, b2{3.0, 4.0}, t{5.0, 6.0};
  EXPECT_EQ(mionet_combine<double>(&b1, b2, t, 1.0).value(), 64.0);
}

TEST(Mionet, CombineAllOnesBranches) {
  const std::vector<HyperScalar> ones{1.0, 1.0, 1.0};
  const Layout L({Direction::x});
  std::vector<HyperScalar> t;
  for (double v : {0.5, -2.0, 3.0}) {
    HyperScalar h(v, L);
    h.grad(0) = v * 2;
    t.push_back(h);
  }
  const auto r = mionet_combine<double>(&ones, ones, t, 0.25);
  EXPECT_EQ(r.value(), 1.5 + 0.25);
  EXPECT_EQ(r.grad(0), 3.0);
}

TEST(Mionet, BiasOnlyNetworkIsConstant) {
  const auto shape = MionetShape::make(6, 3, 2, 4, 3, 2.0, 1, true, false);
  std::vector<double> w(shape.n_params(), 0.0);
  w[shape.off_b0()] = 0.7;
  const auto c = seed_coordinates(0.1, 0.2, 0.3, kFull);
  const auto y = trunk_input<double>(shape, c[0], c[1], c[2]);
  const std::vector<double> u1(6, 0.5), u2(3, 1.0);
  const auto r = mionet_eval<double>(shape, w, u1, u2, y);
  EXPECT_EQ(r.value(), 0.7);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(r.grad(i), 0.0);
  for (int k = 0; k < 2; ++k) EXPECT_EQ(r.hess(k), 0.0);
}

TEST(Mionet, SensorShapeMismatchRejected) {
  const auto shape = MionetShape::make(6, 3, 2, 4, 3, 2.0, 1, true, false);
  const auto net = mionet_init(shape, 1);
  const std::vector<HyperScalar> y(4, HyperScalar(0.0));
  EXPECT_THROW(mionet_eval<double>(shape, net.values, std::vector<double>(5), std::vector<double>(3), y),
               std::invalid_argument);
  EXPECT_THROW(mionet_eval<double>(shape, net.values, std::vector<double>(6), std::vector<double>(2), y),
               std::invalid_argument);
}

namespace {

OperatorTriple small_triple(std::uint64_t seed, double period = 4 * std::numbers::pi) {
  OperatorTriple t(NetworkConfig{2, 6, 5, 1}, 12, 4, period, true);
  t.initialize(seed);
  // Non-zero output biases so that b0 contributes.
  for (NetId id : {NetId::F, NetId::P, NetId::Phi}) t.params()[t.offset(id) + t.shape(id).off_b0()] = 0.1;
  return t;
}

CoupleSensors random_couple(std::uint64_t seed) {
  return {random_vec(12, seed), random_vec(4, seed + 1000)};
}

}  // namespace

TEST(OperatorEval, ZeroNetworks) {
  OperatorTriple t(NetworkConfig{2, 6, 5, 1}, 12, 4, 2.0, true);
  const auto r = operator_eval(t, random_couple(1), 0.3, 0.4, 0.5);
  EXPECT_NEAR(r.f.value(), std::log(2.0), 1e-15);
  EXPECT_NEAR(r.rho.value(), std::log(2.0), 1e-15);
  EXPECT_EQ(r.phi.value(), 0.0);
}

TEST(OperatorEval, PositivityOverRandomDraws) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> U(-5, 5);
  OperatorTriple t(NetworkConfig{2, 6, 5, 1}, 12, 4, 2.0, true);
  for (int trial = 0; trial < 1000; ++trial) {
    t.initialize(5000 + static_cast<std::uint64_t>(trial));
    for (NetId id : {NetId::F, NetId::P}) {
      t.params()[t.offset(id) + t.shape(id).off_b0()] = U(rng);
    }
    const auto r = operator_eval(t, random_couple(static_cast<std::uint64_t>(trial)), U(rng), U(rng), U(rng));
    ASSERT_GT(r.f.value(), 0.0);
    ASSERT_GT(r.rho.value(), 0.0);
  }
}

TEST(OperatorEval, PeriodicInXIncludingDerivatives) {
  const double P = 4 * std::numbers::pi;
  const auto t = small_triple(3, P);
  const auto u = random_couple(4);
  for (double x : {0.0, 1.3, 7.7}) {
    const auto a = operator_eval(t, u, 0.4, x, -0.8, kFull);
    const auto b = operator_eval(t, u, 0.4, x + P, -0.8, kFull);
    for (int c = 0; c < kFull.components(); ++c) EXPECT_NEAR(a.f.component(c), b.f.component(c), 1e-12);
    EXPECT_NEAR(a.rho.value(), b.rho.value(), 1e-12);
    EXPECT_NEAR(a.phi.value(), b.phi.value(), 1e-12);
    EXPECT_NEAR(a.phi.d(Direction::x), b.phi.d(Direction::x), 1e-12);
    EXPECT_NEAR(a.phi.dd(Direction::x), b.phi.dd(Direction::x), 1e-12);
  }
}

TEST(OperatorEval, DerivativesMatchFiniteDifferences) {
  const auto t = small_triple(8);
  const auto u = random_couple(9);
  const double t0 = 0.35, x0 = 1.1, v0 = 0.6, h = 1e-4;
  auto f = [&](double a, double b, double c) { return operator_eval(t, u, a, b, c).f.value(); };
  auto phi = [&](double b) { return operator_eval(t, u, t0, b, v0).phi.value(); };
  const auto r = operator_eval(t, u, t0, x0, v0, kFull);
  const double dt = (f(t0 + h, x0, v0) - f(t0 - h, x0, v0)) / (2 * h);
  const double dx = (f(t0, x0 + h, v0) - f(t0, x0 - h, v0)) / (2 * h);
  const double dv = (f(t0, x0, v0 + h) - f(t0, x0, v0 - h)) / (2 * h);
  const double H = 1e-3;
  const double dxx = (f(t0, x0 + H, v0) - 2 * f(t0, x0, v0) + f(t0, x0 - H, v0)) / (H * H);
  const double dvv = (f(t0, x0, v0 + H) - 2 * f(t0, x0, v0) + f(t0, x0, v0 - H)) / (H * H);
  EXPECT_LT(rel_err(r.f.d(Direction::t), dt), 1e-5);
  EXPECT_LT(rel_err(r.f.d(Direction::x), dx), 1e-5);
  EXPECT_LT(rel_err(r.f.d(Direction::v), dv), 1e-5);
  EXPECT_LT(rel_err(r.f.dd(Direction::x), dxx), 1e-5);
  EXPECT_LT(rel_err(r.f.dd(Direction::v), dvv), 1e-5);
  const double px = (phi(x0 + h) - phi(x0 - h)) / (2 * h);
  const double pxx = (phi(x0 + H) - 2 * phi(x0) + phi(x0 - H)) / (H * H);
  EXPECT_LT(rel_err(r.phi.d(Direction::x), px), 1e-5);
  EXPECT_LT(rel_err(r.phi.dd(Direction::x), pxx), 1e-5);
}

TEST(OperatorEval, BatchMatchesScalar) {
  const auto t = small_triple(12);
  SensorTable sensors{RowMat(3, 12), RowMat(3, 4)};
  std::vector<CoupleSensors> us;
  for (int i = 0; i < 3; ++i) {
    us.push_back(random_couple(static_cast<std::uint64_t>(50 + i)));
    for (int j = 0; j < 12; ++j) sensors.f0(i, j) = us.back().f0[static_cast<std::size_t>(j)];
    for (int j = 0; j < 4; ++j) sensors.h(i, j) = us.back().h[static_cast<std::size_t>(j)];
  }
  MionetQuery q{kFull, {0.1, 0.5, 0.9, 0.2}, {0.3, 2.0, 5.0, 11.0}, {-1.0, 0.0, 2.0, 4.5}, {2, 0, 1, 2}};
  const auto batch = mionet_eval_batch(t.shape(NetId::F), t.net_params(NetId::F), sensors, q);
  for (int b = 0; b < 4; ++b) {
    const auto ref = operator_eval(t, us[static_cast<std::size_t>(q.couple[static_cast<std::size_t>(b)])],
                                   q.t[static_cast<std::size_t>(b)], q.x[static_cast<std::size_t>(b)],
                                   q.v[static_cast<std::size_t>(b)], kFull);
    for (int c = 0; c < kFull.components(); ++c) {
      EXPECT_NEAR(batch[static_cast<std::size_t>(b)].component(c), ref.f.component(c), 1e-12);
    }
  }
}

TEST(OperatorEval, RecordedGradientMatchesFiniteDifferences) {
  auto t = small_triple(21);
  SensorTable sensors{RowMat::Random(2, 12), RowMat::Random(2, 4)};
  const MionetQuery q{kFull, {0.1, 0.7, 0.3}, {0.3, 2.0, 9.0}, {-1.0, 0.5, 2.0}, {1, 0, 1}};
  auto objective = [&](const std::vector<double>& w, std::vector<double>* grad) {
    ParamTape tape(w.size());
    const auto out = mionet_record(tape, t.shape(NetId::F), w, t.offset(NetId::F), sensors, q);
    Var acc(0.0);
    for (const auto& h : out) {
      for (int c = 0; c < kFull.components(); ++c) acc = acc + h.component(c) * h.component(c) * Var(0.5 + c);
    }
    if (grad != nullptr) *grad = reverse_sweep(tape, acc);
    return acc.value();
  };
  std::vector<double> g;
  objective(t.params(), &g);
  int bad = 0, checked = 0;
  for (std::size_t i = t.offset(NetId::F); i < t.offset(NetId::F) + t.shape(NetId::F).n_params(); ++i) {
    auto wp = t.params(), wm = t.params();
    wp[i] += 1e-5;
    wm[i] -= 1e-5;
    const double fd = (objective(wp, nullptr) - objective(wm, nullptr)) / 2e-5;
    if (rel_err(g[i], fd) > 1e-5 && std::abs(g[i] - fd) > 1e-8) ++bad;
    ++checked;
  }
  EXPECT_EQ(bad, 0) << "of " << checked;
  for (std::size_t i = t.offset(NetId::P); i < t.n_params(); ++i) EXPECT_EQ(g[i], 0.0);
}

TEST(Checkpoint, RoundTrip) {
  const auto t = small_triple(99);
  const auto path = (std::filesystem::temp_directory_path() / "apmionet_ckpt_test.bin").string();
  save_checkpoint(path, t);
  const auto r = load_checkpoint(path);
  EXPECT_EQ(r.params(), t.params());
  EXPECT_TRUE(r.shape(NetId::F) == t.shape(NetId::F));
  EXPECT_TRUE(r.has(NetId::P));
  OperatorTriple pi(NetworkConfig{1, 4, 3, 1}, 0, 4, 2.0, false);
  save_checkpoint(path, pi);
  const auto r2 = load_checkpoint(path);
  EXPECT_FALSE(r2.has(NetId::P));
  EXPECT_FALSE(r2.shape(NetId::F).branch1.has_value());
  std::filesystem::remove(path);
}

TEST(Checkpoint, RejectsBadHeader) {
  const auto path = (std::filesystem::temp_directory_path() / "apmionet_bad_ckpt.bin").string();
  {
    std::ofstream os(path, std::ios::binary);
    os << "NOTACHECKPOINT";
  }
  EXPECT_THROW(load_checkpoint(path), std::runtime_error);
  std::filesystem::remove(path);
}
