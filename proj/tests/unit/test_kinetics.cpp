#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "apmionet/kinetics/collisions.hpp"
#include "apmionet/kinetics/quadrature.hpp"

using namespace apmionet;

namespace {

const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
const Layout kV({Direction::v}, {Direction::v});

std::vector<HyperScalar> at_nodes(const VelocityQuadrature& q, double (*f)(double)) {
  std::vector<HyperScalar> out;
  for (double v : q.nodes) out.emplace_back(f(v));
  return out;
}

std::vector<HyperScalar> random_nodes(std::mt19937_64& rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> U(lo, hi);
  std::vector<HyperScalar> out;
  for (int i = 0; i < n; ++i) out.emplace_back(U(rng));
  return out;
}

double mass_of(const VelocityQuadrature& q, const std::vector<double>& g) {
  double s = 0.0;
  for (int i = 0; i < q.size(); ++i) s += q.weights[i] * g[i];
  return s;
}

HyperScalar seeded_v(double v) { return seed_coordinates(0.0, 0.0, v, kV)[2]; }

}  // namespace

TEST(Quadrature, WeightsSumToLength) {
  for (int n : {1, 2, 5, 16, 33, 64}) {
    const auto q = gauss_legendre(n, -6.0, 6.0);
    double s = 0.0;
    for (double w : q.weights) s += w;
    EXPECT_NEAR(s, 12.0, 1e-12) << n;
    for (int i = 1; i < n; ++i) EXPECT_LT(q.nodes[i - 1], q.nodes[i]);
  }
}

TEST(Quadrature, ExactForPolynomialsUpToDegree31) {
  const auto q = gauss_legendre(16, -6.0, 6.0);
  for (int k = 0; k <= 31; ++k) {
    double s = 0.0;
    for (int i = 0; i < 16; ++i) s += q.weights[i] * std::pow(q.nodes[i], k);
    const double exact = (k % 2 == 1) ? 0.0 : 2.0 * std::pow(6.0, k + 1) / (k + 1);
    const double scale = 2.0 * std::pow(6.0, k + 1) / (k + 1);
    EXPECT_LE(std::abs(s - exact) / scale, 1e-10) << "degree " << k;
  }
}

TEST(Quadrature, AsymmetricIntervalCubic) {
  const auto q = gauss_legendre(3, 1.0, 4.0);
  double s = 0.0;
  for (int i = 0; i < 3; ++i) s += q.weights[i] * std::pow(q.nodes[i], 5);
  EXPECT_NEAR(s, (std::pow(4.0, 6) - 1.0) / 6.0, 1e-10);
}

TEST(Quadrature, MaxwellianMoments16Nodes) {
  const auto q = gauss_legendre(16, -6.0, 6.0);
  std::vector<double> m;
  std::vector<double> v2m;
  for (double v : q.nodes) {
    m.push_back(maxwellian(v));
    v2m.push_back(v * v * maxwellian(v));
  }
  EXPECT_NEAR(mass_of(q, m), 1.0, 1e-5);
  // characterization: 40-digit evaluation of the same 16-node rule
  EXPECT_NEAR(mass_of(q, m) - 1.0, -4.92781356152999e-6, 1e-12);
  EXPECT_NEAR(mass_of(q, v2m) - 1.0, 9.27605290825858e-5, 1e-12);
}

TEST(Quadrature, MaxwellianMassAgainstFineTrapezoid) {
  const int n = 1000000;
  const double h = 12.0 / n;
  double s = 0.5 * (maxwellian(-6.0) + maxwellian(6.0));
  for (int i = 1; i < n; ++i) s += maxwellian(-6.0 + i * h);
  s *= h;
  const auto q = gauss_legendre(16, -6.0, 6.0);
  std::vector<double> m;
  for (double v : q.nodes) m.push_back(maxwellian(v));
  EXPECT_NEAR(mass_of(q, m), s, 1e-5);
}

TEST(Quadrature, Midpoint) {
  const auto q = midpoint_rule(4, 0.0, 2.0);
  EXPECT_DOUBLE_EQ(q.nodes[0], 0.25);
  EXPECT_DOUBLE_EQ(q.weights[3], 0.5);
  EXPECT_THROW(midpoint_rule(0, 0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(gauss_legendre(4, 1.0, 1.0), std::invalid_argument);
}

TEST(Distributions, Maxwellian) {
  EXPECT_NEAR(maxwellian(0.0), 0.3989422804014327, 1e-15);
  for (double v : {1.0, 2.0, 6.0}) EXPECT_EQ(maxwellian(v), maxwellian(-v));
  EXPECT_EQ(local_maxwellian(0.7, 0.0), maxwellian(0.7));
  EXPECT_NEAR(local_maxwellian(-1.0, 1.0), kInvSqrt2Pi, 1e-16);
}

TEST(Distributions, FermiDirac) {
  EXPECT_EQ(fermi_dirac(0.0, 0.0), 0.5);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> V(-8, 8);
  std::uniform_real_distribution<double> Mu(-5, 5);
  for (int i = 0; i < 1000; ++i) {
    const double f = fermi_dirac(V(rng), Mu(rng));
    EXPECT_GT(f, 0.0);
    EXPECT_LT(f, 1.0);
  }
}

TEST(CollisionSpec, Validation) {
  const auto q = gauss_legendre(8, -6.0, 6.0);
  EXPECT_THROW(CollisionSpec(CollisionKind::NonDegenerate, q, [](double v, double w) { return 1.0 + v - w; }),
               std::invalid_argument);
  EXPECT_THROW(CollisionSpec(CollisionKind::Degenerate, q, [](double v, double w) { return (v - w) * (v - w); }),
               std::invalid_argument);
  const CollisionSpec s(CollisionKind::Degenerate, q, psi_anisotropic);
  EXPECT_GE(s.psi_min(), 1.0);
  EXPECT_LE(s.psi_max(), 2.0);
  EXPECT_THROW(parse_collision_kind("bgk"), std::invalid_argument);
  EXPECT_EQ(parse_collision_kind(to_string(CollisionKind::Isotropic)), CollisionKind::Isotropic);
}

TEST(QFokkerPlanck, Examples) {
  {
    const auto v = seeded_v(1.0);
    EXPECT_NEAR(q_fp(v * v, 1.0).value(), 5.0, 1e-14);
  }
  for (double vv : {-2.0, 0.0, 3.0}) {
    const auto v = seeded_v(vv);
    const auto M = exp(-0.5 * v * v) * kInvSqrt2Pi;
    EXPECT_NEAR(q_fp(M, vv).value(), 0.0, 1e-10);
  }
  {
    HyperScalar c(2.5, kV);
    EXPECT_DOUBLE_EQ(q_fp(c, 0.0).value(), 2.5);
  }
  EXPECT_THROW(q_fp(HyperScalar(1.0), 0.0), std::invalid_argument);
  EXPECT_THROW(q_fp(HyperScalar(1.0, Layout({Direction::v})), 0.0), std::invalid_argument);
}

TEST(QFokkerPlanck, LocalMaxwellianInNullSpaceOfFieldOperator) {
  // phi_x f_v + Q_fp(f) vanishes for f = rho M(v + phi_x)
  for (double dphi : {-0.8, 0.0, 0.3}) {
    for (double vv : {-2.0, 0.5, 3.0}) {
      const auto v = seeded_v(vv);
      const auto w = v + dphi;
      const auto f = 1.7 * exp(-0.5 * w * w) * kInvSqrt2Pi;
      EXPECT_NEAR(dphi * f.d(Direction::v) + q_fp(f, vv).value(), 0.0, 1e-10);
    }
  }
}

TEST(QFokkerPlanck, MassConservationOnFineRule) {
  const auto q = gauss_legendre(64, -6.0, 6.0);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> A(0.1, 1.0);
  std::uniform_real_distribution<double> C(-0.5, 0.5);
  std::uniform_real_distribution<double> S(0.5, 0.7);
  for (int trial = 0; trial < 100; ++trial) {
    const double a1 = A(rng), c1 = C(rng), s1 = S(rng), a2 = A(rng), c2 = C(rng), s2 = S(rng);
    std::vector<double> Qv;
    for (double vv : q.nodes) {
      const auto v = seeded_v(vv);
      const auto z1 = (v - c1) / s1;
      const auto z2 = (v - c2) / s2;
      const auto f = a1 * exp(-0.5 * z1 * z1) + a2 * exp(-0.5 * z2 * z2);
      Qv.push_back(q_fp(f, vv).value());
    }
    EXPECT_NEAR(mass_of(q, Qv), 0.0, 1e-10);
  }
}

TEST(QIsotropic, Examples) {
  const CollisionSpec s(CollisionKind::Isotropic, gauss_legendre(16, -6.0, 6.0));
  for (double v : s.quad().nodes) {
    const double M = maxwellian(v);
    EXPECT_EQ(q_isotropic(HyperScalar(0.0), HyperScalar(1.0), v, s).value(), M);
    EXPECT_NEAR(q_isotropic(HyperScalar(M), HyperScalar(s.maxwellian_mass()), v, s).value(), 0.0, 1e-16);
    EXPECT_NEAR(q_isotropic(HyperScalar(2 * M), HyperScalar(2 * s.maxwellian_mass()), v, s).value(), 0.0, 1e-16);
    // against the exact unit mass only the quadrature error of <M> remains
    EXPECT_NEAR(q_isotropic(HyperScalar(M), HyperScalar(1.0), v, s).value(), 0.0,
                M * std::abs(1.0 - s.maxwellian_mass()) + 1e-16);
  }
}

TEST(QIsotropic, MassConservation) {
  const CollisionSpec s(CollisionKind::Isotropic, gauss_legendre(16, -6.0, 6.0));
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto f = random_nodes(rng, 16, 0.0, 2.0);
    const auto rho = moment(std::span<const HyperScalar>(f), 0, s.quad());
    std::vector<double> Qv;
    for (int i = 0; i < 16; ++i) Qv.push_back(q_isotropic(f[i], rho, s.quad().nodes[i], s).value());
    EXPECT_NEAR(mass_of(s.quad(), Qv), 0.0, 1e-10);
  }
}

TEST(QNonDegenerate, NullSpaceAndSeparableKernel) {
  const CollisionSpec s(CollisionKind::NonDegenerate, gauss_legendre(16, -6.0, 6.0), psi_anisotropic);
  auto M = at_nodes(s.quad(), maxwellian);
  for (auto& e : M) e = 3.0 * e.value();
  for (int i = 0; i < 16; ++i) {
    EXPECT_NEAR(q_nondeg(std::span<const HyperScalar>(M), M[i], s.quad().nodes[i], s).value(), 0.0, 1e-12);
  }
  EXPECT_NEAR(q_nondeg(std::span<const HyperScalar>(M), HyperScalar(3.0 * maxwellian(0.37)), 0.37, s).value(), 0.0,
              1e-12);

  const CollisionSpec one(CollisionKind::NonDegenerate, s.quad());
  std::mt19937_64 rng(2);
  const auto f = random_nodes(rng, 16, 0.0, 1.0);
  const double rho = moment(std::span<const HyperScalar>(f), 0, s.quad()).value();
  for (int i = 0; i < 16; ++i) {
    const double v = s.quad().nodes[i];
    EXPECT_NEAR(q_nondeg(std::span<const HyperScalar>(f), f[i], v, one).value(),
                maxwellian(v) * rho - f[i].value() * one.maxwellian_mass(), 1e-14);
  }
}

TEST(QNonDegenerate, MassConservationAndLinearity) {
  const CollisionSpec s(CollisionKind::NonDegenerate, gauss_legendre(16, -6.0, 6.0), psi_anisotropic);
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const auto f = random_nodes(rng, 16, 0.0, 2.0);
    const auto g = random_nodes(rng, 16, -1.0, 1.0);
    const double a = 0.7, b = -1.3;
    std::vector<HyperScalar> h;
    for (int i = 0; i < 16; ++i) h.push_back(a * f[i] + b * g[i]);
    std::vector<double> Qv;
    for (int i = 0; i < 16; ++i) {
      const double v = s.quad().nodes[i];
      const double qf = q_nondeg(std::span<const HyperScalar>(f), f[i], v, s).value();
      const double qg = q_nondeg(std::span<const HyperScalar>(g), g[i], v, s).value();
      const double qh = q_nondeg(std::span<const HyperScalar>(h), h[i], v, s).value();
      EXPECT_NEAR(qh, a * qf + b * qg, 1e-12);
      Qv.push_back(qf);
    }
    EXPECT_NEAR(mass_of(s.quad(), Qv), 0.0, 1e-10);
  }
}

TEST(QDegenerate, FermiDiracNullSpaceAndExtremes) {
  const CollisionSpec s(CollisionKind::Degenerate, gauss_legendre(16, -6.0, 6.0), psi_anisotropic);
  for (double mu : {-2.0, 0.0, 1.5}) {
    std::vector<HyperScalar> f;
    for (double v : s.quad().nodes) f.emplace_back(fermi_dirac(v, mu));
    for (int i = 0; i < 16; ++i) {
      EXPECT_NEAR(q_deg(std::span<const HyperScalar>(f), f[i], s.quad().nodes[i], s).value(), 0.0, 1e-12);
    }
  }
  for (double c : {0.0, 1.0}) {
    const std::vector<HyperScalar> f(16, HyperScalar(c));
    for (int i = 0; i < 16; ++i) {
      EXPECT_NEAR(q_deg(std::span<const HyperScalar>(f), f[i], s.quad().nodes[i], s).value(), 0.0, 1e-15);
    }
  }
}

TEST(QDegenerate, MassConservation) {
  const CollisionSpec s(CollisionKind::Degenerate, gauss_legendre(16, -6.0, 6.0), psi_anisotropic);
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const auto f = random_nodes(rng, 16, 0.0, 1.0);
    std::vector<double> Qv;
    for (int i = 0; i < 16; ++i) Qv.push_back(q_deg(std::span<const HyperScalar>(f), f[i], s.quad().nodes[i], s).value());
    EXPECT_NEAR(mass_of(s.quad(), Qv), 0.0, 1e-10);
  }
}

TEST(Collisions, CommuteWithVelocityReflection) {
  const auto quad = gauss_legendre(16, -6.0, 6.0);
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<HyperScalar> f(16);
  for (int i = 0; i < 8; ++i) f[i] = f[15 - i] = U(rng);
  for (auto kind : {CollisionKind::NonDegenerate, CollisionKind::Degenerate}) {
    const CollisionSpec s(kind, quad, psi_anisotropic);
    for (int i = 0; i < 8; ++i) {
      auto Q = [&](int k) {
        return kind == CollisionKind::Degenerate ? q_deg(std::span<const HyperScalar>(f), f[k], quad.nodes[k], s).value()
                                                 : q_nondeg(std::span<const HyperScalar>(f), f[k], quad.nodes[k], s).value();
      };
      EXPECT_NEAR(Q(i), Q(15 - i), 1e-14);
    }
  }
  const CollisionSpec iso(CollisionKind::Isotropic, quad);
  const auto rho = moment(std::span<const HyperScalar>(f), 0, quad);
  EXPECT_NEAR(q_isotropic(f[2], rho, quad.nodes[2], iso).value(), q_isotropic(f[13], rho, quad.nodes[13], iso).value(),
              1e-15);
  for (double vv : {0.5, 2.0}) {
    auto qfp = [](double v) {
      const auto s = seeded_v(v);
      return q_fp(exp(-s * s) * (1.0 + s * s), v).value();
    };
    EXPECT_NEAR(qfp(vv), qfp(-vv), 1e-14);
  }
}

TEST(Moment, Examples) {
  const auto q = gauss_legendre(16, -6.0, 6.0);
  const std::vector<HyperScalar> one(16, HyperScalar(1.0));
  EXPECT_NEAR(moment(std::span<const HyperScalar>(one), 0, q).value(), 12.0, 1e-13);
  const auto M = at_nodes(q, maxwellian);
  EXPECT_NEAR(moment(std::span<const HyperScalar>(M), 1, q).value(), 0.0, 1e-10);
  std::vector<HyperScalar> p30;
  for (double v : q.nodes) p30.emplace_back(std::pow(v, 30));
  const double exact = 2.0 * std::pow(6.0, 31) / 31.0;
  EXPECT_LE(std::abs(moment(std::span<const HyperScalar>(p30), 0, q).value() - exact) / exact, 1e-10);
  EXPECT_LE(std::abs(moment(std::span<const HyperScalar>(p30), 1, q).value()) / exact, 1e-10);
  EXPECT_THROW(moment(std::span<const HyperScalar>(p30), 2, q), std::invalid_argument);
  EXPECT_THROW(moment(std::span<const HyperScalar>(p30).first(3), 0, q), std::invalid_argument);
}

TEST(Moment, CarriesDerivatives) {
  const auto q = gauss_legendre(16, -6.0, 6.0);
  const Layout Lx({Direction::x}, {Direction::x});
  const double x0 = 0.4;
  std::vector<HyperScalar> f;
  for (double v : q.nodes) {
    const auto x = seed_coordinates(0.0, x0, v, Lx)[1];
    f.push_back(sin(x) * maxwellian(v) * (1.0 + v));
  }
  const auto m0 = moment(std::span<const HyperScalar>(f), 0, q);
  const auto m1 = moment(std::span<const HyperScalar>(f), 1, q);
  double mm = 0.0, vm = 0.0;
  for (int i = 0; i < 16; ++i) {
    mm += q.weights[i] * maxwellian(q.nodes[i]) * (1.0 + q.nodes[i]);
    vm += q.weights[i] * q.nodes[i] * maxwellian(q.nodes[i]) * (1.0 + q.nodes[i]);
  }
  EXPECT_NEAR(m0.d(Direction::x), std::cos(x0) * mm, 1e-14);
  EXPECT_NEAR(m1.dd(Direction::x), -std::sin(x0) * vm, 1e-14);
}

TEST(Collisions, TapeGradientMatchesFiniteDifference) {
  const CollisionSpec s(CollisionKind::Degenerate, gauss_legendre(8, -6.0, 6.0), psi_anisotropic);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(0.1, 0.9);
  std::vector<double> w(8);
  for (auto& e : w) e = U(rng);
  auto loss = [&](const std::vector<double>& p) {
    std::vector<HyperScalar> f(p.begin(), p.end());
    double L = 0.0;
    for (int i = 0; i < 8; ++i) {
      const double Q = q_deg(std::span<const HyperScalar>(f), f[i], s.quad().nodes[i], s).value();
      L += Q * Q;
    }
    return L;
  };
  ParamTape tape(8);
  std::vector<HyperVar> f;
  for (int i = 0; i < 8; ++i) f.emplace_back(tape.parameter(static_cast<std::size_t>(i), w[i]));
  Var L(0.0);
  for (int i = 0; i < 8; ++i) {
    const Var Q = q_deg(std::span<const HyperVar>(f), f[i], s.quad().nodes[i], s).value();
    L += Q * Q;
  }
  EXPECT_NEAR(L.value(), loss(w), 1e-15);
  const auto g = reverse_sweep(tape, L);
  for (int i = 0; i < 8; ++i) {
    auto wp = w, wm = w;
    wp[i] += 1e-5;
    wm[i] -= 1e-5;
    EXPECT_NEAR(g[i], (loss(wp) - loss(wm)) / 2e-5, 1e-7 * std::max(1.0, std::abs(g[i])));
  }
}
