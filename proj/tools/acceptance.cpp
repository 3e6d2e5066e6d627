// Acceptance checks. One PASS/FAIL line per criterion; exit status 1 if any fails.
#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "apmionet/cli/commands.hpp"
#include "apmionet/kinetics/collisions.hpp"
#include "apmionet/refsolver/limit.hpp"
#include "apmionet/refsolver/poisson.hpp"
#include "apmionet/refsolver/steady.hpp"
#include "apmionet/residuals/loss.hpp"
#include "apmionet/training/predict.hpp"
#include "apmionet/training/trainer.hpp"

#ifndef APMIONET_CONFIG_DIR
#define APMIONET_CONFIG_DIR "configs"
#endif

using namespace apmionet;

namespace {

const double kPi = std::numbers::pi;
const Layout kV({Direction::v}, {Direction::v});

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

SensorTable random_sensors(int couples, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  SensorTable s{RowMat(couples, n), RowMat(couples, n)};
  for (int c = 0; c < couples; ++c) {
    for (int i = 0; i < n; ++i) {
      s.f0(c, i) = 0.4 * U(rng);
      s.h(c, i) = 0.9 + 0.2 * U(rng);
    }
  }
  return s;
}

struct TinySetup {
  CollocationBatch batch;
  OperatorTriple triple;
};

TinySetup tiny_setup(int couples, int n_dom, int n_ic, std::uint64_t seed) {
  std::vector<InitialCondition> ics;
  for (int c = 0; c < couples; ++c) ics.push_back(initial_conditions(ProblemId::landau, 1.0 + 0.05 * c, 0.05, 0.5));
  TinySetup s;
  s.batch = sample_collocation(random_sensors(couples, 4, seed), ics, default_domain(ProblemId::landau, 0.5), n_dom,
                               n_ic, seed + 1);
  s.triple = OperatorTriple(NetworkConfig{2, 8, 8, 1}, 4, 4, 4.0 * kPi, true);
  s.triple.initialize(seed + 2);
  return s;
}

std::vector<CollisionKind> all_kinds() {
  return {CollisionKind::FokkerPlanck, CollisionKind::Isotropic, CollisionKind::NonDegenerate,
          CollisionKind::Degenerate};
}

Outcome criterion2() {
  auto s = tiny_setup(2, 64, 16, 31);
  Outcome out{true, "slopes"};
  for (auto kind : all_kinds()) {
    const CollisionSpec spec(kind, gauss_legendre(16, -6.0, 6.0), psi_anisotropic);
    const double L0 = ap_loss(s.triple, s.batch, PenaltyWeights{}, constant_epsilon(0.0), spec).total;
    std::vector<double> le, ld;
    for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
      const double L = ap_loss(s.triple, s.batch, PenaltyWeights{}, constant_epsilon(eps), spec).total;
      le.push_back(std::log(eps));
      ld.push_back(std::log(std::abs(L - L0)));
    }
    const double k = ls_slope(le, ld);
    out.pass = out.pass && k >= 0.9;
    out.detail += fmt(" %s=%.4f", to_string(kind).c_str(), k);
  }
  out.detail += " (need >= 0.9)";
  return out;
}

Outcome criterion3() {
  int total = 0, good = 0;
  double worst = 0.0;
  for (auto kind : {CollisionKind::FokkerPlanck, CollisionKind::Degenerate}) {
    auto s = tiny_setup(1, 16, 16, 40);
    const CollisionSpec spec(kind, gauss_legendre(16, -6.0, 6.0), psi_anisotropic);
    const auto eps = constant_epsilon(0.5);
    const PenaltyWeights w{};
    ParamTape tape(s.triple.n_params());
    TapedNetworkModel tm(s.triple, tape);
    const auto L = ap_loss<Var>(tm, s.batch, w, eps, spec);
    const auto g = reverse_sweep(tape, L.total);
    auto& p = s.triple.params();
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double keep = p[i];
      const double h = 1e-3 * std::max(1.0, std::abs(keep));
      p[i] = keep + h;
      const double lp = ap_loss(s.triple, s.batch, w, eps, spec).total;
      p[i] = keep - h;
      const double lm = ap_loss(s.triple, s.batch, w, eps, spec).total;
      p[i] = keep;
      const double fd = (lp - lm) / (2.0 * h);
      const double scale = std::max(std::abs(fd), std::abs(g[i]));
      const double rel = scale == 0.0 ? 0.0 : std::abs(fd - g[i]) / scale;
      ++total;
      if (rel < 1e-4) ++good;
      worst = std::max(worst, rel);
    }
  }
  const double frac = static_cast<double>(good) / total;
  return {frac >= 0.99, fmt("%d/%d parameters within 1e-4 (%.2f%%, need >= 99%%), worst rel %.2e", good, total,
                            100.0 * frac, worst)};
}

double q_at_nodes_mass(const CollisionSpec& s, const std::vector<HyperScalar>& f) {
  const auto& q = s.quad();
  const auto rho = moment(std::span<const HyperScalar>(f), 0, q);
  double m = 0.0;
  for (int i = 0; i < q.size(); ++i) {
    const double v = q.nodes[i];
    double Q = 0.0;
    switch (s.kind()) {
      case CollisionKind::FokkerPlanck: Q = q_fp(f[i], v).value(); break;
      case CollisionKind::Isotropic: Q = q_isotropic(f[i], rho, v, s).value(); break;
      case CollisionKind::NonDegenerate: Q = q_nondeg(std::span<const HyperScalar>(f), f[i], v, s).value(); break;
      case CollisionKind::Degenerate: Q = q_deg(std::span<const HyperScalar>(f), f[i], v, s).value(); break;
    }
    m += q.weights[i] * Q;
  }
  return m;
}

Outcome criterion4() {
  const auto q16 = gauss_legendre(16, -6.0, 6.0);
  double null_max = 0.0;
  {
    const CollisionSpec fp(CollisionKind::FokkerPlanck, q16);
    const CollisionSpec iso(CollisionKind::Isotropic, q16);
    const CollisionSpec nd(CollisionKind::NonDegenerate, q16, psi_anisotropic);
    const CollisionSpec dg(CollisionKind::Degenerate, q16, psi_anisotropic);
    std::vector<HyperScalar> M, cM, FD;
    for (double v : q16.nodes) {
      M.emplace_back(maxwellian(v));
      cM.emplace_back(2.5 * maxwellian(v));
      FD.emplace_back(fermi_dirac(v, 0.7));
    }
    const HyperScalar mass(iso.maxwellian_mass());
    for (int i = 0; i < 16; ++i) {
      const double v = q16.nodes[i];
      const auto vs = seed_coordinates(0.0, 0.0, v, kV)[2];
      const auto Mv = exp(-0.5 * vs * vs) / std::sqrt(2.0 * kPi);
      null_max = std::max({null_max, std::abs(q_fp(Mv, v).value()), std::abs(q_isotropic(M[i], mass, v, iso).value()),
                           std::abs(q_nondeg(std::span<const HyperScalar>(cM), cM[i], v, nd).value()),
                           std::abs(q_deg(std::span<const HyperScalar>(FD), FD[i], v, dg).value())});
    }
  }

  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::map<std::string, double> worst;
  for (auto kind : {CollisionKind::Isotropic, CollisionKind::NonDegenerate, CollisionKind::Degenerate}) {
    const CollisionSpec s(kind, q16, psi_anisotropic);
    double w = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<HyperScalar> f;
      for (int i = 0; i < 16; ++i) f.emplace_back(kind == CollisionKind::Degenerate ? U(rng) : 2.0 * U(rng));
      w = std::max(w, std::abs(q_at_nodes_mass(s, f)));
    }
    worst[to_string(kind)] = w;
  }
  {
    const CollisionSpec s(CollisionKind::FokkerPlanck, gauss_legendre(64, -6.0, 6.0));
    std::uniform_real_distribution<double> A(0.1, 1.0), C(-0.5, 0.5), S(0.5, 0.7);
    double w = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const double a1 = A(rng), c1 = C(rng), s1 = S(rng), a2 = A(rng), c2 = C(rng), s2 = S(rng);
      std::vector<HyperScalar> f;
      for (double vv : s.quad().nodes) {
        const auto v = seed_coordinates(0.0, 0.0, vv, kV)[2];
        const auto z1 = (v - c1) / s1;
        const auto z2 = (v - c2) / s2;
        f.push_back(a1 * exp(-0.5 * z1 * z1) + a2 * exp(-0.5 * z2 * z2));
      }
      w = std::max(w, std::abs(q_at_nodes_mass(s, f)));
    }
    worst[to_string(CollisionKind::FokkerPlanck)] = w;
  }
  bool pass = null_max < 1e-10;
  std::string d = fmt("null space max %.2e; mass of Q:", null_max);
  for (const auto& [k, w] : worst) {
    pass = pass && w < 1e-10;
    d += fmt(" %s=%.2e", k.c_str(), w);
  }
  return {pass, d + " (need < 1e-10)"};
}

Outcome criterion5() {
  const auto q = gauss_legendre(16, -6.0, 6.0);
  double poly = 0.0;
  for (int k = 0; k <= 31; ++k) {
    double s = 0.0;
    for (int i = 0; i < 16; ++i) s += q.weights[i] * std::pow(q.nodes[i], k);
    const double exact = k % 2 ? 0.0 : 2.0 * std::pow(6.0, k + 1) / (k + 1);
    poly = std::max(poly, std::abs(s - exact) / (k % 2 ? std::pow(6.0, k + 1) : exact));
  }
  double m0 = 0.0, m2 = 0.0;
  for (int i = 0; i < 16; ++i) {
    m0 += q.weights[i] * maxwellian(q.nodes[i]);
    m2 += q.weights[i] * q.nodes[i] * q.nodes[i] * maxwellian(q.nodes[i]);
  }
  const bool pass = poly < 1e-10 && std::abs(m0 - 1.0) < 1e-5 && std::abs(m2 - 1.0) < 1e-5;
  return {pass, fmt("v^k max rel err %.2e (need < 1e-10); <M>-1 = %.3e, <v^2 M>-1 = %.3e (need |.| < 1e-5)", poly,
                    m0 - 1.0, m2 - 1.0)};
}

// -phi'' by a direct DFT, independent of the FFT path
std::vector<double> neg_laplacian_dft(const std::vector<double>& phi, double period) {
  const int n = static_cast<int>(phi.size());
  std::vector<double> out(phi.size(), 0.0);
  for (int m = -n / 2 + 1; m < n / 2; ++m) {
    std::complex<double> c = 0.0;
    for (int i = 0; i < n; ++i) c += phi[i] * std::polar(1.0, -2.0 * kPi * m * i / n);
    const double k = 2.0 * kPi * m / period;
    for (int i = 0; i < n; ++i) out[i] += (k * k * c * std::polar(1.0, 2.0 * kPi * m * i / n)).real() / n;
  }
  return out;
}

Outcome criterion6() {
  const int n = 64;
  const double L = 4.0 * kPi;
  std::mt19937_64 rng(6);
  std::normal_distribution<double> N(0.0, 1.0);
  double trip = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    // band-limited zero-mean right-hand side
    std::vector<double> rhs(n, 0.0);
    for (int m = 1; m < n / 2; ++m) {
      const double a = N(rng), b = N(rng);
      for (int i = 0; i < n; ++i) rhs[i] += a * std::cos(2 * kPi * m * i / n) + b * std::sin(2 * kPi * m * i / n);
    }
    const auto r = poisson_periodic(rhs, L);
    const auto back = neg_laplacian_dft(r.phi, L);
    double num = 0, den = 0;
    for (int i = 0; i < n; ++i) {
      num = std::max(num, std::abs(back[i] - rhs[i]));
      den = std::max(den, std::abs(rhs[i]));
    }
    trip = std::max(trip, num / den);
  }
  double pair = 0.0;
  for (double h : {0.9, 1.0, 1.1}) {
    for (double alpha : {0.04, 0.06}) {
      const auto ic = initial_conditions(ProblemId::landau, h, alpha, 0.5);
      std::vector<double> phi(n), rho(n);
      for (int i = 0; i < n; ++i) {
        const double x = (i + 0.5) * L / n;
        phi[i] = ic.phi0(x);
        rho[i] = ic.rho0(x);
        pair = std::max(pair, std::abs(rho[i] - h * (1.0 + alpha * std::cos(0.5 * x))));
        pair = std::max(pair, std::abs(phi[i] - h * alpha * std::cos(0.5 * x) / 0.25));
      }
      const auto lap = neg_laplacian_dft(phi, L);
      for (int i = 0; i < n; ++i) pair = std::max(pair, std::abs(lap[i] - (rho[i] - h)));
      const auto r = poisson_periodic(std::vector<double>(rho.begin(), rho.end()), L);
      for (int i = 0; i < n; ++i) pair = std::max(pair, std::abs(r.phi[i] - phi[i]));
    }
  }
  return {trip < 1e-10 && pair < 1e-10,
          fmt("round trip rel err %.2e; initial pair residual %.2e (need < 1e-10)", trip, pair)};
}

Outcome criterion7() {
  const PhaseGrid grid(8, 96, 0.0, 1.0, -12.0, 12.0);
  const GridCollision op(CollisionKind::Isotropic, {}, grid);
  Outcome out{true, "int vF - E:"};
  for (double E : {0.1, 0.5, 1.0}) {
    const auto s = steady_kinetic_FE(E, op, 1.0);
    const double err = s.flux() - E;
    out.pass = out.pass && std::abs(err) < 2e-3;
    out.detail += fmt(" E=%.1f: %+.2e", E, err);
  }
  out.detail += " (need |.| < 2e-3)";
  return out;
}

RefProblem landau_problem(double eps, double alpha) {
  RefProblem p;
  p.name = "landau";
  p.ic = initial_conditions(ProblemId::landau, 1.0, alpha, 0.5);
  p.alpha = alpha;
  p.collision = CollisionKind::FokkerPlanck;
  p.epsilon = constant_epsilon(eps);
  return p;
}

Outcome criterion8() {
  const PhaseGrid grid(64, 64, 0.0, 4.0 * kPi, -6.0, 6.0);
  TimeOptions o;
  o.dt_out = 0.05;
  const auto kin = kinetic_integrate(landau_problem(1e-2, 0.05), grid, 1.0, o);
  const auto lim = highfield_limit_solve(landau_problem(0.0, 0.05), grid, 1.0, o);
  const double e = relative_l2(kin.rho, lim.rho);
  const RowMat dk = kin.rho.array() - 1.0;
  const RowMat dl = lim.rho.array() - 1.0;
  return {e < 5e-2, fmt("rel l2(rho) = %.3e (need < 5e-2); of rho - 1: %.3e", e, relative_l2(dk, dl))};
}

Outcome criterion9() {
  const PhaseGrid grid(64, 64, 0.0, 4.0 * kPi, -6.0, 6.0);
  TimeOptions o;
  o.dt_out = 0.1;
  const auto s = highfield_limit_solve(landau_problem(0.0, 0.01), grid, 2.0, o);
  auto energy = electric_energy(s.E, grid.dx());
  for (auto& e : energy) e = std::log(e);
  const double k = ls_slope(s.times, energy);
  return {std::abs(k + 1.0) <= 0.1, fmt("log-energy slope %.4f (need -1 +- 0.1)", k)};
}

struct TrainedRun {
  double loss_eval = 0.0;
  double loss_last = 0.0;
  double rho_err = 0.0;
  double drift = 0.0;
  double seconds = 0.0;
};

TrainedRun train_and_score(ExperimentConfig cfg, const std::string& loss, int iterations) {
  cfg.loss = loss;
  if (iterations > 0) cfg.optimizer.iterations = iterations;
  const auto t0 = std::chrono::steady_clock::now();
  const auto ds = sample_dataset(cfg, cfg.seed);
  TrainOptions opts;
  opts.on_log = [&](const TrainLogRow& r) {
    std::printf("  [%s eps=%g] iter %ld loss %.3e\n", loss.c_str(), cfg.epsilon, r.iter, r.loss.total);
    std::fflush(stdout);
  };
  const auto res = train(cfg, ds, opts);
  TrainedRun out;
  out.loss_last = res.history.rows.empty() ? NAN : res.history.rows.back().loss.total;
  out.loss_eval = evaluate_loss(cfg, res.triple, ds.train, ds.uses_f0, cfg.sampling.n_dom, cfg.sampling.n_init,
                                splitmix64(cfg.seed ^ 0xacce97ULL))
                      .total;
  const auto& c = ds.test.front();
  const auto ref = run_reference(cfg, c.h, c.alpha, ReferenceSolver::Auto);
  const auto pred = predict_fields(cfg, res.triple, c, ds.uses_f0, ref.times, ref.grid.xs());
  out.rho_err = relative_l2(pred.rho, ref.rho);
  out.drift = mass_drift(pred.rho);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

struct TrainingCriteria {
  Outcome c10;
  Outcome c11;
};

TrainingCriteria training_criteria(bool want11, int iterations) {
  const auto kin = load_config(std::string(APMIONET_CONFIG_DIR) + "/desk_landau_eps1.ini");
  const auto hf = load_config(std::string(APMIONET_CONFIG_DIR) + "/desk_landau_eps1e-3.ini");
  const auto a = train_and_score(kin, "ap", iterations);
  const auto b = train_and_score(hf, "ap", iterations);
  auto ok = [](const TrainedRun& r) { return r.loss_eval < 1e-3 && r.rho_err < 5e-2 && r.drift < 1e-2; };
  auto line = [](const char* tag, const TrainedRun& r) {
    return fmt("%s: loss %.3e (last batch %.3e), rel l2(rho) %.3e, mass drift %.3e, %.0f s", tag, r.loss_eval,
               r.loss_last, r.rho_err, r.drift, r.seconds);
  };
  TrainingCriteria out;
  out.c10 = {ok(a) && ok(b), line("eps=1", a) + "; " + line("eps=1e-3", b) +
                                 " (need loss < 1e-3, rel l2 < 5e-2, drift < 1e-2)"};
  if (want11) {
    const auto p = train_and_score(hf, "pi", iterations);
    const bool pass = p.rho_err >= 2.0 * b.rho_err || p.loss_eval >= 1e-3;
    out.c11 = {pass, fmt("baseline rel l2(rho) %.3e vs AP %.3e (ratio %.2f), baseline loss %.3e "
                         "(need ratio >= 2 or loss >= 1e-3)",
                         p.rho_err, b.rho_err, p.rho_err / b.rho_err, p.loss_eval)};
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"apmionet acceptance checks"};
  std::vector<int> which;
  int iterations = 0;
  app.add_option("--criterion,-c", which, "criteria to run (2-11; default all)")->check(CLI::Range(2, 11));
  app.add_option("--iterations", iterations, "override the training length of criteria 10 and 11 (smoke runs)")
      ->check(CLI::NonNegativeNumber);
  CLI11_PARSE(app, argc, argv);
  if (which.empty()) {
    for (int i = 2; i <= 11; ++i) which.push_back(i);
  }
  std::sort(which.begin(), which.end());
  which.erase(std::unique(which.begin(), which.end()), which.end());

  const std::map<int, std::function<Outcome()>> quick{{2, criterion2}, {3, criterion3}, {4, criterion4},
                                                      {5, criterion5}, {6, criterion6}, {7, criterion7},
                                                      {8, criterion8}, {9, criterion9}};
  bool all = true;
  auto report = [&](int id, const Outcome& o, double secs) {
    all = all && o.pass;
    std::printf("criterion %d: %s %s [%.1f s]\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
  };
  const bool want10 = std::count(which.begin(), which.end(), 10) > 0;
  const bool want11 = std::count(which.begin(), which.end(), 11) > 0;
  for (int id : which) {
    if (id >= 10) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = quick.at(id)();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    report(id, o, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  if (want10 || want11) {
    const auto t0 = std::chrono::steady_clock::now();
    TrainingCriteria t;
    try {
      t = training_criteria(want11, iterations);
    } catch (const std::exception& e) {
      t.c10 = t.c11 = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (iterations > 0) {
      t.c10.detail += fmt(" [iterations overridden to %d]", iterations);
      t.c11.detail += fmt(" [iterations overridden to %d]", iterations);
    }
    if (want10) report(10, t.c10, secs);
    if (want11) report(11, t.c11, secs);
  }
  return all ? 0 : 1;
}
