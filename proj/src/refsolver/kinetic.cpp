#include "apmionet/refsolver/kinetic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "apmionet/diffcore/errors.hpp"
#include "apmionet/refsolver/poisson.hpp"
#include "apmionet/refsolver/steady.hpp"

namespace apmionet {

std::vector<double> output_times(double T, double dt_out) {
  if (!(T >= 0.0) || !(dt_out > 0.0)) throw std::invalid_argument("output_times: need T >= 0 and dt_out > 0");
  const auto n = static_cast<long>(std::ceil(T / dt_out - 1e-9));
  std::vector<double> t;
  for (long k = 0; k <= n; ++k) t.push_back(std::min(static_cast<double>(k) * dt_out, T));
  return t;
}

RowMat sample_initial(const RefProblem& prob, const PhaseGrid& grid) {
  RowMat F(grid.nx(), grid.nv());
  for (int i = 0; i < grid.nx(); ++i) {
    for (int j = 0; j < grid.nv(); ++j) F(i, j) = prob.ic.f0(grid.x(i), grid.v(j));
  }
  return F;
}

namespace {

double minmod(double a, double b) {
  if (a * b <= 0.0) return 0.0;
  return std::abs(a) < std::abs(b) ? a : b;
}

class KineticScheme {
 public:
  KineticScheme(const RefProblem& prob, const PhaseGrid& grid)
      : prob_(prob),
        g_(grid),
        op_(prob.collision, prob.psi, grid),
        poisson_(grid.nx(), grid.period()),
        inv_eps_(static_cast<std::size_t>(grid.nx())),
        rho_(static_cast<std::size_t>(grid.nx())),
        phi_(rho_.size()),
        E_(rho_.size()),
        sx_(grid.nx(), grid.nv()) {
    for (int i = 0; i < g_.nx(); ++i) {
      const double e = prob.epsilon(g_.x(i));
      if (!(e > 0.0)) throw std::invalid_argument("kinetic_integrate needs epsilon > 0");
      inv_eps_[static_cast<std::size_t>(i)] = 1.0 / e;
    }
  }

  bool fp() const { return prob_.collision == CollisionKind::FokkerPlanck; }

  // rho = sum f dv, then the field.
  void field(const RowMat& F) {
    const double dv = g_.dv();
    std::vector<double> rhs(rho_.size());
    for (int i = 0; i < g_.nx(); ++i) {
      rho_[static_cast<std::size_t>(i)] = F.row(i).sum() * dv;
      rhs[static_cast<std::size_t>(i)] = rho_[static_cast<std::size_t>(i)] - prob_.ic.h;
    }
    poisson_.solve(rhs, phi_, E_);
  }

  double rate(const RowMat& F) {
    field(F);
    const double vmax = std::max(std::abs(g_.v_min()), std::abs(g_.v_max()));
    double r = 2.0 * vmax / g_.dx();
    double ie = 0.0;
    for (int i = 0; i < g_.nx(); ++i) {
      const auto k = static_cast<std::size_t>(i);
      ie = std::max(ie, inv_eps_[k]);
      const double c = std::abs(E_[k]) + (fp() ? vmax : 0.0);
      r = std::max(r, 2.0 * vmax / g_.dx() + 2.0 * c * inv_eps_[k] / g_.dv());
    }
    if (fp()) r += 2.0 * ie / (g_.dv() * g_.dv());
    r += ie * op_.loss_rate(F);
    return r;
  }

  void rhs(const RowMat& F, RowMat& out) {
    field(F);
    const int nx = g_.nx();
    const int nv = g_.nv();
    const double dx = g_.dx();
    const double dv = g_.dv();
    out.setZero(nx, nv);

    for (int i = 0; i < nx; ++i) {
      const int im = (i + nx - 1) % nx;
      const int ip = (i + 1) % nx;
      for (int j = 0; j < nv; ++j) sx_(i, j) = minmod(F(i, j) - F(im, j), F(ip, j) - F(i, j));
    }
    for (int i = 0; i < nx; ++i) {
      const int ip = (i + 1) % nx;
      for (int j = 0; j < nv; ++j) {
        const double v = g_.v(j);
        const double face = v > 0.0 ? F(i, j) + 0.5 * sx_(i, j) : F(ip, j) - 0.5 * sx_(ip, j);
        const double flux = v * face / dx;
        out(i, j) -= flux;
        out(ip, j) += flux;
      }
    }

    std::vector<double> s(static_cast<std::size_t>(nv));
    for (int i = 0; i < nx; ++i) {
      const double ie = inv_eps_[static_cast<std::size_t>(i)];
      const double Ei = E_[static_cast<std::size_t>(i)];
      auto at = [&](int j) { return (j < 0 || j >= nv) ? 0.0 : F(i, j); };
      for (int j = 0; j < nv; ++j) s[static_cast<std::size_t>(j)] = minmod(at(j) - at(j - 1), at(j + 1) - at(j));
      for (int j = 0; j + 1 < nv; ++j) {
        const double vf = g_.v_min() + (j + 1) * dv;
        const double a = (Ei - (fp() ? vf : 0.0)) * ie;
        const double face = a > 0.0 ? F(i, j) + 0.5 * s[static_cast<std::size_t>(j)]
                                    : F(i, j + 1) - 0.5 * s[static_cast<std::size_t>(j + 1)];
        double flux = a * face;
        if (fp()) flux -= ie * (F(i, j + 1) - F(i, j)) / dv;
        out(i, j) -= flux / dv;
        out(i, j + 1) += flux / dv;
      }
    }
    op_.add_apply(F, inv_eps_, out);
  }

  const std::vector<double>& rho() const { return rho_; }
  const std::vector<double>& E() const { return E_; }

 private:
  const RefProblem& prob_;
  PhaseGrid g_;
  GridCollision op_;
  PoissonSolver poisson_;
  std::vector<double> inv_eps_;
  std::vector<double> rho_, phi_, E_;
  RowMat sx_;
};

}  // namespace

double kinetic_stability_bound(const RefProblem& prob, const PhaseGrid& grid, const RowMat& F) {
  KineticScheme s(prob, grid);
  return 1.0 / s.rate(F);
}

SolutionField kinetic_integrate(const RefProblem& prob, const PhaseGrid& grid, double T, const TimeOptions& opt) {
  if (!(opt.cfl > 0.0 && opt.cfl <= 1.0)) throw std::invalid_argument("kinetic_integrate: cfl must be in (0, 1]");
  if (opt.dt < 0.0) throw std::invalid_argument("kinetic_integrate: negative dt");
  KineticScheme scheme(prob, grid);
  SolutionField out;
  out.grid = grid;
  out.problem = prob.name;
  out.h = prob.ic.h;
  out.alpha = prob.alpha;
  out.epsilon = prob.epsilon_label;
  out.times = output_times(T, opt.dt_out);
  const auto nt = static_cast<Eigen::Index>(out.times.size());
  out.rho.resize(nt, grid.nx());
  out.E.resize(nt, grid.nx());

  RowMat F = sample_initial(prob, grid);
  RowMat k1, k2, F1;
  auto record = [&](Eigen::Index it) {
    scheme.field(F);
    for (int i = 0; i < grid.nx(); ++i) {
      out.rho(it, i) = scheme.rho()[static_cast<std::size_t>(i)];
      out.E(it, i) = scheme.E()[static_cast<std::size_t>(i)];
    }
    if (opt.keep_f) out.f.push_back(F);
  };
  record(0);
  for (Eigen::Index it = 1; it < nt; ++it) {
    const double span = out.times[static_cast<std::size_t>(it)] - out.times[static_cast<std::size_t>(it - 1)];
    const double bound = 1.0 / scheme.rate(F);
    const double target = opt.dt > 0.0 ? opt.dt : opt.cfl * bound;
    const auto nsub = std::max<long>(1, static_cast<long>(std::ceil(span / target - 1e-12)));
    const double dt = span / static_cast<double>(nsub);
    for (long s = 0; s < nsub; ++s) {
      const double b = 1.0 / scheme.rate(F);
      if (dt > b) {
        throw NumericFailure("kinetic_integrate: step " + std::to_string(dt) + " exceeds the stability bound " +
                             std::to_string(b));
      }
      scheme.rhs(F, k1);
      F1 = F + dt * k1;
      scheme.rhs(F1, k2);
      F = 0.5 * (F + F1 + dt * k2);
      if (!F.allFinite()) throw NumericFailure("kinetic_integrate: non-finite distribution");
    }
    record(it);
  }
  out.validate();
  return out;
}

}  // namespace apmionet
