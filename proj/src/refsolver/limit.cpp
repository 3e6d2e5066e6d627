#include "apmionet/refsolver/limit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "apmionet/diffcore/errors.hpp"
#include "apmionet/refsolver/poisson.hpp"

namespace apmionet {

namespace {

double minmod(double a, double b) {
  if (a * b <= 0.0) return 0.0;
  return std::abs(a) < std::abs(b) ? a : b;
}

bool linear_kind(CollisionKind k) { return k != CollisionKind::Degenerate; }

}  // namespace

DriftFlux::DriftFlux(const GridCollision& op, double e_max, double rho_min, double rho_max, int n_field, int n_rho)
    : op_(op), n_field_(n_field), n_rho_(n_rho) {
  if (n_field < 3 || n_rho < 2) throw std::invalid_argument("drift table too small");
  build(std::max(e_max, 1e-3), rho_min, rho_max);
}

void DriftFlux::build(double e_max, double rho_min, double rho_max) {
  e_max_ = e_max;
  rho_min_ = rho_min;
  rho_max_ = rho_max;
  if (op_.kind() == CollisionKind::FokkerPlanck) return;
  const bool lin = linear_kind(op_.kind());
  const int nr = lin ? 1 : n_rho_;
  table_.assign(static_cast<std::size_t>(nr * n_field_), 0.0);
  for (int r = 0; r < nr; ++r) {
    const double rho = lin ? 1.0 : rho_min_ + (rho_max_ - rho_min_) * r / (n_rho_ - 1);
    for (int e = 0; e < n_field_; ++e) {
      const double E = -e_max_ + 2.0 * e_max_ * e / (n_field_ - 1);
      table_[static_cast<std::size_t>(r * n_field_ + e)] = steady_kinetic_FE(E, op_, rho).flux();
    }
  }
}

double DriftFlux::sigma(double E) {
  const double u = (E + e_max_) / (2.0 * e_max_) * (n_field_ - 1);
  const int e = std::clamp(static_cast<int>(std::floor(u)), 0, n_field_ - 2);
  const double w = u - e;
  return (1.0 - w) * table_[static_cast<std::size_t>(e)] + w * table_[static_cast<std::size_t>(e + 1)];
}

double DriftFlux::operator()(double rho, double E) {
  if (op_.kind() == CollisionKind::FokkerPlanck) return rho * E;
  if (std::abs(E) > e_max_) build(2.0 * std::abs(E), rho_min_, rho_max_);
  if (linear_kind(op_.kind())) return rho * sigma(E);
  if (rho < rho_min_ || rho > rho_max_) {
    const double span = rho_max_ - rho_min_;
    build(e_max_, std::max(0.5 * std::min(rho, rho_min_), std::min(rho, rho_min_) - span),
          std::max(rho, rho_max_) + span);
  }
  const double ur = (rho - rho_min_) / (rho_max_ - rho_min_) * (n_rho_ - 1);
  const int r = std::clamp(static_cast<int>(std::floor(ur)), 0, n_rho_ - 2);
  const double wr = ur - r;
  const double ue = (E + e_max_) / (2.0 * e_max_) * (n_field_ - 1);
  const int e = std::clamp(static_cast<int>(std::floor(ue)), 0, n_field_ - 2);
  const double we = ue - e;
  auto T = [&](int a, int b) { return table_[static_cast<std::size_t>(a * n_field_ + b)]; };
  return (1.0 - wr) * ((1.0 - we) * T(r, e) + we * T(r, e + 1)) + wr * ((1.0 - we) * T(r + 1, e) + we * T(r + 1, e + 1));
}

double DriftFlux::max_speed(double e_abs) {
  if (op_.kind() == CollisionKind::FokkerPlanck) return e_abs;
  if (e_abs > e_max_) build(2.0 * e_abs, rho_min_, rho_max_);
  if (linear_kind(op_.kind())) return std::max(std::abs(sigma(e_abs)), std::abs(sigma(-e_abs)));
  double s = 0.0;
  const double dr = (rho_max_ - rho_min_) / (n_rho_ - 1);
  for (int r = 0; r + 1 < n_rho_; ++r) {
    for (int e = 0; e < n_field_; ++e) {
      const double d = table_[static_cast<std::size_t>((r + 1) * n_field_ + e)] - table_[static_cast<std::size_t>(r * n_field_ + e)];
      s = std::max(s, std::abs(d) / dr);
    }
  }
  return s;
}

SolutionField highfield_limit_solve(const RefProblem& prob, const PhaseGrid& grid, double T, const TimeOptions& opt) {
  if (!(opt.cfl > 0.0 && opt.cfl <= 1.0)) throw std::invalid_argument("highfield_limit_solve: cfl must be in (0, 1]");
  const int nx = grid.nx();
  const double dx = grid.dx();
  PoissonSolver poisson(nx, grid.period());
  GridCollision op(prob.collision, prob.psi, grid);

  std::vector<double> rho(static_cast<std::size_t>(nx));
  for (int i = 0; i < nx; ++i) rho[static_cast<std::size_t>(i)] = prob.ic.rho0(grid.x(i));
  std::vector<double> phi(rho.size()), E(rho.size()), rhs(rho.size()), slope(rho.size());
  auto field = [&](const std::vector<double>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) rhs[i] = r[i] - prob.ic.h;
    poisson.solve(rhs, phi, E);
  };
  field(rho);
  const auto [rmin, rmax] = std::minmax_element(rho.begin(), rho.end());
  double emax = 0.0;
  for (double e : E) emax = std::max(emax, std::abs(e));
  const double rspan = std::max(*rmax - *rmin, 0.05 * *rmax);
  DriftFlux drift(op, 2.0 * emax, std::max(0.5 * *rmin, *rmin - rspan), *rmax + rspan);

  auto speed = [&](const std::vector<double>& r) {
    field(r);
    double e = 0.0;
    for (double x : E) e = std::max(e, std::abs(x));
    return 2.0 * drift.max_speed(e) / dx;
  };
  auto rate_rhs = [&](const std::vector<double>& r, std::vector<double>& out) {
    field(r);
    for (int i = 0; i < nx; ++i) {
      const auto k = static_cast<std::size_t>(i);
      slope[k] = minmod(r[k] - r[static_cast<std::size_t>((i + nx - 1) % nx)], r[static_cast<std::size_t>((i + 1) % nx)] - r[k]);
    }
    out.assign(r.size(), 0.0);
    for (int i = 0; i < nx; ++i) {
      const auto k = static_cast<std::size_t>(i);
      const auto kp = static_cast<std::size_t>((i + 1) % nx);
      const double ef = 0.5 * (E[k] + E[kp]);
      const double up = ef > 0.0 ? r[k] + 0.5 * slope[k] : r[kp] - 0.5 * slope[kp];
      const double flux = drift(up, ef) / dx;
      out[k] -= flux;
      out[kp] += flux;
    }
  };

  SolutionField out;
  out.grid = grid;
  out.problem = prob.name;
  out.h = prob.ic.h;
  out.alpha = prob.alpha;
  out.epsilon = "limit";
  out.times = output_times(T, opt.dt_out);
  const auto nt = static_cast<Eigen::Index>(out.times.size());
  out.rho.resize(nt, nx);
  out.E.resize(nt, nx);
  auto record = [&](Eigen::Index it) {
    field(rho);
    for (int i = 0; i < nx; ++i) {
      out.rho(it, i) = rho[static_cast<std::size_t>(i)];
      out.E(it, i) = E[static_cast<std::size_t>(i)];
    }
  };
  record(0);
  std::vector<double> k1, k2, r1(rho.size());
  for (Eigen::Index it = 1; it < nt; ++it) {
    const double span = out.times[static_cast<std::size_t>(it)] - out.times[static_cast<std::size_t>(it - 1)];
    const double rate = std::max(speed(rho), 1e-12);
    const double target = opt.dt > 0.0 ? opt.dt : opt.cfl / rate;
    const auto nsub = std::max<long>(1, static_cast<long>(std::ceil(span / target - 1e-12)));
    const double dt = span / static_cast<double>(nsub);
    for (long s = 0; s < nsub; ++s) {
      const double b = 1.0 / std::max(speed(rho), 1e-12);
      if (dt > b) {
        throw NumericFailure("highfield_limit_solve: step " + std::to_string(dt) + " violates the CFL bound " +
                             std::to_string(b));
      }
      rate_rhs(rho, k1);
      for (std::size_t i = 0; i < rho.size(); ++i) r1[i] = rho[i] + dt * k1[i];
      rate_rhs(r1, k2);
      for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = 0.5 * (rho[i] + r1[i] + dt * k2[i]);
    }
    for (double r : rho) {
      if (!std::isfinite(r)) throw NumericFailure("highfield_limit_solve: non-finite density");
    }
    record(it);
  }
  out.validate();
  return out;
}

}  // namespace apmionet
