#include "apmionet/refsolver/steady.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "apmionet/diffcore/errors.hpp"

namespace apmionet {

GridCollision::GridCollision(CollisionKind kind, const CrossSection& psi, const PhaseGrid& grid)
    : kind_(kind), grid_(grid) {
  const int n = grid.nv();
  const double dv = grid.dv();
  m_.resize(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) m_[static_cast<std::size_t>(j)] = apmionet::maxwellian(grid.v(j));
  if (!has_kernel()) return;
  const bool unit = kind == CollisionKind::Isotropic || !psi;
  k_.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) k_(i, j) = dv * (unit ? 1.0 : psi(grid.v(i), grid.v(j)));
  }
  if ((k_ - k_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * k_.cwiseAbs().maxCoeff()) {
    throw std::invalid_argument("grid collision: cross section is not symmetric");
  }
  if (k_.minCoeff() <= 0.0) throw std::invalid_argument("grid collision: cross section must be positive");
  km_ = k_ * Eigen::Map<const Eigen::VectorXd>(m_.data(), n);
}

void GridCollision::add_apply(const RowMat& F, std::span<const double> scale, RowMat& out) const {
  if (!has_kernel()) return;
  const Eigen::Map<const Eigen::RowVectorXd> M(m_.data(), grid_.nv());
  const RowMat KF = F * k_.transpose();
  if (kind_ == CollisionKind::Degenerate) {
    const RowMat FM = F.array().rowwise() * M.array();
    const RowMat KFM = FM * k_.transpose();
    for (Eigen::Index i = 0; i < F.rows(); ++i) {
      const double s = scale[static_cast<std::size_t>(i)];
      out.row(i).array() += s * ((1.0 - F.row(i).array()) * M.array() * KF.row(i).array() -
                                 F.row(i).array() * (km_.transpose().array() - KFM.row(i).array()));
    }
    return;
  }
  for (Eigen::Index i = 0; i < F.rows(); ++i) {
    const double s = scale[static_cast<std::size_t>(i)];
    out.row(i).array() += s * (M.array() * KF.row(i).array() - F.row(i).array() * km_.transpose().array());
  }
}

std::vector<double> GridCollision::apply(std::span<const double> f) const {
  const int n = grid_.nv();
  if (static_cast<int>(f.size()) != n) throw std::invalid_argument("grid collision: size mismatch");
  RowMat F = Eigen::Map<const Eigen::RowVectorXd>(f.data(), n);
  RowMat out = RowMat::Zero(1, n);
  const double one = 1.0;
  add_apply(F, std::span<const double>(&one, 1), out);
  return std::vector<double>(out.data(), out.data() + n);
}

Eigen::MatrixXd GridCollision::jacobian(std::span<const double> f) const {
  const int n = grid_.nv();
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  if (!has_kernel()) return J;
  const Eigen::Map<const Eigen::VectorXd> F(f.data(), n);
  const Eigen::Map<const Eigen::VectorXd> M(m_.data(), n);
  if (kind_ == CollisionKind::Degenerate) {
    const Eigen::VectorXd KF = k_ * F;
    const Eigen::VectorXd KFM = k_ * F.cwiseProduct(M);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < n; ++k) J(i, k) = (1.0 - F(i)) * M(i) * k_(i, k) + F(i) * k_(i, k) * M(k);
      J(i, i) -= M(i) * KF(i) + km_(i) - KFM(i);
    }
    return J;
  }
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) J(i, k) = M(i) * k_(i, k);
    J(i, i) -= km_(i);
  }
  return J;
}

double GridCollision::loss_rate(const RowMat& F) const {
  if (!has_kernel()) return 0.0;
  if (kind_ != CollisionKind::Degenerate) return km_.maxCoeff();
  const Eigen::Map<const Eigen::RowVectorXd> M(m_.data(), grid_.nv());
  const RowMat KF = F * k_.transpose();
  const RowMat KFM = RowMat(F.array().rowwise() * M.array()) * k_.transpose();
  double r = 0.0;
  for (Eigen::Index i = 0; i < F.rows(); ++i) {
    r = std::max(r, (M.array() * KF.row(i).array() + km_.transpose().array() - KFM.row(i).array()).maxCoeff());
  }
  return r;
}

double SteadyState::mass() const {
  double s = 0.0;
  for (double f : F) s += f;
  return s * grid->dv();
}

double SteadyState::flux() const {
  double s = 0.0;
  for (int j = 0; j < grid->nv(); ++j) s += grid->v(j) * F[static_cast<std::size_t>(j)];
  return s * grid->dv();
}

double fermi_dirac_mu(const PhaseGrid& grid, double rho, double shift) {
  const double cap = grid.v_max() - grid.v_min();
  if (!(rho > 0.0 && rho < cap)) throw std::invalid_argument("fermi_dirac_mu: density outside (0, v-range)");
  auto mass = [&](double mu) {
    double s = 0.0;
    for (int j = 0; j < grid.nv(); ++j) s += fermi_dirac(grid.v(j) - shift, mu);
    return s * grid.dv();
  };
  double lo = -60.0;
  double hi = 0.5 * cap * cap + 60.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mass(mid) < rho ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

// Transport part: d/dv of the face flux c F - [FP] dF/dv with c = E - [FP] v,
// first-order upwind, no flux through the outer faces.
Eigen::MatrixXd transport_matrix(double E, const GridCollision& op) {
  const auto& g = op.grid();
  const int n = g.nv();
  const double dv = g.dv();
  const bool fp = op.kind() == CollisionKind::FokkerPlanck;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j + 1 < n; ++j) {
    const double c = E - (fp ? g.v_min() + (j + 1) * dv : 0.0);
    // flux through face j+1/2 as a row over F
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
    if (c > 0.0) {
      row(j) += c;
    } else {
      row(j + 1) += c;
    }
    if (fp) {
      row(j + 1) -= 1.0 / dv;
      row(j) += 1.0 / dv;
    }
    A.row(j) += row / dv;
    A.row(j + 1) -= row / dv;
  }
  return A;
}

}  // namespace

SteadyState steady_kinetic_FE(double E, const GridCollision& op, double rho_target) {
  const auto& g = op.grid();
  const int n = g.nv();
  const double dv = g.dv();
  if (!std::isfinite(E)) throw std::invalid_argument("steady_kinetic_FE: non-finite field");
  if (!(rho_target > 0.0)) throw std::invalid_argument("steady_kinetic_FE: rho_target must be positive");
  const Eigen::MatrixXd T = transport_matrix(E, op);
  SteadyState st;
  st.grid = &op.grid();
  auto residual = [&](const Eigen::VectorXd& F) {
    const auto Q = op.apply(std::span<const double>(F.data(), static_cast<std::size_t>(n)));
    Eigen::VectorXd r = T * F - Eigen::Map<const Eigen::VectorXd>(Q.data(), n);
    return r;
  };
  // the normalization row replaces the first equation
  const int pin = 0;

  if (op.kind() != CollisionKind::Degenerate) {
    Eigen::MatrixXd A = T - op.jacobian(std::vector<double>(static_cast<std::size_t>(n), 0.0));
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    A.row(pin).setConstant(dv);
    b(pin) = rho_target;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (!lu.isInvertible()) throw NumericFailure("steady_kinetic_FE: singular system at E = " + std::to_string(E));
    const Eigen::VectorXd F = lu.solve(b);
    st.F.assign(F.data(), F.data() + n);
    st.residual = residual(F).cwiseAbs().maxCoeff();
    st.iterations = 1;
    if (!(st.residual < 1e-8) || std::abs(st.mass() - rho_target) > 1e-10 * std::max(1.0, rho_target)) {
      throw NumericFailure("steady_kinetic_FE: residual " + std::to_string(st.residual) + " at E = " +
                           std::to_string(E));
    }
    return st;
  }

  Eigen::VectorXd F(n);
  const double mu = fermi_dirac_mu(g, rho_target, E);
  for (int j = 0; j < n; ++j) F(j) = fermi_dirac(g.v(j) - E, mu);
  auto full_residual = [&](const Eigen::VectorXd& X) {
    Eigen::VectorXd r = residual(X);
    r(pin) = X.sum() * dv - rho_target;
    return r;
  };
  Eigen::VectorXd r = full_residual(F);
  double rn = r.cwiseAbs().maxCoeff();
  constexpr int kMaxIter = 10000;
  int it = 0;
  while (rn >= 1e-10 && it < kMaxIter) {
    ++it;
    Eigen::MatrixXd J = T - op.jacobian(std::span<const double>(F.data(), static_cast<std::size_t>(n)));
    J.row(pin).setConstant(dv);
    const Eigen::VectorXd step = J.fullPivLu().solve(-r);
    double omega = 1.0;
    bool accepted = false;
    while (omega >= 1.0 / 1024.0) {
      Eigen::VectorXd trial = (F + omega * step).cwiseMax(0.0).cwiseMin(1.0);
      const Eigen::VectorXd rt = full_residual(trial);
      const double tn = rt.cwiseAbs().maxCoeff();
      if (tn < rn) {
        F = trial;
        r = rt;
        rn = tn;
        accepted = true;
        break;
      }
      omega *= 0.5;
    }
    if (!accepted) break;
  }
  st.F.assign(F.data(), F.data() + n);
  st.iterations = it;
  st.residual = residual(F).cwiseAbs().maxCoeff();
  if (!(rn < 1e-10) || !(st.residual < 1e-8)) {
    throw NumericFailure("steady_kinetic_FE: degenerate iteration stalled after " + std::to_string(it) +
                         " steps, residual " + std::to_string(rn) + " at E = " + std::to_string(E));
  }
  return st;
}

}  // namespace apmionet
