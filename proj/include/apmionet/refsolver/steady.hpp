#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "apmionet/kinetics/collisions.hpp"
#include "apmionet/refsolver/field.hpp"

namespace apmionet {

/// Collision operators on the cell centres of a uniform velocity grid
/// (midpoint rule). The FokkerPlanck kind has no kernel part: its
/// differential form is discretized by the solvers as a flux.
class GridCollision {
 public:
  /// psi is ignored for FokkerPlanck and Isotropic; an empty psi means 1.
  GridCollision(CollisionKind kind, const CrossSection& psi, const PhaseGrid& grid);

  CollisionKind kind() const { return kind_; }
  bool has_kernel() const { return kind_ != CollisionKind::FokkerPlanck; }
  const PhaseGrid& grid() const { return grid_; }
  std::span<const double> maxwellian() const { return m_; }

  /// Q of every row of F (rows are x cells), added to out scaled row-wise by
  /// scale[i].
  void add_apply(const RowMat& F, std::span<const double> scale, RowMat& out) const;
  std::vector<double> apply(std::span<const double> f) const;
  Eigen::MatrixXd jacobian(std::span<const double> f) const;
  /// Largest loss frequency over the rows of F.
  double loss_rate(const RowMat& F) const;

 private:
  CollisionKind kind_;
  PhaseGrid grid_;
  std::vector<double> m_;
  Eigen::MatrixXd k_;   // dv * psi(v_i, v_j)
  Eigen::VectorXd km_;  // k_ * M
};

struct SteadyState {
  std::vector<double> F;
  double residual = 0.0;
  int iterations = 0;
  double mass() const;
  double flux() const;
  const PhaseGrid* grid = nullptr;
};

/// Solves E dF/dv - Q(F) = 0 with sum F dv = rho_target on the velocity grid.
/// Linear kinds use one dense solve with a normalization row; the degenerate
/// kind uses damped Newton steps started from a shifted Fermi-Dirac profile.
/// Throws NumericFailure on a singular system or non-convergence.
SteadyState steady_kinetic_FE(double E, const GridCollision& op, double rho_target);

/// mu such that the grid mass of fermi_dirac(v - shift, mu) equals rho.
double fermi_dirac_mu(const PhaseGrid& grid, double rho, double shift = 0.0);

}  // namespace apmionet
