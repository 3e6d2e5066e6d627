#pragma once

#include "apmionet/refsolver/kinetic.hpp"
#include "apmionet/refsolver/steady.hpp"

namespace apmionet {

/// Drift flux j(rho, E) of the epsilon -> 0 limit. FokkerPlanck uses rho E;
/// the kernel kinds tabulate steady_kinetic_FE (201 field values, linear
/// interpolation; the degenerate kind also tabulates rho). Tables are rebuilt
/// with a wider range whenever a query falls outside.
class DriftFlux {
 public:
  DriftFlux(const GridCollision& op, double e_max, double rho_min, double rho_max, int n_field = 201, int n_rho = 33);

  double operator()(double rho, double E);
  /// Upper bound of |dj/drho| over the current table.
  double max_speed(double e_abs);

 private:
  void build(double e_max, double rho_min, double rho_max);
  double sigma(double E);

  const GridCollision& op_;
  int n_field_;
  int n_rho_;
  double e_max_ = 0.0;
  double rho_min_ = 0.0;
  double rho_max_ = 0.0;
  std::vector<double> table_;  // n_rho x n_field, or n_field for linear kinds
};

/// Conservative MUSCL upwind finite volumes with SSP-RK2 for
/// rho_t + (j(rho, E))_x = 0, -phi_xx = rho - h.
SolutionField highfield_limit_solve(const RefProblem& prob, const PhaseGrid& grid, double T,
                                    const TimeOptions& opt = {});

}  // namespace apmionet
