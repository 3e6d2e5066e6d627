#pragma once

#include <string>

#include "apmionet/kinetics/collisions.hpp"
#include "apmionet/refsolver/field.hpp"
#include "apmionet/residuals/loss.hpp"
#include "apmionet/residuals/problems.hpp"

namespace apmionet {

struct RefProblem {
  std::string name;
  InitialCondition ic;
  /// Perturbation amplitude, carried as metadata.
  double alpha = 0.0;
  CollisionKind collision = CollisionKind::FokkerPlanck;
  /// Kernel kinds only; empty means 1.
  CrossSection psi;
  EpsilonProfile epsilon = constant_epsilon(1.0);
  std::string epsilon_label = "1";
};

struct TimeOptions {
  /// 0 picks the step from the stability bound and cfl.
  double dt = 0.0;
  double cfl = 0.4;
  double dt_out = 0.05;
  bool keep_f = false;
};

/// Output times 0, dt_out, 2 dt_out, ..., T (the last one clipped to T).
std::vector<double> output_times(double T, double dt_out);

/// Largest forward-Euler-stable step of the kinetic scheme at state F.
double kinetic_stability_bound(const RefProblem& prob, const PhaseGrid& grid, const RowMat& F);

/// Explicit SSP-RK2 finite-volume integration of the scaled kinetic equation
/// eps f_t + eps v f_x - phi_x f_v = Q(f) coupled to -phi_xx = rho - h.
/// Throws NumericFailure when the step exceeds the stability bound.
SolutionField kinetic_integrate(const RefProblem& prob, const PhaseGrid& grid, double T, const TimeOptions& opt = {});

/// Initial distribution sampled at the cell centres.
RowMat sample_initial(const RefProblem& prob, const PhaseGrid& grid);

}  // namespace apmionet
