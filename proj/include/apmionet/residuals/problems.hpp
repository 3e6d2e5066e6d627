#pragma once

#include <functional>
#include <string>

namespace apmionet {

enum class ProblemId { landau, double_peak, two_stream, bump_on_tail, mixing };

ProblemId parse_problem(const std::string& s);
std::string to_string(ProblemId p);

/// Phase-space box: t in [0, T], x in [x_min, x_min + period), v in [v_min, v_max].
struct Domain {
  double T = 1.0;
  double x_min = 0.0;
  double period = 1.0;
  double v_min = -6.0;
  double v_max = 6.0;
};

/// Default box of each problem (wave number k sets the period except for mixing).
Domain default_domain(ProblemId p, double k);

/// Initial data of one couple. h is the uniform background charge.
struct InitialCondition {
  std::function<double(double, double)> f0;
  std::function<double(double)> rho0;
  std::function<double(double)> phi0;
  double h = 1.0;
  /// Mean of rho0 - h removed before solving for phi0 (nonzero only when the
  /// data are not globally neutral).
  double neutrality_defect = 0.0;
};

/// rho0 is closed form where available and a fine quadrature over
/// [v_min, v_max] otherwise. phi0 solves -phi0'' = rho0 - h with zero mean.
/// alpha is unused for the mixing problem.
InitialCondition initial_conditions(ProblemId p, double h, double alpha, double k, double v_min, double v_max);
InitialCondition initial_conditions(ProblemId p, double h, double alpha, double k);

/// Piecewise scale parameter of the mixing problem, defined on [-1, 1].
double mixing_epsilon(double x, double eps0 = 1e-3);

}  // namespace apmionet
