#include "apmionet/residuals/problems.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "apmionet/kinetics/quadrature.hpp"

namespace apmionet {

namespace {

constexpr double kInvSqrt2Pi = 0.398942280401432677939946;

double velocity_profile(ProblemId p, double v) {
  switch (p) {
    case ProblemId::landau:
    case ProblemId::mixing:
      return kInvSqrt2Pi * std::exp(-0.5 * v * v);
    case ProblemId::double_peak:
      return kInvSqrt2Pi * 0.5 * (std::exp(-0.5 * (v - 1.5) * (v - 1.5)) + std::exp(-0.5 * (v + 1.5) * (v + 1.5)));
    case ProblemId::two_stream:
      return kInvSqrt2Pi * v * v * std::exp(-0.5 * v * v);
    case ProblemId::bump_on_tail:
      return kInvSqrt2Pi * (0.9 * std::exp(-0.5 * v * v) + 0.2 * std::exp(-4.0 * (v - 4.5) * (v - 4.5)));
  }
  return 0.0;
}

double profile_mass(ProblemId p, double v_min, double v_max) {
  switch (p) {
    case ProblemId::landau:
    case ProblemId::double_peak:
    case ProblemId::mixing:
      return 1.0;
    default:
      break;
  }
  // 8 panels of 32-point Gauss-Legendre; the bump has width ~0.35.
  const int panels = 8;
  const double hw = (v_max - v_min) / panels;
  double s = 0.0;
  for (int k = 0; k < panels; ++k) {
    const auto q = gauss_legendre(32, v_min + k * hw, v_min + (k + 1) * hw);
    for (int i = 0; i < q.size(); ++i) s += q.weights[i] * velocity_profile(p, q.nodes[i]);
  }
  return s;
}

}  // namespace

ProblemId parse_problem(const std::string& s) {
  if (s == "landau") return ProblemId::landau;
  if (s == "double_peak") return ProblemId::double_peak;
  if (s == "two_stream") return ProblemId::two_stream;
  if (s == "bump_on_tail") return ProblemId::bump_on_tail;
  if (s == "mixing") return ProblemId::mixing;
  throw std::invalid_argument("unknown problem '" + s + "'");
}

std::string to_string(ProblemId p) {
  switch (p) {
    case ProblemId::landau: return "landau";
    case ProblemId::double_peak: return "double_peak";
    case ProblemId::two_stream: return "two_stream";
    case ProblemId::bump_on_tail: return "bump_on_tail";
    case ProblemId::mixing: return "mixing";
  }
  return "?";
}

Domain default_domain(ProblemId p, double k) {
  if (!(k > 0.0)) throw std::invalid_argument("wave number must be positive");
  switch (p) {
    case ProblemId::landau:
      return {5.0, 0.0, 2.0 * std::numbers::pi / k, -6.0, 6.0};
    case ProblemId::double_peak:
    case ProblemId::two_stream:
      return {1.0, 0.0, 2.0 * std::numbers::pi / k, -6.0, 6.0};
    case ProblemId::bump_on_tail:
      return {1.0, 0.0, 2.0 * std::numbers::pi / k, -8.0, 8.0};
    case ProblemId::mixing:
      return {0.2, -1.0, 2.0, -6.0, 6.0};
  }
  return {};
}

InitialCondition initial_conditions(ProblemId p, double h, double alpha, double k) {
  const Domain d = default_domain(p, k);
  return initial_conditions(p, h, alpha, k, d.v_min, d.v_max);
}

InitialCondition initial_conditions(ProblemId p, double h, double alpha, double k, double v_min, double v_max) {
  if (!(k > 0.0)) throw std::invalid_argument("wave number must be positive");
  if (!(v_max > v_min)) throw std::invalid_argument("velocity range must satisfy v_min < v_max");
  InitialCondition ic;
  ic.h = h;
  if (p == ProblemId::mixing) {
    ic.f0 = [h, k](double x, double v) { return 0.5 * h * (2.0 + std::sin(k * x)) * velocity_profile(ProblemId::mixing, v); };
    ic.rho0 = [h, k](double x) { return h * (1.0 + 0.5 * std::sin(k * x)); };
    ic.phi0 = [h, k](double x) { return 0.5 * h * std::sin(k * x) / (k * k); };
    return ic;
  }
  const double c = profile_mass(p, v_min, v_max);
  ic.f0 = [p, h, alpha, k](double x, double v) { return h * (1.0 + alpha * std::cos(k * x)) * velocity_profile(p, v); };
  ic.rho0 = [c, h, alpha, k](double x) { return c * h * (1.0 + alpha * std::cos(k * x)); };
  ic.phi0 = [c, h, alpha, k](double x) { return c * h * alpha * std::cos(k * x) / (k * k); };
  ic.neutrality_defect = (c - 1.0) * h;
  return ic;
}

double mixing_epsilon(double x, double eps0) {
  if (!(x >= -1.0 && x <= 1.0)) throw std::invalid_argument("mixing_epsilon is defined on [-1, 1]");
  if (x <= 0.3) return eps0 + 0.5 * (std::tanh(5.0 - 10.0 * x) + std::tanh(5.0 + 10.0 * x));
  return eps0;
}

}  // namespace apmionet
