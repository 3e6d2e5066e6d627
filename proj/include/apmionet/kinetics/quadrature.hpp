#pragma once

#include <vector>

namespace apmionet {

struct VelocityQuadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
  double v_min = 0.0;
  double v_max = 0.0;

  int size() const { return static_cast<int>(nodes.size()); }
};

/// n-point Gauss-Legendre rule mapped to [a, b].
VelocityQuadrature gauss_legendre(int n, double a, double b);

/// Cell-centre rule on n equal cells of [a, b].
VelocityQuadrature midpoint_rule(int n, double a, double b);

}  // namespace apmionet
