#include "apmionet/kinetics/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace apmionet {

namespace {

void check_interval(int n, double a, double b) {
  if (n < 1) throw std::invalid_argument("quadrature needs at least one node");
  if (!(b > a)) throw std::invalid_argument("quadrature interval must satisfy a < b");
}

}  // namespace

VelocityQuadrature gauss_legendre(int n, double a, double b) {
  check_interval(n, a, b);
  VelocityQuadrature q{std::vector<double>(n), std::vector<double>(n), a, b};
  const long double half = 0.5L * (static_cast<long double>(b) - a);
  const long double mid = 0.5L * (static_cast<long double>(b) + a);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    long double x = std::cos(std::numbers::pi_v<long double> * (i + 0.75L) / (n + 0.5L));
    long double dp = 0.0L;
    for (int it = 0; it < 100; ++it) {
      long double p0 = 1.0L;
      long double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const long double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0L;
      dp = n * (x * p1 - p0) / (x * x - 1.0L);
      const long double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-19L) break;
    }
    {
      long double p0 = 1.0L;
      long double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const long double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0L;
      dp = n * (x * p1 - p0) / (x * x - 1.0L);
    }
    const long double w = 2.0L / ((1.0L - x * x) * dp * dp);
    // descending cos gives the largest root first; store ascending
    q.nodes[n - 1 - i] = static_cast<double>(mid + half * x);
    q.nodes[i] = static_cast<double>(mid - half * x);
    q.weights[i] = q.weights[n - 1 - i] = static_cast<double>(half * w);
  }
  return q;
}

VelocityQuadrature midpoint_rule(int n, double a, double b) {
  check_interval(n, a, b);
  VelocityQuadrature q{std::vector<double>(n), std::vector<double>(n), a, b};
  const double h = (b - a) / n;
  for (int i = 0; i < n; ++i) {
    q.nodes[i] = a + (i + 0.5) * h;
    q.weights[i] = h;
  }
  return q;
}

}  // namespace apmionet
