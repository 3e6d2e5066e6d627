#pragma once

#include <memory>
#include <span>
#include <vector>

namespace apmionet {

/// Periodic spectral solver for -phi'' = rhs on [x0, x0 + period), Nx equal
/// cells. The mean of rhs is projected out.
class PoissonSolver {
 public:
  PoissonSolver(int nx, double period);
  ~PoissonSolver();
  PoissonSolver(PoissonSolver&&) noexcept;
  PoissonSolver& operator=(PoissonSolver&&) noexcept;

  int size() const;
  /// Writes the zero-mean phi and E = -phi'. Returns the mean removed from rhs.
  double solve(std::span<const double> rhs, std::span<double> phi, std::span<double> E);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct PoissonResult {
  std::vector<double> phi;
  std::vector<double> E;
  double mean_removed = 0.0;
  /// True when |mean(rhs)| >= 1e-8 and the mean had to be projected out.
  bool projected = false;
};

PoissonResult poisson_periodic(std::span<const double> rhs, double period);

}  // namespace apmionet
