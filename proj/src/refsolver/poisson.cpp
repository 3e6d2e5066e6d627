#include "apmionet/refsolver/poisson.hpp"

#include <fftw3.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace apmionet {

struct PoissonSolver::Impl {
  int n = 0;
  double period = 0.0;
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  fftw_complex* work = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  ~Impl() {
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
    fftw_free(real);
    fftw_free(spec);
    fftw_free(work);
  }
};

PoissonSolver::PoissonSolver(int nx, double period) : impl_(std::make_unique<Impl>()) {
  if (nx < 2 || nx % 2 != 0) throw std::invalid_argument("poisson: Nx must be even and >= 2, got " + std::to_string(nx));
  if (!(period > 0.0)) throw std::invalid_argument("poisson: period must be positive");
  auto& m = *impl_;
  m.n = nx;
  m.period = period;
  const int nc = nx / 2 + 1;
  m.real = fftw_alloc_real(static_cast<std::size_t>(nx));
  m.spec = fftw_alloc_complex(static_cast<std::size_t>(nc));
  m.work = fftw_alloc_complex(static_cast<std::size_t>(nc));
  m.forward = fftw_plan_dft_r2c_1d(nx, m.real, m.spec, FFTW_ESTIMATE);
  m.backward = fftw_plan_dft_c2r_1d(nx, m.work, m.real, FFTW_ESTIMATE);
  if (!m.forward || !m.backward) throw std::runtime_error("poisson: FFTW planning failed");
}

PoissonSolver::~PoissonSolver() = default;
PoissonSolver::PoissonSolver(PoissonSolver&&) noexcept = default;
PoissonSolver& PoissonSolver::operator=(PoissonSolver&&) noexcept = default;

int PoissonSolver::size() const { return impl_->n; }

double PoissonSolver::solve(std::span<const double> rhs, std::span<double> phi, std::span<double> E) {
  auto& m = *impl_;
  const auto n = static_cast<std::size_t>(m.n);
  if (rhs.size() != n || phi.size() != n || E.size() != n) throw std::invalid_argument("poisson: size mismatch");
  const double mean = std::accumulate(rhs.begin(), rhs.end(), 0.0) / m.n;
  for (std::size_t i = 0; i < n; ++i) m.real[i] = rhs[i] - mean;
  fftw_execute(m.forward);
  const int nc = m.n / 2 + 1;
  const double k0 = 2.0 * std::numbers::pi / m.period;
  const double scale = 1.0 / m.n;

  // phi_hat = rhs_hat / k^2
  m.work[0][0] = m.work[0][1] = 0.0;
  for (int j = 1; j < nc; ++j) {
    const double k = k0 * j;
    m.work[j][0] = m.spec[j][0] / (k * k) * scale;
    m.work[j][1] = m.spec[j][1] / (k * k) * scale;
  }
  fftw_execute(m.backward);
  for (std::size_t i = 0; i < n; ++i) phi[i] = m.real[i];

  // E_hat = -i k phi_hat, Nyquist mode dropped
  m.work[0][0] = m.work[0][1] = 0.0;
  for (int j = 1; j < nc; ++j) {
    const double k = k0 * j;
    if (2 * j == m.n) {
      m.work[j][0] = m.work[j][1] = 0.0;
      continue;
    }
    const double re = m.spec[j][0] / (k * k) * scale;
    const double im = m.spec[j][1] / (k * k) * scale;
    m.work[j][0] = k * im;
    m.work[j][1] = -k * re;
  }
  fftw_execute(m.backward);
  for (std::size_t i = 0; i < n; ++i) E[i] = m.real[i];
  return mean;
}

PoissonResult poisson_periodic(std::span<const double> rhs, double period) {
  PoissonSolver s(static_cast<int>(rhs.size()), period);
  PoissonResult r;
  r.phi.resize(rhs.size());
  r.E.resize(rhs.size());
  r.mean_removed = s.solve(rhs, r.phi, r.E);
  r.projected = std::abs(r.mean_removed) >= 1e-8;
  return r;
}

}  // namespace apmionet
