#pragma once

#include <span>

#include "apmionet/diffcore/hyper.hpp"
#include "apmionet/kinetics/collisions.hpp"

namespace apmionet {

// Pointwise residuals. Each returns the value component only.

/// eps f_t + eps v f_x - phi_x f_v - Q. Not divided by eps.
template <class T>
Hyper<T> kinetic_residual(double eps, const Hyper<T>& f, const Hyper<T>& phi, double v, const Hyper<T>& Q) {
  if (eps < 0.0) throw std::invalid_argument("kinetic_residual: eps must be nonnegative");
  const T& fv = f.require_d(Direction::v, "kinetic_residual");
  const T& phix = phi.require_d(Direction::x, "kinetic_residual");
  T r = -(phix * fv) - Q.value();
  if (eps != 0.0) {
    const T& ft = f.require_d(Direction::t, "kinetic_residual");
    const T& fx = f.require_d(Direction::x, "kinetic_residual");
    r = r + eps * ft + (eps * v) * fx;
  }
  return Hyper<T>(r, Layout{});
}

/// rho_t + d/dx <v f>.
template <class T>
Hyper<T> mass_residual(const Hyper<T>& rho, const Hyper<T>& flux) {
  return Hyper<T>(rho.require_d(Direction::t, "mass_residual") + flux.require_d(Direction::x, "mass_residual"),
                  Layout{});
}

/// -phi_xx - (rho - h).
template <class T>
Hyper<T> poisson_residual(const Hyper<T>& phi, const Hyper<T>& rho, double h) {
  return Hyper<T>(-phi.require_dd(Direction::x, "poisson_residual") - (rho.value() - h), Layout{});
}

/// rho - <f>.
template <class T>
Hyper<T> consistency_residual(const Hyper<T>& rho, std::span<const Hyper<T>> f_nodes, const VelocityQuadrature& quad) {
  return Hyper<T>(rho.value() - moment(f_nodes, 0, quad).value(), Layout{});
}

}  // namespace apmionet
