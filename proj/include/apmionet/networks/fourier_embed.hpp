#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "apmionet/diffcore/hyper.hpp"

namespace apmionet {

/// (cos wx, sin wx, cos 2wx, sin 2wx, ...) with w = 2 pi / period.
inline std::vector<double> fourier_embed(double x, double period, int modes = 1) {
  if (!(period > 0.0)) throw std::invalid_argument("fourier_embed: period must be positive");
  if (modes < 1) throw std::invalid_argument("fourier_embed: modes must be >= 1");
  const double w = 2.0 * std::numbers::pi / period;
  std::vector<double> out;
  out.reserve(2 * static_cast<std::size_t>(modes));
  for (int j = 1; j <= modes; ++j) {
    out.push_back(std::cos(j * w * x));
    out.push_back(std::sin(j * w * x));
  }
  return out;
}

template <class T>
std::vector<Hyper<T>> fourier_embed(const Hyper<T>& x, double period, int modes = 1) {
  if (!(period > 0.0)) throw std::invalid_argument("fourier_embed: period must be positive");
  if (modes < 1) throw std::invalid_argument("fourier_embed: modes must be >= 1");
  const double w = 2.0 * std::numbers::pi / period;
  std::vector<Hyper<T>> out;
  for (int j = 1; j <= modes; ++j) {
    const Hyper<T> arg = (j * w) * x;
    out.push_back(cos(arg));
    out.push_back(sin(arg));
  }
  return out;
}

}  // namespace apmionet
