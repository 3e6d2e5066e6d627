#pragma once

#include <array>
#include <stdexcept>
#include <span>
#include <type_traits>
#include <vector>

#include "apmionet/diffcore/layout.hpp"
#include "apmionet/diffcore/scalar_math.hpp"
#include "apmionet/diffcore/tape.hpp"

namespace apmionet {

/// Truncated hyper-dual scalar. T is `double` for plain evaluation or `Var`
/// when the components themselves are recorded on a ParamTape
/// (reverse-over-forward).
///
/// A scalar with the empty layout is a constant and combines with any layout.
template <class T>
class Hyper {
 public:
  Hyper() : value_(0.0) {}
  Hyper(double c) : value_(c) {}  // NOLINT(google-explicit-constructor)
  Hyper(const T& v) requires(!std::is_same_v<T, double>) : value_(v) {}  // NOLINT
  Hyper(const T& v, const Layout& layout) : value_(v), layout_(layout) {
    for (auto& g : grad_) g = T(0.0);
    for (auto& h : hess_) h = T(0.0);
  }

  const Layout& layout() const { return layout_; }
  const T& value() const { return value_; }
  const T& grad(int i) const { return grad_[static_cast<std::size_t>(i)]; }
  const T& hess(int k) const { return hess_[static_cast<std::size_t>(k)]; }
  T& value() { return value_; }
  T& grad(int i) { return grad_[static_cast<std::size_t>(i)]; }
  T& hess(int k) { return hess_[static_cast<std::size_t>(k)]; }

  /// Component by flat index in layout order (value, first..., second...).
  const T& component(int c) const {
    if (c == 0) return value_;
    if (c <= layout_.n_first()) return grad_[static_cast<std::size_t>(c - 1)];
    return hess_[static_cast<std::size_t>(c - 1 - layout_.n_first())];
  }
  T& component(int c) { return const_cast<T&>(std::as_const(*this).component(c)); }

  /// Derivative along a direction, zero when the direction is not tracked.
  T d(Direction dir) const {
    const int i = layout_.first_index(dir);
    return i < 0 ? T(0.0) : grad_[static_cast<std::size_t>(i)];
  }
  T dd(Direction dir) const {
    const int k = layout_.second_index(dir);
    return k < 0 ? T(0.0) : hess_[static_cast<std::size_t>(k)];
  }
  /// Like d()/dd() but rejects an untracked component.
  const T& require_d(Direction dir, const char* what) const {
    const int i = layout_.first_index(dir);
    if (i < 0) throw std::invalid_argument(std::string(what) + ": missing d/d" + to_string(dir) + " component");
    return grad_[static_cast<std::size_t>(i)];
  }
  const T& require_dd(Direction dir, const char* what) const {
    const int k = layout_.second_index(dir);
    if (k < 0) {
      throw std::invalid_argument(std::string(what) + ": missing d2/d" + to_string(dir) + "2 component");
    }
    return hess_[static_cast<std::size_t>(k)];
  }

 private:
  T value_;
  std::array<T, 3> grad_{};
  std::array<T, 2> hess_{};
  Layout layout_{};
};

using HyperScalar = Hyper<double>;
using HyperVar = Hyper<Var>;

namespace detail {

template <class T>
const Layout& merged_layout(const Hyper<T>& a, const Hyper<T>& b) {
  if (a.layout().is_constant()) return b.layout();
  if (b.layout().is_constant() || a.layout() == b.layout()) return a.layout();
  throw std::invalid_argument("hyper-dual operands have different derivative layouts");
}

// Reads a component of an operand that may be a constant.
template <class T>
T grad_or_zero(const Hyper<T>& a, int i) {
  return a.layout().is_constant() ? T(0.0) : a.grad(i);
}
template <class T>
T hess_or_zero(const Hyper<T>& a, int k) {
  return a.layout().is_constant() ? T(0.0) : a.hess(k);
}

/// Unary chain rule given f(a), f'(a), f''(a).
template <class T>
Hyper<T> chain(const Hyper<T>& a, const T& f0, const T& f1, const T& f2) {
  const Layout& L = a.layout();
  Hyper<T> r(f0, L);
  if (L.is_constant()) return r;
  for (int i = 0; i < L.n_first(); ++i) r.grad(i) = f1 * a.grad(i);
  for (int k = 0; k < L.n_second(); ++k) {
    const T& ab = a.grad(L.second_base(k));
    r.hess(k) = f1 * a.hess(k) + f2 * (ab * ab);
  }
  return r;
}

}  // namespace detail

template <class T>
Hyper<T> operator+(const Hyper<T>& a, const Hyper<T>& b) {
  const Layout& L = detail::merged_layout(a, b);
  Hyper<T> r(a.value() + b.value(), L);
  for (int i = 0; i < L.n_first(); ++i) r.grad(i) = detail::grad_or_zero(a, i) + detail::grad_or_zero(b, i);
  for (int k = 0; k < L.n_second(); ++k) r.hess(k) = detail::hess_or_zero(a, k) + detail::hess_or_zero(b, k);
  return r;
}

template <class T>
Hyper<T> operator-(const Hyper<T>& a, const Hyper<T>& b) {
  const Layout& L = detail::merged_layout(a, b);
  Hyper<T> r(a.value() - b.value(), L);
  for (int i = 0; i < L.n_first(); ++i) r.grad(i) = detail::grad_or_zero(a, i) - detail::grad_or_zero(b, i);
  for (int k = 0; k < L.n_second(); ++k) r.hess(k) = detail::hess_or_zero(a, k) - detail::hess_or_zero(b, k);
  return r;
}

template <class T>
Hyper<T> operator-(const Hyper<T>& a) {
  Hyper<T> r(-a.value(), a.layout());
  for (int i = 0; i < a.layout().n_first(); ++i) r.grad(i) = -a.grad(i);
  for (int k = 0; k < a.layout().n_second(); ++k) r.hess(k) = -a.hess(k);
  return r;
}

template <class T>
Hyper<T> operator*(const Hyper<T>& a, const Hyper<T>& b) {
  if (a.layout().is_constant()) {
    Hyper<T> r(a.value() * b.value(), b.layout());
    for (int i = 0; i < b.layout().n_first(); ++i) r.grad(i) = a.value() * b.grad(i);
    for (int k = 0; k < b.layout().n_second(); ++k) r.hess(k) = a.value() * b.hess(k);
    return r;
  }
  if (b.layout().is_constant()) return b * a;
  const Layout& L = detail::merged_layout(a, b);
  Hyper<T> r(a.value() * b.value(), L);
  for (int i = 0; i < L.n_first(); ++i) r.grad(i) = a.grad(i) * b.value() + a.value() * b.grad(i);
  for (int k = 0; k < L.n_second(); ++k) {
    const int i = L.second_base(k);
    r.hess(k) = a.hess(k) * b.value() + T(2.0) * (a.grad(i) * b.grad(i)) + a.value() * b.hess(k);
  }
  return r;
}

template <class T>
Hyper<T> reciprocal(const Hyper<T>& a) {
  const T r = reciprocal(a.value());
  const T r2 = r * r;
  return detail::chain(a, r, -r2, T(2.0) * (r2 * r));
}

template <class T>
Hyper<T> operator/(const Hyper<T>& a, const Hyper<T>& b) {
  if (b.layout().is_constant()) {
    if (value_of(b.value()) == 0.0) throw DomainError("division by zero (hyper-dual constant divisor)");
    Hyper<T> r(a.value() / b.value(), a.layout());
    for (int i = 0; i < a.layout().n_first(); ++i) r.grad(i) = a.grad(i) / b.value();
    for (int k = 0; k < a.layout().n_second(); ++k) r.hess(k) = a.hess(k) / b.value();
    return r;
  }
  return a * reciprocal(b);
}

// Mixed operations with plain doubles.
template <class T> Hyper<T> operator+(const Hyper<T>& a, double b) { return a + Hyper<T>(b); }
template <class T> Hyper<T> operator+(double a, const Hyper<T>& b) { return Hyper<T>(a) + b; }
template <class T> Hyper<T> operator-(const Hyper<T>& a, double b) { return a - Hyper<T>(b); }
template <class T> Hyper<T> operator-(double a, const Hyper<T>& b) { return Hyper<T>(a) - b; }
template <class T> Hyper<T> operator*(const Hyper<T>& a, double b) { return a * Hyper<T>(b); }
template <class T> Hyper<T> operator*(double a, const Hyper<T>& b) { return Hyper<T>(a) * b; }
template <class T> Hyper<T> operator/(const Hyper<T>& a, double b) { return a / Hyper<T>(b); }
template <class T> Hyper<T> operator/(double a, const Hyper<T>& b) { return Hyper<T>(a) / b; }

template <class T> Hyper<T>& operator+=(Hyper<T>& a, const Hyper<T>& b) { return a = a + b; }
template <class T> Hyper<T>& operator-=(Hyper<T>& a, const Hyper<T>& b) { return a = a - b; }
template <class T> Hyper<T>& operator*=(Hyper<T>& a, const Hyper<T>& b) { return a = a * b; }

template <class T>
Hyper<T> exp(const Hyper<T>& a) {
  const T e = exp(a.value());
  return detail::chain(a, e, e, e);
}

template <class T>
Hyper<T> sin(const Hyper<T>& a) {
  const T s = sin(a.value());
  return detail::chain(a, s, cos(a.value()), -s);
}

template <class T>
Hyper<T> cos(const Hyper<T>& a) {
  const T c = cos(a.value());
  return detail::chain(a, c, -sin(a.value()), -c);
}

template <class T>
Hyper<T> tanh(const Hyper<T>& a) {
  const T y = tanh(a.value());
  const T d1 = T(1.0) - y * y;
  return detail::chain(a, y, d1, T(-2.0) * (y * d1));
}

template <class T>
Hyper<T> log(const Hyper<T>& a) {
  const T y = log(a.value());
  const T r = reciprocal(a.value());
  return detail::chain(a, y, r, -(r * r));
}

template <class T>
Hyper<T> sigmoid(const Hyper<T>& a) {
  const T s = sigmoid(a.value());
  const T q = s * (T(1.0) - s);
  return detail::chain(a, s, q, q * (T(1.0) - T(2.0) * s));
}

/// log(1 + e^a).
template <class T>
Hyper<T> softplus(const Hyper<T>& a) {
  const T s = sigmoid(a.value());
  return detail::chain(a, softplus(a.value()), s, s * (T(1.0) - s));
}

template <class T>
Hyper<T> swish(const Hyper<T>& a) {
  const T& z = a.value();
  const T s = sigmoid(z);
  const T q = s * (T(1.0) - s);
  const T d1 = s + z * q;
  const T d2 = T(2.0) * q + z * (q * (T(1.0) - T(2.0) * s));
  return detail::chain(a, z * s, d1, d2);
}

/// sum_k c[k] * xs[k] + offset. On a tape the combination is one node.
inline double linear_combination(std::span<const double> xs, std::span<const double> c, double offset = 0.0) {
  if (xs.size() != c.size()) throw std::invalid_argument("linear_combination size mismatch");
  double s = offset;
  for (std::size_t k = 0; k < xs.size(); ++k) s += c[k] * xs[k];
  return s;
}

inline Var linear_combination(std::span<const Var> xs, std::span<const double> c, double offset = 0.0) {
  for (const Var& x : xs) {
    if (x.on_tape()) return x.tape()->linear_combination(xs, c, offset);
  }
  double s = offset;
  if (xs.size() != c.size()) throw std::invalid_argument("linear_combination size mismatch");
  for (std::size_t k = 0; k < xs.size(); ++k) s += c[k] * xs[k].value();
  return Var(s);
}

/// Componentwise linear combination. Non-constant terms must share a layout.
template <class T>
Hyper<T> linear_combination(std::span<const Hyper<T>> xs, std::span<const double> c, double offset = 0.0) {
  if (xs.size() != c.size()) throw std::invalid_argument("linear_combination size mismatch");
  Layout L;
  for (const auto& x : xs) {
    if (x.layout().is_constant()) continue;
    if (L.is_constant()) {
      L = x.layout();
    } else if (!(L == x.layout())) {
      throw std::invalid_argument("hyper-dual operands have different derivative layouts");
    }
  }
  std::vector<T> buf(xs.size());
  auto comb = [&](auto get, double off) {
    for (std::size_t k = 0; k < xs.size(); ++k) buf[k] = get(xs[k]);
    return linear_combination(std::span<const T>(buf), c, off);
  };
  Hyper<T> r(comb([](const Hyper<T>& x) { return x.value(); }, offset), L);
  for (int i = 0; i < L.n_first(); ++i) r.grad(i) = comb([i](const Hyper<T>& x) { return detail::grad_or_zero(x, i); }, 0.0);
  for (int k = 0; k < L.n_second(); ++k) {
    r.hess(k) = comb([k](const Hyper<T>& x) { return detail::hess_or_zero(x, k); }, 0.0);
  }
  return r;
}

/// Seeds the three coordinates. The scalar for each seeded direction has unit
/// derivative along itself; unseeded coordinates come back as constants that
/// still carry the layout so they combine with the others.
template <class T = double>
std::array<Hyper<T>, 3> seed_coordinates(double t, double x, double v, const Layout& layout) {
  if (layout.n_first() == 0) throw std::invalid_argument("seed_coordinates needs at least one direction");
  std::array<Hyper<T>, 3> out{Hyper<T>(T(t), layout), Hyper<T>(T(x), layout), Hyper<T>(T(v), layout)};
  for (int d = 0; d < 3; ++d) {
    const int i = layout.first_index(static_cast<Direction>(d));
    if (i >= 0) out[static_cast<std::size_t>(d)].grad(i) = T(1.0);
  }
  return out;
}

template <class T = double>
std::array<Hyper<T>, 3> seed_coordinates(double t, double x, double v, std::span<const Direction> directions,
                                         std::span<const std::pair<Direction, Direction>> second_pairs) {
  return seed_coordinates<T>(t, x, v, Layout::from_pairs(directions, second_pairs));
}

}  // namespace apmionet
