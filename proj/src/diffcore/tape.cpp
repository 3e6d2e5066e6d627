#include "apmionet/diffcore/tape.hpp"

#include <limits>
#include <stdexcept>
#include <string>

namespace apmionet {

namespace {
constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

ParamTape* common_tape(const Var& a, const Var& b) {
  if (a.on_tape() && b.on_tape() && a.tape() != b.tape()) {
    throw std::invalid_argument("operands recorded on different tapes");
  }
  return a.on_tape() ? a.tape() : b.tape();
}
}  // namespace

ParamTape::ParamTape(std::size_t n_params) : n_params_(n_params) {}

std::uint32_t ParamTape::new_slot(double value) {
  if (consumed_) throw std::logic_error("recording on a consumed tape");
  values_.push_back(value);
  return static_cast<std::uint32_t>(values_.size() - 1);
}

Var ParamTape::parameter(std::size_t param_id, double value) {
  if (param_id >= n_params_) throw std::out_of_range("parameter id out of range");
  const auto s = new_slot(value);
  param_leaves_.emplace_back(s, param_id);
  return Var(this, s, value);
}

Var ParamTape::variable(double value) { return Var(this, new_slot(value), value); }

Var ParamTape::unary(const Var& a, double value, double da) {
  const auto s = new_slot(value);
  nodes_.push_back({s, a.slot(), kNone, Kind::unary, da, 0.0});
  return Var(this, s, value);
}

Var ParamTape::binary(const Var& a, const Var& b, double value, double da, double db) {
  const auto s = new_slot(value);
  nodes_.push_back({s, a.slot(), b.slot(), Kind::binary, da, db});
  return Var(this, s, value);
}

Var ParamTape::linear_combination(std::span<const Var> terms, std::span<const double> coeffs,
                                  double offset) {
  if (terms.size() != coeffs.size()) throw std::invalid_argument("linear_combination size mismatch");
  double value = offset;
  const auto begin = static_cast<std::uint32_t>(lc_slots_.size());
  for (std::size_t k = 0; k < terms.size(); ++k) {
    value += coeffs[k] * terms[k].value();
    if (terms[k].on_tape()) {
      if (terms[k].tape() != this) throw std::invalid_argument("term recorded on a different tape");
      lc_slots_.push_back(terms[k].slot());
      lc_coeffs_.push_back(coeffs[k]);
    }
  }
  const auto count = static_cast<std::uint32_t>(lc_slots_.size()) - begin;
  if (count == 0) return Var(value);
  const auto s = new_slot(value);
  nodes_.push_back({s, begin, count, Kind::lincomb, 0.0, 0.0});
  return Var(this, s, value);
}

std::uint32_t ParamTape::block(std::span<const double> values, BlockBackward backward) {
  if (values.empty()) throw std::invalid_argument("block without outputs");
  if (consumed_) throw std::logic_error("recording on a consumed tape");
  const auto first = static_cast<std::uint32_t>(values_.size());
  values_.insert(values_.end(), values.begin(), values.end());
  blocks_.push_back(std::move(backward));
  nodes_.push_back({first, static_cast<std::uint32_t>(values.size()),
                    static_cast<std::uint32_t>(blocks_.size() - 1), Kind::block, 0.0, 0.0});
  return first;
}

Var ParamTape::slot_var(std::uint32_t slot) const {
  return Var(const_cast<ParamTape*>(this), slot, values_.at(slot));
}

std::vector<double> ParamTape::reverse_sweep(const Var& output) {
  if (consumed_) throw std::logic_error("tape already consumed by a reverse sweep");
  if (nodes_.empty() && param_leaves_.empty()) throw std::logic_error("reverse sweep on an empty tape");
  if (output.on_tape() && output.tape() != this) {
    throw std::invalid_argument("output was not recorded on this tape");
  }
  consumed_ = true;
  gradient_.assign(n_params_, 0.0);
  if (!output.on_tape()) return gradient_;

  adjoint_.assign(values_.size(), 0.0);
  adjoint_[output.slot()] = 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    const Node& n = *it;
    switch (n.kind) {
      case Kind::unary: {
        const double g = adjoint_[n.out];
        if (g != 0.0) adjoint_[n.a] += n.da * g;
        break;
      }
      case Kind::binary: {
        const double g = adjoint_[n.out];
        if (g != 0.0) {
          adjoint_[n.a] += n.da * g;
          adjoint_[n.b] += n.db * g;
        }
        break;
      }
      case Kind::lincomb: {
        const double g = adjoint_[n.out];
        if (g != 0.0) {
          for (std::uint32_t k = n.a; k < n.a + n.b; ++k) adjoint_[lc_slots_[k]] += lc_coeffs_[k] * g;
        }
        break;
      }
      case Kind::block:
        blocks_[n.b](std::span<const double>(adjoint_.data() + n.out, n.a), *this);
        break;
    }
  }
  for (const auto& [slot, id] : param_leaves_) gradient_[id] += adjoint_[slot];
  std::vector<double> result = std::move(gradient_);
  gradient_.clear();
  adjoint_.clear();
  adjoint_.shrink_to_fit();
  blocks_.clear();
  return result;
}

std::vector<double> reverse_sweep(ParamTape& tape, const Var& output) { return tape.reverse_sweep(output); }

Var operator+(const Var& a, const Var& b) {
  ParamTape* tp = common_tape(a, b);
  const double v = a.value() + b.value();
  if (tp == nullptr) return Var(v);
  if (!a.on_tape()) return a.value() == 0.0 ? b : tp->unary(b, v, 1.0);
  if (!b.on_tape()) return b.value() == 0.0 ? a : tp->unary(a, v, 1.0);
  return tp->binary(a, b, v, 1.0, 1.0);
}

Var operator-(const Var& a, const Var& b) {
  ParamTape* tp = common_tape(a, b);
  const double v = a.value() - b.value();
  if (tp == nullptr) return Var(v);
  if (!a.on_tape()) return tp->unary(b, v, -1.0);
  if (!b.on_tape()) return b.value() == 0.0 ? a : tp->unary(a, v, 1.0);
  return tp->binary(a, b, v, 1.0, -1.0);
}

Var operator*(const Var& a, const Var& b) {
  ParamTape* tp = common_tape(a, b);
  const double v = a.value() * b.value();
  if (tp == nullptr) return Var(v);
  if (!a.on_tape()) {
    if (a.value() == 0.0) return Var(0.0);
    if (a.value() == 1.0) return b;
    return tp->unary(b, v, a.value());
  }
  if (!b.on_tape()) {
    if (b.value() == 0.0) return Var(0.0);
    if (b.value() == 1.0) return a;
    return tp->unary(a, v, b.value());
  }
  return tp->binary(a, b, v, b.value(), a.value());
}

Var reciprocal(const Var& a) {
  if (a.value() == 0.0) {
    const std::string where = a.on_tape() ? "tape node " + std::to_string(a.tape()->next_node_id())
                                          : std::string("untaped value");
    throw DomainError("division by zero at " + where);
  }
  const double r = 1.0 / a.value();
  if (!a.on_tape()) return Var(r);
  return a.tape()->unary(a, r, -r * r);
}

Var operator/(const Var& a, const Var& b) {
  if (!b.on_tape()) {
    if (b.value() == 0.0) throw DomainError("division by zero (constant divisor)");
    if (!a.on_tape()) return Var(a.value() / b.value());
    return a.tape()->unary(a, a.value() / b.value(), 1.0 / b.value());
  }
  if (b.value() == 0.0) {
    throw DomainError("division by zero at tape node " + std::to_string(b.tape()->next_node_id()));
  }
  ParamTape* tp = common_tape(a, b);
  const double inv = 1.0 / b.value();
  const double v = a.value() * inv;
  if (!a.on_tape()) return tp->unary(b, v, -v * inv);
  return tp->binary(a, b, v, inv, -v * inv);
}

Var operator-(const Var& a) {
  if (!a.on_tape()) return Var(-a.value());
  return a.tape()->unary(a, -a.value(), -1.0);
}

namespace {
template <class F, class D>
Var apply(const Var& a, F f, D df) {
  const double v = f(a.value());
  if (!a.on_tape()) return Var(v);
  return a.tape()->unary(a, v, df(a.value(), v));
}
}  // namespace

Var exp(const Var& a) {
  return apply(a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}
Var sin(const Var& a) {
  return apply(a, [](double x) { return std::sin(x); }, [](double x, double) { return std::cos(x); });
}
Var cos(const Var& a) {
  return apply(a, [](double x) { return std::cos(x); }, [](double x, double) { return -std::sin(x); });
}
Var tanh(const Var& a) {
  return apply(a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}
Var log(const Var& a) {
  if (!(a.value() > 0.0)) {
    const std::string where = a.on_tape() ? "tape node " + std::to_string(a.tape()->next_node_id())
                                          : std::string("untaped value");
    throw DomainError("log of non-positive argument " + std::to_string(a.value()) + " at " + where);
  }
  return apply(a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}
Var sigmoid(const Var& a) {
  return apply(a, [](double x) { return sigmoid(x); }, [](double, double s) { return s * (1.0 - s); });
}
Var softplus(const Var& a) {
  return apply(a, [](double x) { return softplus(x); }, [](double x, double) { return sigmoid(x); });
}
Var swish(const Var& a) {
  return apply(a, [](double x) { return swish(x); }, [](double x, double) { return swish_d1(x); });
}

}  // namespace apmionet
