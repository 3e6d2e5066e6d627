#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "apmionet/diffcore/scalar_math.hpp"

namespace apmionet {

class ParamTape;

/// Handle to a scalar recorded on a ParamTape, or a plain constant when it is
/// not attached to any tape. Operations between constants record nothing.
class Var {
 public:
  Var(double constant = 0.0) : value_(constant) {}  // NOLINT(google-explicit-constructor)

  double value() const { return value_; }
  bool on_tape() const { return tape_ != nullptr; }
  ParamTape* tape() const { return tape_; }
  std::uint32_t slot() const { return slot_; }

 private:
  friend class ParamTape;
  Var(ParamTape* tape, std::uint32_t slot, double value) : tape_(tape), slot_(slot), value_(value) {}

  ParamTape* tape_ = nullptr;
  std::uint32_t slot_ = 0;
  double value_ = 0.0;
};

/// Reverse-mode record over scalar slots.
///
/// Nodes are appended in evaluation order, so the append order is topological
/// and the reverse sweep walks it backwards, visiting every node once. Three
/// node kinds exist: scalar primitives with one or two inputs and their local
/// partials, fused linear combinations, and opaque blocks (whole network
/// evaluations) that own a range of output slots and supply their own
/// vector-Jacobian product.
///
/// Trainable weights are identified by an index into a flat parameter vector.
/// They enter either as scalar leaves (`parameter`) or implicitly inside blocks,
/// which write straight into `param_gradient()` during the sweep.
///
/// A tape is single-owner and is consumed by one sweep.
class ParamTape {
 public:
  /// Backward of a block: receives the adjoints of its output slots.
  using BlockBackward = std::function<void(std::span<const double> out_adjoint, ParamTape& tape)>;

  explicit ParamTape(std::size_t n_params = 0);

  ParamTape(const ParamTape&) = delete;
  ParamTape& operator=(const ParamTape&) = delete;

  std::size_t n_params() const { return n_params_; }
  std::size_t slot_count() const { return values_.size(); }
  std::size_t node_count() const { return nodes_.size(); }
  bool consumed() const { return consumed_; }

  Var parameter(std::size_t param_id, double value);
  /// Independent leaf that is not a trainable parameter.
  Var variable(double value);

  Var unary(const Var& a, double value, double da);
  Var binary(const Var& a, const Var& b, double value, double da, double db);
  /// sum_k coeffs[k] * terms[k] + offset as one node.
  Var linear_combination(std::span<const Var> terms, std::span<const double> coeffs, double offset = 0.0);

  /// Appends a block with `values.size()` output slots; returns the first slot.
  std::uint32_t block(std::span<const double> values, BlockBackward backward);
  Var slot_var(std::uint32_t slot) const;

  /// Valid only while a sweep is running (inside block backwards).
  void accumulate(std::uint32_t slot, double adjoint) { adjoint_[slot] += adjoint; }
  std::span<double> param_gradient() { return gradient_; }

  /// Runs the reverse sweep from `output` and returns d output / d parameter.
  /// Rejects an empty or already consumed tape.
  std::vector<double> reverse_sweep(const Var& output);

  /// Index of the next node, used in domain-error messages.
  std::size_t next_node_id() const { return nodes_.size(); }

 private:
  enum class Kind : std::uint8_t { unary, binary, lincomb, block };
  struct Node {
    std::uint32_t out;
    std::uint32_t a;
    std::uint32_t b;
    Kind kind;
    double da;
    double db;
  };

  std::uint32_t new_slot(double value);

  std::size_t n_params_;
  std::vector<double> values_;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> lc_slots_;
  std::vector<double> lc_coeffs_;
  std::vector<BlockBackward> blocks_;
  std::vector<std::pair<std::uint32_t, std::size_t>> param_leaves_;
  std::vector<double> adjoint_;
  std::vector<double> gradient_;
  bool consumed_ = false;
};

std::vector<double> reverse_sweep(ParamTape& tape, const Var& output);

// Arithmetic on tape variables.
Var operator+(const Var& a, const Var& b);
Var operator-(const Var& a, const Var& b);
Var operator*(const Var& a, const Var& b);
Var operator/(const Var& a, const Var& b);
Var operator-(const Var& a);
inline Var& operator+=(Var& a, const Var& b) { return a = a + b; }
inline Var& operator-=(Var& a, const Var& b) { return a = a - b; }
inline Var& operator*=(Var& a, const Var& b) { return a = a * b; }

Var exp(const Var& a);
Var sin(const Var& a);
Var cos(const Var& a);
Var tanh(const Var& a);
Var log(const Var& a);
Var reciprocal(const Var& a);
Var sigmoid(const Var& a);
Var softplus(const Var& a);
Var swish(const Var& a);

inline double value_of(double a) { return a; }
inline double value_of(const Var& a) { return a.value(); }

}  // namespace apmionet
