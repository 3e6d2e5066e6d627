#pragma once

#include <span>
#include <vector>

#include "apmionet/training/config.hpp"

namespace apmionet {

/// lr0 * decay^floor(iter / decay_every).
double learning_rate(const OptimizerConfig& cfg, long iteration);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long steps = 0;
};

/// One bias-corrected Adam update at the scheduled rate for `iteration`.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, long iteration,
               const OptimizerConfig& cfg);

/// Stops after `patience` consecutive checks without a relative improvement
/// of `rel_tol` over the best value seen.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience, double rel_tol = 1e-3);
  /// Feeds one validation value; returns true when training should stop.
  bool update(double loss);
  bool improved() const { return improved_; }
  double best() const { return best_; }
  int checks() const { return checks_; }

 private:
  int patience_;
  double rel_tol_;
  double best_;
  int bad_ = 0;
  int checks_ = 0;
  bool improved_ = false;
};

}  // namespace apmionet
