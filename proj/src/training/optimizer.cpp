#include "apmionet/training/optimizer.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace apmionet {

double learning_rate(const OptimizerConfig& cfg, long iteration) {
  if (iteration < 0) throw std::invalid_argument("negative iteration");
  return cfg.lr0 * std::pow(cfg.decay, static_cast<double>(iteration / cfg.decay_every));
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& st, long iteration,
               const OptimizerConfig& cfg) {
  if (grads.size() != params.size()) throw std::invalid_argument("adam_step: gradient size mismatch");
  if (st.m.empty() && st.v.empty()) {
    st.m.assign(params.size(), 0.0);
    st.v.assign(params.size(), 0.0);
  }
  if (st.m.size() != params.size() || st.v.size() != params.size()) {
    throw std::invalid_argument("adam_step: optimizer state does not match parameters");
  }
  ++st.steps;
  const double lr = learning_rate(cfg, iteration);
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.steps));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.steps));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    st.m[i] = cfg.beta1 * st.m[i] + (1.0 - cfg.beta1) * g;
    st.v[i] = cfg.beta2 * st.v[i] + (1.0 - cfg.beta2) * g * g;
    params[i] -= lr * (st.m[i] / c1) / (std::sqrt(st.v[i] / c2) + cfg.eps);
  }
}

EarlyStopping::EarlyStopping(int patience, double rel_tol)
    : patience_(patience), rel_tol_(rel_tol), best_(std::numeric_limits<double>::infinity()) {
  if (patience < 1) throw std::invalid_argument("early stopping needs patience >= 1");
}

bool EarlyStopping::update(double loss) {
  ++checks_;
  improved_ = checks_ == 1 || loss < best_ * (1.0 - rel_tol_);
  if (improved_) {
    best_ = loss;
    bad_ = 0;
    return false;
  }
  ++bad_;
  return bad_ >= patience_;
}

}  // namespace apmionet
