#pragma once

#include <cstdint>
#include <string>

#include "apmionet/kinetics/collisions.hpp"
#include "apmionet/networks/operator_triple.hpp"
#include "apmionet/residuals/loss.hpp"
#include "apmionet/residuals/problems.hpp"

namespace apmionet {

struct SamplingConfig {
  double h_min = 0.9;
  double h_max = 1.1;
  double alpha_min = 0.04;
  double alpha_max = 0.06;
  int n_train = 512;
  int n_test = 128;
  int sensors_x = 32;
  int sensors_v = 32;
  int n_dom = 1024;
  int n_init = 512;
  /// When set, the dataset is a single couple (fixed_h, fixed_alpha) used for
  /// both training and testing.
  bool fixed = false;
  double fixed_h = 1.0;
  double fixed_alpha = 0.05;
};

struct OptimizerConfig {
  double lr0 = 1e-3;
  double decay = 0.9;
  int decay_every = 1000;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int iterations = 50000;
  int batch_dom = 40000;
  int batch_ic = 20000;
  int log_every = 100;
  int checkpoint_every = 0;
  int patience = 0;
  int validate_every = 1000;
  int val_dom = 64;
  int val_ic = 32;
};

struct ReferenceConfig {
  int nx = 64;
  int nv = 64;
  double cfl = 0.4;
  double dt_out = 0.05;
};

struct ExperimentConfig {
  ProblemId problem = ProblemId::landau;
  CollisionKind collision = CollisionKind::FokkerPlanck;
  std::string cross_section = "anisotropic";
  /// "constant" or "mixing".
  std::string epsilon_mode = "constant";
  double epsilon = 1.0;
  double eps0 = 1e-3;
  double k = 0.5;
  /// "ap" or "pi".
  std::string loss = "ap";

  Domain domain{};
  int quad_nodes = 16;

  SamplingConfig sampling;
  PenaltyWeights weights;
  PiWeights pi_weights;
  OptimizerConfig optimizer;
  NetworkConfig network;
  ReferenceConfig reference;

  std::uint64_t seed = 0;
  int threads = 1;
  /// When false the wall-time column of the training log is written as 0.
  bool wall_clock = true;

  EpsilonProfile epsilon_profile() const;
  CrossSection cross_section_kernel() const;
  CollisionSpec collision_spec() const;
  InitialCondition initial_condition(double h, double alpha) const;
  void validate() const;
};

/// INI-style text with sections problem, domain, sampling, weights,
/// optimizer, network, reference, runtime. Unknown sections or keys are errors.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

}  // namespace apmionet
