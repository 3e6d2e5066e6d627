#pragma once

#include <functional>
#include <string>
#include <vector>

#include "apmionet/diffcore/errors.hpp"
#include "apmionet/networks/operator_triple.hpp"
#include "apmionet/residuals/loss.hpp"
#include "apmionet/training/config.hpp"
#include "apmionet/training/dataset.hpp"

namespace apmionet {

struct TrainLogRow {
  long iter = 0;
  double lr = 0.0;
  LossBreakdown loss;
  double wall_s = 0.0;
};

struct TrainHistory {
  std::vector<TrainLogRow> rows;
  void append(const TrainLogRow& r);
};

inline constexpr const char* kTrainLogHeader = "iter,lr,total,kinetic,mass,poisson,consistency,ic_rho,ic_f,ic_phi,wall_s";
std::string format_log_row(const TrainLogRow& r);

struct TrainOptions {
  /// Empty disables the CSV log.
  std::string log_csv;
  /// Directory for periodic checkpoints; empty disables them.
  std::string checkpoint_dir;
  /// Called for each logged row.
  std::function<void(const TrainLogRow&)> on_log;
};

struct TrainResult {
  OperatorTriple triple;
  TrainHistory history;
  long iterations_run = 0;
  bool stopped_early = false;
  std::vector<std::string> checkpoints;
};

/// Network triple for the configured problem, initialized from cfg.seed.
/// The P network is omitted for the baseline loss.
OperatorTriple make_triple(const ExperimentConfig& cfg, const Dataset& ds);

/// Minimizes the configured loss with Adam. Throws NumericFailure on
/// divergence (total > 1e6) or non-finite loss or gradient.
TrainResult train(const ExperimentConfig& cfg, const Dataset& ds, const TrainOptions& opts = {});

/// Loss of `triple` on a fixed point set of the given couples.
LossBreakdown evaluate_loss(const ExperimentConfig& cfg, const OperatorTriple& triple,
                            std::span<const InputCouple> couples, bool with_f0, int n_dom, int n_ic,
                            std::uint64_t seed);

}  // namespace apmionet
