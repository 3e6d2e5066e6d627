#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "apmionet/networks/mionet.hpp"
#include "apmionet/training/config.hpp"

namespace apmionet {

/// One operator input: f0 on the L x Q sensor grid (row l holds v_0..v_{Q-1})
/// and h on the L x-sensors.
struct InputCouple {
  double h = 1.0;
  double alpha = 0.0;
  std::vector<double> f0_sensors;
  std::vector<double> h_sensors;
};

struct Dataset {
  std::vector<InputCouple> train;
  std::vector<InputCouple> test;
  int sensors_x = 0;
  int sensors_v = 0;
  /// False when the operators depend on h only.
  bool uses_f0 = true;
};

std::vector<double> sensor_x_grid(const ExperimentConfig& cfg);
std::vector<double> sensor_v_grid(const ExperimentConfig& cfg);

InputCouple make_couple(const ExperimentConfig& cfg, double h, double alpha);

/// Deterministic in (cfg, seed). Couple i draws (h, alpha) from its own
/// sub-stream; the first n_train couples form the training set.
Dataset sample_dataset(const ExperimentConfig& cfg, std::uint64_t seed);

SensorTable sensor_table(std::span<const InputCouple> couples, bool with_f0);
std::vector<InitialCondition> couple_initial_conditions(const ExperimentConfig& cfg,
                                                        std::span<const InputCouple> couples);

void save_dataset(const std::string& path, const Dataset& ds);
Dataset load_dataset(const std::string& path);

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace apmionet
