#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "apmionet/networks/mionet.hpp"

namespace apmionet {

struct NetworkConfig {
  int hidden_layers = 5;
  int width = 64;
  int p = 64;
  int modes = 1;
};

enum class NetId { F = 0, P = 1, Phi = 2 };

/// F, P and Phi nets sharing one flat parameter vector (in that order).
/// The P net is absent in the two-network baseline.
class OperatorTriple {
 public:
  OperatorTriple() = default;
  /// n_f0_sensors = 0 drops the f0 branch (h-only operators).
  OperatorTriple(const NetworkConfig& cfg, int n_f0_sensors, int n_h_sensors, double period, bool with_p);
  OperatorTriple(std::optional<MionetShape> F, std::optional<MionetShape> P, std::optional<MionetShape> Phi);

  void initialize(std::uint64_t seed);

  bool has(NetId id) const { return shapes_[idx(id)].has_value(); }
  const MionetShape& shape(NetId id) const;
  std::size_t offset(NetId id) const { return offsets_[idx(id)]; }
  std::span<const double> net_params(NetId id) const;

  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }
  std::size_t n_params() const { return params_.size(); }

  const std::array<std::optional<MionetShape>, 3>& shapes() const { return shapes_; }

 private:
  static std::size_t idx(NetId id) { return static_cast<std::size_t>(id); }
  void layout_offsets();

  std::array<std::optional<MionetShape>, 3> shapes_{};
  std::array<std::size_t, 3> offsets_{};
  std::vector<double> params_;
};

/// Sensors of a single input couple.
struct CoupleSensors {
  std::vector<double> f0;
  std::vector<double> h;
};

struct FieldValues {
  HyperScalar f;
  HyperScalar rho;
  HyperScalar phi;
};

/// Pointwise evaluation of the three operators. The layout applies to f; rho
/// and phi use the same layout restricted to t and x (v is not an input of
/// their trunks). Positivity heads are applied to f and rho.
FieldValues operator_eval(const OperatorTriple& triple, const CoupleSensors& u, double t, double x, double v,
                          const Layout& layout = Layout{});

void save_checkpoint(const std::string& path, const OperatorTriple& triple);
OperatorTriple load_checkpoint(const std::string& path);

}  // namespace apmionet
