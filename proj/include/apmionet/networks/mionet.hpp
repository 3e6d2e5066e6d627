#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "apmionet/diffcore/hyper.hpp"
#include "apmionet/diffcore/tape.hpp"
#include "apmionet/networks/modified_mlp.hpp"

namespace apmionet {

/// Architecture of one multiple-input DeepONet.
///
/// Trunk input is (t, cos wx, sin wx, ..., v) when the net depends on v, and
/// (t, cos wx, sin wx, ...) otherwise. Flat parameter order: branch1 (if
/// any), branch2, trunk, b0.
struct MionetShape {
  std::optional<MlpShape> branch1;
  MlpShape branch2;
  MlpShape trunk;
  int p = 0;
  double period = 1.0;
  int modes = 1;
  bool has_v = false;
  bool softplus = false;

  static MionetShape make(int n_f0_sensors, int n_h_sensors, int hidden_layers, int width, int p, double period,
                          int modes, bool has_v, bool softplus);

  int trunk_in() const { return 1 + 2 * modes + (has_v ? 1 : 0); }
  std::size_t off_branch1() const { return 0; }
  std::size_t off_branch2() const { return branch1 ? branch1->n_params() : 0; }
  std::size_t off_trunk() const { return off_branch2() + branch2.n_params(); }
  std::size_t off_b0() const { return off_trunk() + trunk.n_params(); }
  std::size_t n_params() const { return off_b0() + 1; }

  bool operator==(const MionetShape& o) const;
};

struct MIONetParams {
  MionetShape shape;
  std::vector<double> values;
};

MIONetParams mionet_init(const MionetShape& shape, std::uint64_t seed);
void mionet_fill(const MionetShape& shape, std::uint64_t seed, std::span<double> out);

/// Sum_j b1_j b2_j t_j + b0. Branch outputs carry no input derivatives.
template <class T>
Hyper<T> mionet_combine(const std::vector<Hyper<T>>* b1, const std::vector<Hyper<T>>& b2,
                        const std::vector<Hyper<T>>& t, const T& b0);

/// Reference scalar evaluation; u1 is ignored when the net has no first branch.
/// `y` is the already embedded trunk input. Returns the raw output (no head).
template <class T>
Hyper<T> mionet_eval(const MionetShape& shape, std::span<const double> w, std::span<const double> u1,
                     std::span<const double> u2, const std::vector<Hyper<T>>& y);

/// Trunk input for coordinates seeded according to `layout`.
template <class T>
std::vector<Hyper<T>> trunk_input(const MionetShape& shape, const Hyper<T>& t, const Hyper<T>& x,
                                  const Hyper<T>& v);

/// Sensor values for all input couples known to a batch, one row per couple.
struct SensorTable {
  RowMat f0;
  RowMat h;
};

/// Points at which a net is evaluated in one batched call.
struct MionetQuery {
  Layout layout;
  std::vector<double> t, x, v;
  std::vector<int> couple;
  int size() const { return static_cast<int>(t.size()); }
};

/// Raw batched output with stacked components: entry c*B + b.
Eigen::VectorXd mionet_forward(const MionetShape& shape, std::span<const double> w, const SensorTable& sensors,
                               const MionetQuery& q);

/// Batched output as hyper-dual scalars, Softplus head applied when configured.
std::vector<HyperScalar> mionet_eval_batch(const MionetShape& shape, std::span<const double> w,
                                           const SensorTable& sensors, const MionetQuery& q);

/// Records the batched evaluation on a tape as one block node. `w` is the full
/// flat parameter vector and `offset` the start of this net inside it; the
/// block writes its parameter adjoints there during the sweep.
std::vector<HyperVar> mionet_record(ParamTape& tape, const MionetShape& shape, std::span<const double> w,
                                    std::size_t offset, const SensorTable& sensors, const MionetQuery& q);

}  // namespace apmionet
