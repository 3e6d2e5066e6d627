#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "apmionet/kinetics/collisions.hpp"
#include "apmionet/networks/operator_triple.hpp"
#include "apmionet/residuals/problems.hpp"

namespace apmionet {

struct PenaltyWeights {
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double lambda3_rho = 1.0;
  double lambda3_f = 1.0;
  double lambda3_phi = 1.0;
  // boundary terms; periodicity is built into the networks
  double lambda4 = 0.0;

  void validate() const;
};

/// Weights of the two-network baseline: mu1 on the PDE rows, mu2 on the
/// initial rows, mu3 on boundary rows (unused).
struct PiWeights {
  double mu1 = 1.0;
  double mu2 = 1.0;
  double mu3 = 0.0;
};

struct LossBreakdown {
  double kinetic = 0.0;
  double mass = 0.0;
  double poisson = 0.0;
  double consistency = 0.0;
  double ic_rho = 0.0;
  double ic_f = 0.0;
  double ic_phi = 0.0;
  double total = 0.0;
};

/// Loss components before reduction to plain numbers.
template <class T>
struct LossTerms {
  T kinetic{0.0}, mass{0.0}, poisson{0.0}, consistency{0.0}, ic_rho{0.0}, ic_f{0.0}, ic_phi{0.0}, total{0.0};
  LossBreakdown values() const;
};

using EpsilonProfile = std::function<double(double)>;
EpsilonProfile constant_epsilon(double eps);

/// Domain and initial points bound to input couples. Couple indices refer to
/// rows of `sensors`.
struct CollocationBatch {
  SensorTable sensors;
  std::vector<double> h;  // uniform background per couple

  std::vector<int> dom_couple;
  std::vector<double> dom_t, dom_x, dom_v;

  std::vector<int> ic_couple;
  std::vector<double> ic_x, ic_v;
  std::vector<double> ic_f0, ic_rho0, ic_phi0;

  int n_dom() const { return static_cast<int>(dom_t.size()); }
  int n_ic() const { return static_cast<int>(ic_x.size()); }
  int n_couples() const { return static_cast<int>(h.size()); }
};

/// Uniform draws of n_dom domain points and n_ic initial points for every
/// couple. Reproducible from `seed`.
CollocationBatch sample_collocation(const SensorTable& sensors, std::span<const InitialCondition> ics,
                                    const Domain& domain, int n_dom, int n_ic, std::uint64_t seed);

/// Fills the initial targets of `batch` from the couples' initial data.
void bind_initial_targets(CollocationBatch& batch, std::span<const InitialCondition> ics);

/// Field model evaluated at many points in one call. Values carry the heads.
template <class T>
class FieldModel {
 public:
  virtual ~FieldModel() = default;
  virtual bool has(NetId id) const = 0;
  virtual std::vector<Hyper<T>> eval(NetId id, const SensorTable& sensors, const MionetQuery& q) = 0;
};

/// Plain evaluation of an operator triple.
class NetworkModel final : public FieldModel<double> {
 public:
  explicit NetworkModel(const OperatorTriple& triple) : triple_(triple) {}
  bool has(NetId id) const override { return triple_.has(id); }
  std::vector<HyperScalar> eval(NetId id, const SensorTable& sensors, const MionetQuery& q) override;

 private:
  const OperatorTriple& triple_;
};

/// Evaluation recorded on a tape whose parameters are the triple's flat vector.
class TapedNetworkModel final : public FieldModel<Var> {
 public:
  TapedNetworkModel(const OperatorTriple& triple, ParamTape& tape) : triple_(triple), tape_(tape) {}
  bool has(NetId id) const override { return triple_.has(id); }
  std::vector<HyperVar> eval(NetId id, const SensorTable& sensors, const MionetQuery& q) override;

 private:
  const OperatorTriple& triple_;
  ParamTape& tape_;
};

/// Closed-form fields, for manufactured solutions. Each callable receives the
/// seeded (t, x, v) and the couple index.
class AnalyticModel final : public FieldModel<double> {
 public:
  using Field = std::function<HyperScalar(const HyperScalar&, const HyperScalar&, const HyperScalar&, int)>;
  AnalyticModel(Field f, Field rho, Field phi) : fields_{std::move(f), std::move(rho), std::move(phi)} {}
  bool has(NetId id) const override { return static_cast<bool>(fields_[static_cast<int>(id)]); }
  std::vector<HyperScalar> eval(NetId id, const SensorTable& sensors, const MionetQuery& q) override;

 private:
  std::array<Field, 3> fields_;
};

/// Loss of the conservation-augmented model (F, P, Phi).
template <class T>
LossTerms<T> ap_loss(FieldModel<T>& model, const CollocationBatch& batch, const PenaltyWeights& w,
                     const EpsilonProfile& eps, const CollisionSpec& spec);

/// Two-network baseline (F, Phi); rho in the Poisson rows is <F>.
/// The breakdown reports kinetic, poisson, ic_f and ic_phi only.
template <class T>
LossTerms<T> pi_loss(FieldModel<T>& model, const CollocationBatch& batch, const PiWeights& w,
                     const EpsilonProfile& eps, const CollisionSpec& spec);

LossBreakdown ap_loss(const OperatorTriple& triple, const CollocationBatch& batch, const PenaltyWeights& w,
                      const EpsilonProfile& eps, const CollisionSpec& spec);
LossBreakdown pi_loss(const OperatorTriple& triple, const CollocationBatch& batch, const PiWeights& w,
                      const EpsilonProfile& eps, const CollisionSpec& spec);

}  // namespace apmionet
