#pragma once

#include <functional>
#include <span>
#include <string>

#include "apmionet/diffcore/hyper.hpp"
#include "apmionet/kinetics/quadrature.hpp"

namespace apmionet {

double maxwellian(double v);
/// Field-shifted equilibrium, maxwellian(v + dphi).
double local_maxwellian(double v, double dphi);
double fermi_dirac(double v, double mu);

enum class CollisionKind { FokkerPlanck, Isotropic, NonDegenerate, Degenerate };

CollisionKind parse_collision_kind(const std::string& s);
std::string to_string(CollisionKind k);

using CrossSection = std::function<double(double, double)>;

/// 1 + exp(-(v - w)^2).
double psi_anisotropic(double v, double w);

class CollisionSpec {
 public:
  /// Validates that psi is symmetric and bounded below by a positive constant
  /// on the node pairs. psi is ignored (and may be empty) for FokkerPlanck and
  /// Isotropic.
  CollisionSpec(CollisionKind kind, VelocityQuadrature quad, CrossSection psi = {});

  CollisionKind kind() const { return kind_; }
  const VelocityQuadrature& quad() const { return quad_; }
  double psi(double v, double w) const { return psi_(v, w); }
  double psi_min() const { return psi_min_; }
  double psi_max() const { return psi_max_; }
  /// Quadrature value of <M> on this rule.
  double maxwellian_mass() const { return m_mass_; }
  /// Maxwellian values at the nodes.
  std::span<const double> node_maxwellian() const { return m_nodes_; }

 private:
  CollisionKind kind_;
  VelocityQuadrature quad_;
  CrossSection psi_;
  double psi_min_ = 1.0;
  double psi_max_ = 1.0;
  double m_mass_ = 0.0;
  std::vector<double> m_nodes_;
};

// Collision operators return the value only (constant layout): residuals never
// differentiate Q.

/// f + v f_v + f_vv. f must carry d/dv and d2/dv2.
template <class T>
Hyper<T> q_fp(const Hyper<T>& f, double v);

/// M(v) rho - f <M>. With rho = <f> this integrates to zero on the rule; for
/// the exact moment <M> = 1 it is M rho - f.
template <class T>
Hyper<T> q_isotropic(const Hyper<T>& f, const Hyper<T>& rho, double v, const CollisionSpec& spec);

/// sum_j w_j psi(v, v_j) (M(v) f_j - M_j f).
template <class T>
Hyper<T> q_nondeg(std::span<const Hyper<T>> f_nodes, const Hyper<T>& f_here, double v, const CollisionSpec& spec);

/// sum_j w_j psi(v, v_j) (M(v) f_j (1 - f) - M_j f (1 - f_j)).
template <class T>
Hyper<T> q_deg(std::span<const Hyper<T>> f_nodes, const Hyper<T>& f_here, double v, const CollisionSpec& spec);

/// sum_i w_i v_i^order f_i with all derivative components carried through.
template <class T>
Hyper<T> moment(std::span<const Hyper<T>> f_nodes, int order, const VelocityQuadrature& quad);

}  // namespace apmionet
