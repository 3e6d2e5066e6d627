#include "apmionet/kinetics/collisions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace apmionet {

double maxwellian(double v) { return std::exp(-0.5 * v * v) / std::sqrt(2.0 * std::numbers::pi); }

double local_maxwellian(double v, double dphi) { return maxwellian(v + dphi); }

double fermi_dirac(double v, double mu) {
  const double a = 0.5 * v * v - mu;
  if (a > 0.0) {
    const double e = std::exp(-a);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(a));
}

CollisionKind parse_collision_kind(const std::string& s) {
  if (s == "fokker_planck") return CollisionKind::FokkerPlanck;
  if (s == "isotropic") return CollisionKind::Isotropic;
  if (s == "nondegenerate") return CollisionKind::NonDegenerate;
  if (s == "degenerate") return CollisionKind::Degenerate;
  throw std::invalid_argument("unknown collision kind '" + s + "'");
}

std::string to_string(CollisionKind k) {
  switch (k) {
    case CollisionKind::FokkerPlanck: return "fokker_planck";
    case CollisionKind::Isotropic: return "isotropic";
    case CollisionKind::NonDegenerate: return "nondegenerate";
    case CollisionKind::Degenerate: return "degenerate";
  }
  return "?";
}

double psi_anisotropic(double v, double w) { return 1.0 + std::exp(-(v - w) * (v - w)); }

CollisionSpec::CollisionSpec(CollisionKind kind, VelocityQuadrature quad, CrossSection psi)
    : kind_(kind), quad_(std::move(quad)), psi_(std::move(psi)) {
  const int n = quad_.size();
  if (n < 1 || quad_.weights.size() != quad_.nodes.size()) throw std::invalid_argument("malformed quadrature");
  m_nodes_.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    m_nodes_[i] = maxwellian(quad_.nodes[i]);
    m_mass_ += quad_.weights[i] * m_nodes_[i];
  }
  const bool kernel = kind_ == CollisionKind::NonDegenerate || kind_ == CollisionKind::Degenerate;
  if (!kernel) {
    psi_ = [](double, double) { return 1.0; };
    return;
  }
  if (!psi_) psi_ = [](double, double) { return 1.0; };
  psi_min_ = std::numeric_limits<double>::infinity();
  psi_max_ = -psi_min_;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double a = psi_(quad_.nodes[i], quad_.nodes[j]);
      const double b = psi_(quad_.nodes[j], quad_.nodes[i]);
      if (!std::isfinite(a) || std::fabs(a - b) > 1e-12 * std::max(1.0, std::fabs(a))) {
        throw std::invalid_argument("cross section is not symmetric at nodes " + std::to_string(i) + ", " +
                                    std::to_string(j));
      }
      psi_min_ = std::min(psi_min_, a);
      psi_max_ = std::max(psi_max_, a);
    }
  }
  if (!(psi_min_ > 0.0)) throw std::invalid_argument("cross section must be bounded below by a positive constant");
}

namespace {

template <class T>
Hyper<T> value_only(const T& v) {
  return Hyper<T>(v, Layout{});
}

template <class T>
std::vector<T> node_values(std::span<const Hyper<T>> f, const CollisionSpec& spec) {
  if (static_cast<int>(f.size()) != spec.quad().size()) {
    throw std::invalid_argument("collision operator expects one value per quadrature node");
  }
  std::vector<T> out;
  out.reserve(f.size());
  for (const auto& e : f) out.push_back(e.value());
  return out;
}

}  // namespace

template <class T>
Hyper<T> q_fp(const Hyper<T>& f, double v) {
  const T& fv = f.require_d(Direction::v, "q_fp");
  const T& fvv = f.require_dd(Direction::v, "q_fp");
  return value_only<T>(f.value() + v * fv + fvv);
}

template <class T>
Hyper<T> q_isotropic(const Hyper<T>& f, const Hyper<T>& rho, double v, const CollisionSpec& spec) {
  return value_only<T>(maxwellian(v) * rho.value() - spec.maxwellian_mass() * f.value());
}

template <class T>
Hyper<T> q_nondeg(std::span<const Hyper<T>> f_nodes, const Hyper<T>& f_here, double v, const CollisionSpec& spec) {
  const auto fj = node_values(f_nodes, spec);
  const auto& q = spec.quad();
  const double Mv = maxwellian(v);
  std::vector<double> c(fj.size());
  double loss = 0.0;
  for (std::size_t j = 0; j < fj.size(); ++j) {
    const double wpsi = q.weights[j] * spec.psi(v, q.nodes[j]);
    c[j] = wpsi * Mv;
    loss += wpsi * spec.node_maxwellian()[j];
  }
  const T gain = linear_combination(std::span<const T>(fj), c);
  return value_only<T>(gain - loss * f_here.value());
}

template <class T>
Hyper<T> q_deg(std::span<const Hyper<T>> f_nodes, const Hyper<T>& f_here, double v, const CollisionSpec& spec) {
  const auto fj = node_values(f_nodes, spec);
  const auto& q = spec.quad();
  const double Mv = maxwellian(v);
  std::vector<double> a(fj.size());
  std::vector<double> b(fj.size());
  double sm = 0.0;
  for (std::size_t j = 0; j < fj.size(); ++j) {
    const double wpsi = q.weights[j] * spec.psi(v, q.nodes[j]);
    a[j] = wpsi * Mv;
    b[j] = wpsi * spec.node_maxwellian()[j];
    sm += b[j];
  }
  // (1 - f) M(v) S1 - f (S_M - S2)
  const T s1 = linear_combination(std::span<const T>(fj), a);
  const T s2 = linear_combination(std::span<const T>(fj), b);
  const T& f = f_here.value();
  return value_only<T>((T(1.0) - f) * s1 - f * (T(sm) - s2));
}

template <class T>
Hyper<T> moment(std::span<const Hyper<T>> f_nodes, int order, const VelocityQuadrature& quad) {
  if (order != 0 && order != 1) throw std::invalid_argument("moment order must be 0 or 1");
  if (static_cast<int>(f_nodes.size()) != quad.size()) {
    throw std::invalid_argument("moment expects one value per quadrature node");
  }
  std::vector<double> c(quad.weights);
  if (order == 1) {
    for (std::size_t i = 0; i < c.size(); ++i) c[i] *= quad.nodes[i];
  }
  return linear_combination(f_nodes, std::span<const double>(c));
}

#define APMIONET_INSTANTIATE(T)                                                                                    \
  template Hyper<T> q_fp<T>(const Hyper<T>&, double);                                                              \
  template Hyper<T> q_isotropic<T>(const Hyper<T>&, const Hyper<T>&, double, const CollisionSpec&);              \
  template Hyper<T> q_nondeg<T>(std::span<const Hyper<T>>, const Hyper<T>&, double, const CollisionSpec&);       \
  template Hyper<T> q_deg<T>(std::span<const Hyper<T>>, const Hyper<T>&, double, const CollisionSpec&);          \
  template Hyper<T> moment<T>(std::span<const Hyper<T>>, int, const VelocityQuadrature&);

APMIONET_INSTANTIATE(double)
APMIONET_INSTANTIATE(Var)

#undef APMIONET_INSTANTIATE

}  // namespace apmionet
