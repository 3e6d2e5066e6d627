#include "apmionet/residuals/loss.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "apmionet/residuals/residuals.hpp"

namespace apmionet {

void PenaltyWeights::validate() const {
  for (double l : {lambda1, lambda2, lambda3_rho, lambda3_f, lambda3_phi, lambda4}) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw std::invalid_argument("penalty weights must be finite and >= 0");
  }
}

template <class T>
LossBreakdown LossTerms<T>::values() const {
  return {value_of(kinetic), value_of(mass),   value_of(poisson), value_of(consistency),
          value_of(ic_rho),  value_of(ic_f),   value_of(ic_phi),  value_of(total)};
}

template struct LossTerms<double>;
template struct LossTerms<Var>;

EpsilonProfile constant_epsilon(double eps) {
  if (!(eps >= 0.0)) throw std::invalid_argument("epsilon must be nonnegative");
  return [eps](double) { return eps; };
}

CollocationBatch sample_collocation(const SensorTable& sensors, std::span<const InitialCondition> ics,
                                    const Domain& domain, int n_dom, int n_ic, std::uint64_t seed) {
  if (static_cast<std::size_t>(sensors.h.rows()) != ics.size()) {
    throw std::invalid_argument("sample_collocation: one initial condition per sensor row expected");
  }
  if (n_dom < 0 || n_ic < 0) throw std::invalid_argument("sample_collocation: negative point count");
  CollocationBatch b;
  b.sensors = sensors;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const auto C = static_cast<int>(ics.size());
  for (int c = 0; c < C; ++c) {
    b.h.push_back(ics[static_cast<std::size_t>(c)].h);
    for (int j = 0; j < n_dom; ++j) {
      b.dom_couple.push_back(c);
      b.dom_t.push_back(domain.T * U(rng));
      b.dom_x.push_back(domain.x_min + domain.period * U(rng));
      b.dom_v.push_back(domain.v_min + (domain.v_max - domain.v_min) * U(rng));
    }
    for (int j = 0; j < n_ic; ++j) {
      b.ic_couple.push_back(c);
      b.ic_x.push_back(domain.x_min + domain.period * U(rng));
      b.ic_v.push_back(domain.v_min + (domain.v_max - domain.v_min) * U(rng));
    }
  }
  bind_initial_targets(b, ics);
  return b;
}

void bind_initial_targets(CollocationBatch& b, std::span<const InitialCondition> ics) {
  const auto n = static_cast<std::size_t>(b.n_ic());
  b.ic_f0.resize(n);
  b.ic_rho0.resize(n);
  b.ic_phi0.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto& ic = ics[static_cast<std::size_t>(b.ic_couple[j])];
    b.ic_f0[j] = ic.f0(b.ic_x[j], b.ic_v[j]);
    b.ic_rho0[j] = ic.rho0(b.ic_x[j]);
    b.ic_phi0[j] = ic.phi0(b.ic_x[j]);
  }
}

std::vector<HyperScalar> NetworkModel::eval(NetId id, const SensorTable& sensors, const MionetQuery& q) {
  return mionet_eval_batch(triple_.shape(id), triple_.net_params(id), sensors, q);
}

std::vector<HyperVar> TapedNetworkModel::eval(NetId id, const SensorTable& sensors, const MionetQuery& q) {
  return mionet_record(tape_, triple_.shape(id), triple_.params(), triple_.offset(id), sensors, q);
}

std::vector<HyperScalar> AnalyticModel::eval(NetId id, const SensorTable&, const MionetQuery& q) {
  const Field& fn = fields_[static_cast<int>(id)];
  if (!fn) throw std::logic_error("analytic model has no such field");
  std::vector<HyperScalar> out;
  out.reserve(static_cast<std::size_t>(q.size()));
  for (int b = 0; b < q.size(); ++b) {
    std::array<HyperScalar, 3> c{HyperScalar(q.t[b]), HyperScalar(q.x[b]), HyperScalar(q.v[b])};
    if (!q.layout.is_constant()) c = seed_coordinates(q.t[b], q.x[b], q.v[b], q.layout);
    HyperScalar r = fn(c[0], c[1], c[2], q.couple[b]);
    if (r.layout().is_constant() && !q.layout.is_constant()) r = HyperScalar(r.value(), q.layout);
    out.push_back(r);
  }
  return out;
}

namespace {

template <class T>
T mean_square(const std::vector<T>& r) {
  if (r.empty()) return T(0.0);
  std::vector<T> sq;
  sq.reserve(r.size());
  for (const T& e : r) sq.push_back(e * e);
  const std::vector<double> c(r.size(), 1.0 / static_cast<double>(r.size()));
  return linear_combination(std::span<const T>(sq), std::span<const double>(c));
}

MionetQuery domain_query(const CollocationBatch& b, Layout layout) {
  return {std::move(layout), b.dom_t, b.dom_x, b.dom_v, b.dom_couple};
}

// (t_j, x_j, node_i) for every domain point j, node-major within a point.
MionetQuery node_query(const std::vector<int>& couple, const std::vector<double>& t, const std::vector<double>& x,
                       const VelocityQuadrature& quad, Layout layout) {
  MionetQuery q{std::move(layout), {}, {}, {}, {}};
  const std::size_t n = t.size() * quad.nodes.size();
  q.t.reserve(n);
  q.x.reserve(n);
  q.v.reserve(n);
  q.couple.reserve(n);
  for (std::size_t j = 0; j < t.size(); ++j) {
    for (double v : quad.nodes) {
      q.t.push_back(t[j]);
      q.x.push_back(x[j]);
      q.v.push_back(v);
      q.couple.push_back(couple[j]);
    }
  }
  return q;
}

template <class T>
Hyper<T> collision(const CollisionSpec& spec, std::span<const Hyper<T>> nodes, const Hyper<T>& f, double v) {
  switch (spec.kind()) {
    case CollisionKind::FokkerPlanck:
      return q_fp(f, v);
    case CollisionKind::Isotropic:
      return q_isotropic(f, moment(nodes, 0, spec.quad()), v, spec);
    case CollisionKind::NonDegenerate:
      return q_nondeg(nodes, f, v, spec);
    case CollisionKind::Degenerate:
      return q_deg(nodes, f, v, spec);
  }
  throw std::logic_error("unknown collision kind");
}

Layout f_domain_layout(const CollisionSpec& spec) {
  if (spec.kind() == CollisionKind::FokkerPlanck) {
    return Layout({Direction::t, Direction::x, Direction::v}, {Direction::v});
  }
  return Layout({Direction::t, Direction::x, Direction::v});
}

template <class T>
T weighted_sum(std::initializer_list<T> terms, std::initializer_list<double> weights) {
  const std::vector<T> tv(terms);
  const std::vector<double> wv(weights);
  return linear_combination(std::span<const T>(tv), std::span<const double>(wv));
}

}  // namespace

template <class T>
LossTerms<T> ap_loss(FieldModel<T>& model, const CollocationBatch& b, const PenaltyWeights& w,
                     const EpsilonProfile& eps, const CollisionSpec& spec) {
  w.validate();
  if (!model.has(NetId::P)) throw std::invalid_argument("ap_loss needs the P network");
  const auto& quad = spec.quad();
  const auto nq = static_cast<std::size_t>(quad.size());
  const auto N = static_cast<std::size_t>(b.n_dom());
  const auto& S = b.sensors;

  const auto F = model.eval(NetId::F, S, domain_query(b, f_domain_layout(spec)));
  const auto Fn = model.eval(NetId::F, S, node_query(b.dom_couple, b.dom_t, b.dom_x, quad, Layout({Direction::x})));
  const auto P = model.eval(NetId::P, S, domain_query(b, Layout({Direction::t})));
  const auto Phi = model.eval(NetId::Phi, S, domain_query(b, Layout({Direction::x}, {Direction::x})));

  std::vector<T> kin(N), mass(N), pois(N), cons(N);
  for (std::size_t j = 0; j < N; ++j) {
    const std::span<const Hyper<T>> nodes(Fn.data() + j * nq, nq);
    const double v = b.dom_v[j];
    const double h = b.h[static_cast<std::size_t>(b.dom_couple[j])];
    const auto Q = collision(spec, nodes, F[j], v);
    kin[j] = kinetic_residual(eps(b.dom_x[j]), F[j], Phi[j], v, Q).value();
    mass[j] = mass_residual(P[j], moment(nodes, 1, quad)).value();
    pois[j] = poisson_residual(Phi[j], P[j], h).value();
    cons[j] = consistency_residual(P[j], nodes, quad).value();
  }

  const auto M = static_cast<std::size_t>(b.n_ic());
  const std::vector<double> zeros(M, 0.0);
  const MionetQuery qf{Layout{}, zeros, b.ic_x, b.ic_v, b.ic_couple};
  const auto F0 = model.eval(NetId::F, S, qf);
  const auto P0 = model.eval(NetId::P, S, qf);
  const auto Phi0 = model.eval(NetId::Phi, S, qf);
  std::vector<T> icr(M), icf(M), icp(M);
  for (std::size_t j = 0; j < M; ++j) {
    icr[j] = P0[j].value() - b.ic_rho0[j];
    icf[j] = F0[j].value() - b.ic_f0[j];
    icp[j] = Phi0[j].value() - b.ic_phi0[j];
  }

  LossTerms<T> L;
  L.kinetic = mean_square(kin);
  L.mass = mean_square(mass);
  L.poisson = mean_square(pois);
  L.consistency = mean_square(cons);
  L.ic_rho = mean_square(icr);
  L.ic_f = mean_square(icf);
  L.ic_phi = mean_square(icp);
  L.total = weighted_sum<T>({L.kinetic, L.mass, L.poisson, L.consistency, L.ic_rho, L.ic_f, L.ic_phi},
                            {w.lambda1, w.lambda1, w.lambda1, w.lambda2, w.lambda3_rho, w.lambda3_f, w.lambda3_phi});
  return L;
}

template <class T>
LossTerms<T> pi_loss(FieldModel<T>& model, const CollocationBatch& b, const PiWeights& w, const EpsilonProfile& eps,
                     const CollisionSpec& spec) {
  for (double m : {w.mu1, w.mu2, w.mu3}) {
    if (!(m >= 0.0) || !std::isfinite(m)) throw std::invalid_argument("baseline weights must be finite and >= 0");
  }
  const auto& quad = spec.quad();
  const auto nq = static_cast<std::size_t>(quad.size());
  const auto N = static_cast<std::size_t>(b.n_dom());
  const auto& S = b.sensors;

  const auto F = model.eval(NetId::F, S, domain_query(b, f_domain_layout(spec)));
  const auto Fn = model.eval(NetId::F, S, node_query(b.dom_couple, b.dom_t, b.dom_x, quad, Layout{}));
  const auto Phi = model.eval(NetId::Phi, S, domain_query(b, Layout({Direction::x}, {Direction::x})));

  std::vector<T> kin(N), pois(N);
  for (std::size_t j = 0; j < N; ++j) {
    const std::span<const Hyper<T>> nodes(Fn.data() + j * nq, nq);
    const double v = b.dom_v[j];
    const double h = b.h[static_cast<std::size_t>(b.dom_couple[j])];
    const auto Q = collision(spec, nodes, F[j], v);
    kin[j] = kinetic_residual(eps(b.dom_x[j]), F[j], Phi[j], v, Q).value();
    pois[j] = poisson_residual(Phi[j], moment(nodes, 0, quad), h).value();
  }

  const auto M = static_cast<std::size_t>(b.n_ic());
  const std::vector<double> zeros(M, 0.0);
  const auto F0 = model.eval(NetId::F, S, MionetQuery{Layout{}, zeros, b.ic_x, b.ic_v, b.ic_couple});
  const auto F0n = model.eval(NetId::F, S, node_query(b.ic_couple, zeros, b.ic_x, quad, Layout{}));
  const auto Phi0 = model.eval(NetId::Phi, S,
                               MionetQuery{Layout({Direction::x}, {Direction::x}), zeros, b.ic_x, b.ic_v, b.ic_couple});
  std::vector<T> icf(M), icp(M);
  for (std::size_t j = 0; j < M; ++j) {
    const std::span<const Hyper<T>> nodes(F0n.data() + j * nq, nq);
    const double h = b.h[static_cast<std::size_t>(b.ic_couple[j])];
    icf[j] = F0[j].value() - b.ic_f0[j];
    icp[j] = poisson_residual(Phi0[j], moment(nodes, 0, quad), h).value();
  }

  LossTerms<T> L;
  L.kinetic = mean_square(kin);
  L.poisson = mean_square(pois);
  L.ic_f = mean_square(icf);
  L.ic_phi = mean_square(icp);
  L.total = weighted_sum<T>({L.kinetic, L.poisson, L.ic_f, L.ic_phi}, {w.mu1, w.mu1, w.mu2, w.mu2});
  return L;
}

template LossTerms<double> ap_loss(FieldModel<double>&, const CollocationBatch&, const PenaltyWeights&,
                                   const EpsilonProfile&, const CollisionSpec&);
template LossTerms<Var> ap_loss(FieldModel<Var>&, const CollocationBatch&, const PenaltyWeights&,
                                const EpsilonProfile&, const CollisionSpec&);
template LossTerms<double> pi_loss(FieldModel<double>&, const CollocationBatch&, const PiWeights&,
                                   const EpsilonProfile&, const CollisionSpec&);
template LossTerms<Var> pi_loss(FieldModel<Var>&, const CollocationBatch&, const PiWeights&, const EpsilonProfile&,
                                const CollisionSpec&);

LossBreakdown ap_loss(const OperatorTriple& triple, const CollocationBatch& batch, const PenaltyWeights& w,
                      const EpsilonProfile& eps, const CollisionSpec& spec) {
  NetworkModel m(triple);
  return ap_loss<double>(m, batch, w, eps, spec).values();
}

LossBreakdown pi_loss(const OperatorTriple& triple, const CollocationBatch& batch, const PiWeights& w,
                      const EpsilonProfile& eps, const CollisionSpec& spec) {
  NetworkModel m(triple);
  return pi_loss<double>(m, batch, w, eps, spec).values();
}

}  // namespace apmionet
