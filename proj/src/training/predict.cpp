#include "apmionet/training/predict.hpp"

#include <cmath>
#include <stdexcept>

#include "apmionet/residuals/loss.hpp"

namespace apmionet {

Prediction predict_fields(const ExperimentConfig& cfg, const OperatorTriple& triple, const InputCouple& couple,
                          bool with_f0, std::span<const double> times, std::span<const double> xs) {
  const auto nt = static_cast<Eigen::Index>(times.size());
  const auto nx = static_cast<Eigen::Index>(xs.size());
  const SensorTable sensors = sensor_table(std::span<const InputCouple>(&couple, 1), with_f0);
  NetworkModel model(triple);
  Prediction out{RowMat(nt, nx), RowMat(nt, nx)};

  MionetQuery q;
  q.layout = Layout({Direction::x});
  for (double t : times) {
    for (double x : xs) {
      q.t.push_back(t);
      q.x.push_back(x);
      q.v.push_back(0.0);
      q.couple.push_back(0);
    }
  }
  const auto phi = model.eval(NetId::Phi, sensors, q);
  for (Eigen::Index k = 0; k < nt * nx; ++k) out.E(k / nx, k % nx) = -phi[static_cast<std::size_t>(k)].d(Direction::x);

  q.layout = Layout{};
  if (triple.has(NetId::P)) {
    const auto rho = model.eval(NetId::P, sensors, q);
    for (Eigen::Index k = 0; k < nt * nx; ++k) out.rho(k / nx, k % nx) = rho[static_cast<std::size_t>(k)].value();
    return out;
  }
  const auto quad = gauss_legendre(cfg.quad_nodes, cfg.domain.v_min, cfg.domain.v_max);
  MionetQuery qf;
  const auto nq = static_cast<std::size_t>(quad.size());
  for (std::size_t k = 0; k < q.t.size(); ++k) {
    for (std::size_t j = 0; j < nq; ++j) {
      qf.t.push_back(q.t[k]);
      qf.x.push_back(q.x[k]);
      qf.v.push_back(quad.nodes[j]);
      qf.couple.push_back(0);
    }
  }
  const auto f = model.eval(NetId::F, sensors, qf);
  for (Eigen::Index k = 0; k < nt * nx; ++k) {
    double s = 0.0;
    for (std::size_t j = 0; j < nq; ++j) s += quad.weights[j] * f[static_cast<std::size_t>(k) * nq + j].value();
    out.rho(k / nx, k % nx) = s;
  }
  return out;
}

double mass_drift(const RowMat& rho) {
  if (rho.rows() == 0) throw std::invalid_argument("mass_drift: empty field");
  const double m0 = rho.row(0).sum();
  if (m0 == 0.0) throw std::invalid_argument("mass_drift: zero initial mass");
  double d = 0.0;
  for (Eigen::Index t = 1; t < rho.rows(); ++t) d = std::max(d, std::abs(rho.row(t).sum() - m0) / std::abs(m0));
  return d;
}

}  // namespace apmionet
