#include "apmionet/networks/mionet.hpp"

#include <map>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>

#include "apmionet/networks/fourier_embed.hpp"

namespace apmionet {

namespace {

std::vector<int> sub_sizes(int in, int hidden_layers, int width, int out) {
  std::vector<int> s{in};
  for (int k = 0; k < hidden_layers; ++k) s.push_back(width);
  s.push_back(out);
  return s;
}

std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

MionetShape MionetShape::make(int n_f0_sensors, int n_h_sensors, int hidden_layers, int width, int p,
                              double period, int modes, bool has_v, bool softplus) {
  if (p < 1) throw std::invalid_argument("latent width p must be >= 1");
  if (!(period > 0.0)) throw std::invalid_argument("embedding period must be positive");
  if (modes < 1) throw std::invalid_argument("embedding modes must be >= 1");
  MionetShape s;
  if (n_f0_sensors > 0) s.branch1 = MlpShape(sub_sizes(n_f0_sensors, hidden_layers, width, p));
  s.branch2 = MlpShape(sub_sizes(n_h_sensors, hidden_layers, width, p));
  s.p = p;
  s.period = period;
  s.modes = modes;
  s.has_v = has_v;
  s.softplus = softplus;
  s.trunk = MlpShape(sub_sizes(s.trunk_in(), hidden_layers, width, p));
  return s;
}

bool MionetShape::operator==(const MionetShape& o) const {
  return branch1 == o.branch1 && branch2 == o.branch2 && trunk == o.trunk && p == o.p && period == o.period &&
         modes == o.modes && has_v == o.has_v && softplus == o.softplus;
}

void mionet_fill(const MionetShape& shape, std::uint64_t seed, std::span<double> out) {
  if (out.size() != shape.n_params()) throw std::invalid_argument("mionet_fill: size mismatch");
  if (shape.branch1) glorot_fill(*shape.branch1, splitmix(seed ^ 1), out.subspan(0, shape.branch1->n_params()));
  glorot_fill(shape.branch2, splitmix(seed ^ 2), out.subspan(shape.off_branch2(), shape.branch2.n_params()));
  glorot_fill(shape.trunk, splitmix(seed ^ 3), out.subspan(shape.off_trunk(), shape.trunk.n_params()));
  out[shape.off_b0()] = 0.0;
}

MIONetParams mionet_init(const MionetShape& shape, std::uint64_t seed) {
  MIONetParams p{shape, std::vector<double>(shape.n_params())};
  mionet_fill(shape, seed, p.values);
  return p;
}

template <class T>
Hyper<T> mionet_combine(const std::vector<Hyper<T>>* b1, const std::vector<Hyper<T>>& b2,
                        const std::vector<Hyper<T>>& t, const T& b0) {
  if (b2.size() != t.size() || (b1 != nullptr && b1->size() != t.size())) {
    throw std::invalid_argument("mionet_combine: branch and trunk widths differ");
  }
  Hyper<T> acc(b0);
  for (std::size_t j = 0; j < t.size(); ++j) {
    const Hyper<T> g = b1 != nullptr ? (*b1)[j] * b2[j] : b2[j];
    acc = acc + g * t[j];
  }
  return acc;
}

template <class T>
Hyper<T> mionet_eval(const MionetShape& shape, std::span<const double> w, std::span<const double> u1,
                     std::span<const double> u2, const std::vector<Hyper<T>>& y) {
  if (w.size() != shape.n_params()) throw std::invalid_argument("mionet_eval: parameter size mismatch");
  if (static_cast<int>(u2.size()) != shape.branch2.in()) {
    throw std::invalid_argument("mionet_eval: h sensor vector has length " + std::to_string(u2.size()) +
                                ", expected " + std::to_string(shape.branch2.in()));
  }
  auto as_hyper = [](std::span<const double> u) {
    std::vector<Hyper<T>> v;
    v.reserve(u.size());
    for (double e : u) v.emplace_back(e);
    return v;
  };
  std::vector<Hyper<T>> b1;
  if (shape.branch1) {
    if (static_cast<int>(u1.size()) != shape.branch1->in()) {
      throw std::invalid_argument("mionet_eval: f0 sensor vector has length " + std::to_string(u1.size()) +
                                  ", expected " + std::to_string(shape.branch1->in()));
    }
    b1 = modified_mlp_forward<T>(*shape.branch1, w.subspan(0, shape.branch1->n_params()), as_hyper(u1));
  }
  const auto b2 = modified_mlp_forward<T>(shape.branch2, w.subspan(shape.off_branch2(), shape.branch2.n_params()),
                                          as_hyper(u2));
  const auto t = modified_mlp_forward<T>(shape.trunk, w.subspan(shape.off_trunk(), shape.trunk.n_params()), y);
  return mionet_combine<T>(shape.branch1 ? &b1 : nullptr, b2, t, T(w[shape.off_b0()]));
}

template <class T>
std::vector<Hyper<T>> trunk_input(const MionetShape& shape, const Hyper<T>& t, const Hyper<T>& x,
                                  const Hyper<T>& v) {
  std::vector<Hyper<T>> y{t};
  for (auto& e : fourier_embed(x, shape.period, shape.modes)) y.push_back(e);
  if (shape.has_v) y.push_back(v);
  return y;
}

template Hyper<double> mionet_combine(const std::vector<Hyper<double>>*, const std::vector<Hyper<double>>&,
                                      const std::vector<Hyper<double>>&, const double&);
template Hyper<Var> mionet_combine(const std::vector<Hyper<Var>>*, const std::vector<Hyper<Var>>&,
                                   const std::vector<Hyper<Var>>&, const Var&);
template Hyper<double> mionet_eval(const MionetShape&, std::span<const double>, std::span<const double>,
                                   std::span<const double>, const std::vector<Hyper<double>>&);
template Hyper<Var> mionet_eval(const MionetShape&, std::span<const double>, std::span<const double>,
                                std::span<const double>, const std::vector<Hyper<Var>>&);
template std::vector<Hyper<double>> trunk_input(const MionetShape&, const Hyper<double>&, const Hyper<double>&,
                                                const Hyper<double>&);
template std::vector<Hyper<Var>> trunk_input(const MionetShape&, const Hyper<Var>&, const Hyper<Var>&,
                                             const Hyper<Var>&);

namespace {

RowMat build_trunk_input(const MionetShape& s, const MionetQuery& q) {
  const int B = q.size();
  const Layout& L = q.layout;
  const int C = L.components();
  RowMat X = RowMat::Zero(static_cast<Eigen::Index>(C) * B, s.trunk_in());
  const double w = 2.0 * std::numbers::pi / s.period;
  const int it = L.first_index(Direction::t);
  const int ix = L.first_index(Direction::x);
  const int iv = L.first_index(Direction::v);
  const int kx = L.second_index(Direction::x);
  const int vcol = 1 + 2 * s.modes;
  for (int b = 0; b < B; ++b) {
    X(b, 0) = q.t[static_cast<std::size_t>(b)];
    if (it >= 0) X((1 + it) * B + b, 0) = 1.0;
    const double x = q.x[static_cast<std::size_t>(b)];
    for (int j = 1; j <= s.modes; ++j) {
      const double jw = j * w;
      const double c = std::cos(jw * x), sn = std::sin(jw * x);
      const int col = 1 + 2 * (j - 1);
      X(b, col) = c;
      X(b, col + 1) = sn;
      if (ix >= 0) {
        X((1 + ix) * B + b, col) = -jw * sn;
        X((1 + ix) * B + b, col + 1) = jw * c;
      }
      if (kx >= 0) {
        const int r = (1 + L.n_first() + kx) * B + b;
        X(r, col) = -jw * jw * c;
        X(r, col + 1) = -jw * jw * sn;
      }
    }
    if (s.has_v) {
      X(b, vcol) = q.v[static_cast<std::size_t>(b)];
      if (iv >= 0) X((1 + iv) * B + b, vcol) = 1.0;
    }
  }
  return X;
}

void validate_query(const MionetShape& s, const SensorTable& sensors, const MionetQuery& q) {
  const auto B = q.t.size();
  if (B == 0) throw std::invalid_argument("mionet query is empty");
  if (q.x.size() != B || q.couple.size() != B || (s.has_v && q.v.size() != B)) {
    throw std::invalid_argument("mionet query arrays have different lengths");
  }
  if (s.branch1 && sensors.f0.cols() != s.branch1->in()) {
    throw std::invalid_argument("f0 sensor table has " + std::to_string(sensors.f0.cols()) +
                                " columns, expected " + std::to_string(s.branch1->in()));
  }
  if (sensors.h.cols() != s.branch2.in()) {
    throw std::invalid_argument("h sensor table has " + std::to_string(sensors.h.cols()) + " columns, expected " +
                                std::to_string(s.branch2.in()));
  }
  for (int c : q.couple) {
    if (c < 0 || c >= sensors.h.rows() || (s.branch1 && c >= sensors.f0.rows())) {
      throw std::out_of_range("mionet query references unknown input couple " + std::to_string(c));
    }
  }
}

struct BatchState {
  MionetShape shape;
  std::vector<int> gather;
  std::optional<MlpBatch> b1, b2, tr;
  RowMat Y1, Y2, G, T;
  int B = 0;
  int C = 0;
};

// Everything up to the combined raw outputs; the state keeps the caches.
Eigen::VectorXd run_forward(BatchState& st, std::span<const double> w, const SensorTable& sensors,
                            const MionetQuery& q) {
  const MionetShape& s = st.shape;
  validate_query(s, sensors, q);
  if (w.size() != s.n_params()) throw std::invalid_argument("mionet: parameter size mismatch");
  std::map<int, int> local;
  for (int c : q.couple) local.emplace(c, 0);
  std::vector<int> uniq;
  for (auto& [c, idx] : local) {
    idx = static_cast<int>(uniq.size());
    uniq.push_back(c);
  }
  st.gather.resize(q.couple.size());
  for (std::size_t b = 0; b < q.couple.size(); ++b) st.gather[b] = local[q.couple[b]];
  const int n_u = static_cast<int>(uniq.size());

  st.b2.emplace(s.branch2, Layout{}, n_u);
  RowMat Xh(n_u, s.branch2.in());
  for (int i = 0; i < n_u; ++i) Xh.row(i) = sensors.h.row(uniq[static_cast<std::size_t>(i)]);
  st.Y2 = st.b2->forward(w.subspan(s.off_branch2(), s.branch2.n_params()), Xh);
  if (s.branch1) {
    st.b1.emplace(*s.branch1, Layout{}, n_u);
    RowMat Xf(n_u, s.branch1->in());
    for (int i = 0; i < n_u; ++i) Xf.row(i) = sensors.f0.row(uniq[static_cast<std::size_t>(i)]);
    st.Y1 = st.b1->forward(w.subspan(0, s.branch1->n_params()), Xf);
    st.G = st.Y1.cwiseProduct(st.Y2);
  } else {
    st.G = st.Y2;
  }
  st.B = q.size();
  st.C = q.layout.components();
  st.tr.emplace(s.trunk, q.layout, st.B);
  st.T = st.tr->forward(w.subspan(s.off_trunk(), s.trunk.n_params()), build_trunk_input(s, q));

  Eigen::VectorXd out(static_cast<Eigen::Index>(st.C) * st.B);
  const double b0 = w[s.off_b0()];
  for (int c = 0; c < st.C; ++c) {
    for (int b = 0; b < st.B; ++b) {
      const Eigen::Index r = static_cast<Eigen::Index>(c) * st.B + b;
      out(r) = st.T.row(r).dot(st.G.row(st.gather[static_cast<std::size_t>(b)])) + (c == 0 ? b0 : 0.0);
    }
  }
  return out;
}

void run_backward(const BatchState& st, std::span<const double> w, std::span<const double> out_adj,
                  std::span<double> gw) {
  const MionetShape& s = st.shape;
  RowMat Tbar(st.T.rows(), st.T.cols());
  RowMat Gbar = RowMat::Zero(st.G.rows(), st.G.cols());
  double gb0 = 0.0;
  for (int c = 0; c < st.C; ++c) {
    for (int b = 0; b < st.B; ++b) {
      const Eigen::Index r = static_cast<Eigen::Index>(c) * st.B + b;
      const double a = out_adj[static_cast<std::size_t>(r)];
      const int g = st.gather[static_cast<std::size_t>(b)];
      Tbar.row(r) = a * st.G.row(g);
      Gbar.row(g) += a * st.T.row(r);
      if (c == 0) gb0 += a;
    }
  }
  gw[s.off_b0()] += gb0;
  st.tr->backward(w.subspan(s.off_trunk(), s.trunk.n_params()), Tbar,
                  gw.subspan(s.off_trunk(), s.trunk.n_params()));
  if (s.branch1) {
    const RowMat Y1bar = Gbar.cwiseProduct(st.Y2);
    const RowMat Y2bar = Gbar.cwiseProduct(st.Y1);
    st.b1->backward(w.subspan(0, s.branch1->n_params()), Y1bar, gw.subspan(0, s.branch1->n_params()));
    st.b2->backward(w.subspan(s.off_branch2(), s.branch2.n_params()), Y2bar,
                    gw.subspan(s.off_branch2(), s.branch2.n_params()));
  } else {
    st.b2->backward(w.subspan(s.off_branch2(), s.branch2.n_params()), Gbar,
                    gw.subspan(s.off_branch2(), s.branch2.n_params()));
  }
}

}  // namespace

Eigen::VectorXd mionet_forward(const MionetShape& shape, std::span<const double> w, const SensorTable& sensors,
                               const MionetQuery& q) {
  BatchState st;
  st.shape = shape;
  return run_forward(st, w, sensors, q);
}

std::vector<HyperScalar> mionet_eval_batch(const MionetShape& shape, std::span<const double> w,
                                           const SensorTable& sensors, const MionetQuery& q) {
  const Eigen::VectorXd raw = mionet_forward(shape, w, sensors, q);
  const int B = q.size();
  const int C = q.layout.components();
  std::vector<HyperScalar> out;
  out.reserve(static_cast<std::size_t>(B));
  for (int b = 0; b < B; ++b) {
    HyperScalar h(raw(b), q.layout);
    for (int c = 1; c < C; ++c) h.component(c) = raw(static_cast<Eigen::Index>(c) * B + b);
    out.push_back(shape.softplus ? softplus(h) : h);
  }
  return out;
}

std::vector<HyperVar> mionet_record(ParamTape& tape, const MionetShape& shape, std::span<const double> w,
                                    std::size_t offset, const SensorTable& sensors, const MionetQuery& q) {
  if (offset + shape.n_params() > w.size() || w.size() != tape.n_params()) {
    throw std::invalid_argument("mionet_record: parameter range does not match the tape");
  }
  auto st = std::make_shared<BatchState>();
  st->shape = shape;
  const auto net_w = w.subspan(offset, shape.n_params());
  const Eigen::VectorXd raw = run_forward(*st, net_w, sensors, q);
  const auto first = tape.block(std::span<const double>(raw.data(), static_cast<std::size_t>(raw.size())),
                                [st, net_w, offset](std::span<const double> adj, ParamTape& tp) {
                                  run_backward(*st, net_w, adj,
                                               tp.param_gradient().subspan(offset, st->shape.n_params()));
                                });
  const int B = q.size();
  const int C = q.layout.components();
  std::vector<HyperVar> out;
  out.reserve(static_cast<std::size_t>(B));
  for (int b = 0; b < B; ++b) {
    HyperVar h(tape.slot_var(first + static_cast<std::uint32_t>(b)), q.layout);
    for (int c = 1; c < C; ++c) h.component(c) = tape.slot_var(first + static_cast<std::uint32_t>(c * B + b));
    out.push_back(shape.softplus ? softplus(h) : h);
  }
  return out;
}

}  // namespace apmionet
