#include "apmionet/networks/operator_triple.hpp"

#include <fstream>
#include <stdexcept>

#include "apmionet/networks/binary_io.hpp"

namespace apmionet {

OperatorTriple::OperatorTriple(const NetworkConfig& cfg, int n_f0_sensors, int n_h_sensors, double period,
                               bool with_p) {
  shapes_[idx(NetId::F)] = MionetShape::make(n_f0_sensors, n_h_sensors, cfg.hidden_layers, cfg.width, cfg.p, period,
                                             cfg.modes, true, true);
  if (with_p) {
    shapes_[idx(NetId::P)] = MionetShape::make(n_f0_sensors, n_h_sensors, cfg.hidden_layers, cfg.width, cfg.p,
                                               period, cfg.modes, false, true);
  }
  shapes_[idx(NetId::Phi)] = MionetShape::make(n_f0_sensors, n_h_sensors, cfg.hidden_layers, cfg.width, cfg.p,
                                               period, cfg.modes, false, false);
  layout_offsets();
}

OperatorTriple::OperatorTriple(std::optional<MionetShape> F, std::optional<MionetShape> P,
                               std::optional<MionetShape> Phi)
    : shapes_{std::move(F), std::move(P), std::move(Phi)} {
  if (!shapes_[0] || !shapes_[2]) throw std::invalid_argument("operator triple needs F and Phi nets");
  layout_offsets();
}

void OperatorTriple::layout_offsets() {
  std::size_t off = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    offsets_[i] = off;
    if (shapes_[i]) off += shapes_[i]->n_params();
  }
  params_.assign(off, 0.0);
}

void OperatorTriple::initialize(std::uint64_t seed) {
  for (std::size_t i = 0; i < 3; ++i) {
    if (!shapes_[i]) continue;
    mionet_fill(*shapes_[i], seed * 31 + i,
                std::span<double>(params_).subspan(offsets_[i], shapes_[i]->n_params()));
  }
}

const MionetShape& OperatorTriple::shape(NetId id) const {
  if (!shapes_[idx(id)]) throw std::logic_error("operator triple has no P net");
  return *shapes_[idx(id)];
}

std::span<const double> OperatorTriple::net_params(NetId id) const {
  return std::span<const double>(params_).subspan(offset(id), shape(id).n_params());
}

FieldValues operator_eval(const OperatorTriple& triple, const CoupleSensors& u, double t, double x, double v,
                          const Layout& layout) {
  std::array<HyperScalar, 3> c{HyperScalar(t), HyperScalar(x), HyperScalar(v)};
  if (!layout.is_constant()) c = seed_coordinates(t, x, v, layout);
  std::vector<Direction> tx;
  std::vector<Direction> tx2;
  for (int i = 0; i < layout.n_first(); ++i) {
    if (layout.first(i) != Direction::v) tx.push_back(layout.first(i));
  }
  if (layout.second_index(Direction::x) >= 0) tx2.push_back(Direction::x);
  const Layout Ltx(tx, tx2);
  std::array<HyperScalar, 3> ctx{HyperScalar(t), HyperScalar(x), HyperScalar(v)};
  if (!Ltx.is_constant()) ctx = seed_coordinates(t, x, v, Ltx);

  auto eval = [&](NetId id, const std::array<HyperScalar, 3>& s) {
    const MionetShape& sh = triple.shape(id);
    const auto y = trunk_input<double>(sh, s[0], s[1], s[2]);
    const auto raw = mionet_eval<double>(sh, triple.net_params(id), u.f0, u.h, y);
    return sh.softplus ? softplus(raw) : raw;
  };
  FieldValues out{eval(NetId::F, c), HyperScalar(0.0), eval(NetId::Phi, ctx)};
  if (triple.has(NetId::P)) out.rho = eval(NetId::P, ctx);
  return out;
}

namespace {

void put_mlp(std::ostream& os, const MlpShape& s) {
  binio::put_u32(os, static_cast<std::uint32_t>(s.sizes().size()));
  for (int n : s.sizes()) binio::put_u32(os, static_cast<std::uint32_t>(n));
}

MlpShape get_mlp(std::istream& is) {
  const auto n = binio::get_u32(is, "layer count");
  if (n < 3 || n > 64) throw std::runtime_error("checkpoint: implausible layer count " + std::to_string(n));
  std::vector<int> sizes(n);
  for (auto& e : sizes) e = static_cast<int>(binio::get_u32(is, "layer size"));
  return MlpShape(sizes);
}

}  // namespace

void save_checkpoint(const std::string& path, const OperatorTriple& triple) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  binio::put_magic(os);
  for (const auto& s : triple.shapes()) {
    binio::put_u8(os, s.has_value() ? 1 : 0);
    if (!s) continue;
    binio::put_u8(os, s->branch1 ? 1 : 0);
    if (s->branch1) put_mlp(os, *s->branch1);
    put_mlp(os, s->branch2);
    put_mlp(os, s->trunk);
    binio::put_u32(os, static_cast<std::uint32_t>(s->p));
    binio::put_f64(os, s->period);
    binio::put_u32(os, static_cast<std::uint32_t>(s->modes));
    binio::put_u8(os, s->has_v ? 1 : 0);
    binio::put_u8(os, s->softplus ? 1 : 0);
    binio::put_u64(os, s->n_params());
  }
  binio::put_u64(os, triple.n_params());
  for (double w : triple.params()) binio::put_f64(os, w);
  if (!os) throw std::runtime_error("failed writing checkpoint: " + path);
}

OperatorTriple load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
  binio::expect_magic(is);
  std::array<std::optional<MionetShape>, 3> shapes;
  for (auto& s : shapes) {
    if (binio::get_u8(is, "net flag") == 0) continue;
    MionetShape m;
    if (binio::get_u8(is, "branch flag") != 0) m.branch1 = get_mlp(is);
    m.branch2 = get_mlp(is);
    m.trunk = get_mlp(is);
    m.p = static_cast<int>(binio::get_u32(is, "p"));
    m.period = binio::get_f64(is, "period");
    m.modes = static_cast<int>(binio::get_u32(is, "modes"));
    m.has_v = binio::get_u8(is, "has_v") != 0;
    m.softplus = binio::get_u8(is, "softplus") != 0;
    if (binio::get_u64(is, "param count") != m.n_params() || m.trunk.in() != m.trunk_in() ||
        m.trunk.out() != m.p || m.branch2.out() != m.p || (m.branch1 && m.branch1->out() != m.p)) {
      throw std::runtime_error("checkpoint manifest is inconsistent: " + path);
    }
    s = std::move(m);
  }
  OperatorTriple t(shapes[0], shapes[1], shapes[2]);
  if (binio::get_u64(is, "total parameter count") != t.n_params()) {
    throw std::runtime_error("checkpoint parameter count mismatch: " + path);
  }
  for (double& w : t.params()) w = binio::get_f64(is, "parameters");
  if (is.peek() != std::char_traits<char>::eof()) throw std::runtime_error("trailing bytes in checkpoint: " + path);
  return t;
}

}  // namespace apmionet
