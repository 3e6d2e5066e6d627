#include "apmionet/training/dataset.hpp"

#include <fstream>
#include <random>
#include <stdexcept>

#include "apmionet/networks/binary_io.hpp"

namespace apmionet {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::vector<double> sensor_x_grid(const ExperimentConfig& cfg) {
  const int L = cfg.sampling.sensors_x;
  std::vector<double> x(static_cast<std::size_t>(L));
  for (int l = 0; l < L; ++l) x[l] = cfg.domain.x_min + cfg.domain.period * l / L;
  return x;
}

std::vector<double> sensor_v_grid(const ExperimentConfig& cfg) {
  const int Q = cfg.sampling.sensors_v;
  std::vector<double> v(static_cast<std::size_t>(Q));
  for (int q = 0; q < Q; ++q) v[q] = cfg.domain.v_min + (cfg.domain.v_max - cfg.domain.v_min) * q / (Q - 1);
  return v;
}

InputCouple make_couple(const ExperimentConfig& cfg, double h, double alpha) {
  const auto ic = cfg.initial_condition(h, alpha);
  const auto xs = sensor_x_grid(cfg);
  const auto vs = sensor_v_grid(cfg);
  InputCouple c{h, alpha, {}, {}};
  c.f0_sensors.reserve(xs.size() * vs.size());
  for (double x : xs) {
    for (double v : vs) c.f0_sensors.push_back(ic.f0(x, v));
  }
  c.h_sensors.assign(xs.size(), h);
  return c;
}

Dataset sample_dataset(const ExperimentConfig& cfg, std::uint64_t seed) {
  const auto& s = cfg.sampling;
  Dataset ds;
  ds.sensors_x = s.sensors_x;
  ds.sensors_v = s.sensors_v;
  ds.uses_f0 = cfg.problem != ProblemId::mixing;
  if (s.fixed) {
    ds.train.push_back(make_couple(cfg, s.fixed_h, s.fixed_alpha));
    ds.test = ds.train;
    return ds;
  }
  const bool with_alpha = cfg.problem != ProblemId::mixing;
  for (int i = 0; i < s.n_train + s.n_test; ++i) {
    std::mt19937_64 rng(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(i) + 1)));
    std::uniform_real_distribution<double> H(s.h_min, s.h_max);
    std::uniform_real_distribution<double> A(s.alpha_min, s.alpha_max);
    const double h = H(rng);
    const double a = with_alpha ? A(rng) : 0.0;
    (i < s.n_train ? ds.train : ds.test).push_back(make_couple(cfg, h, a));
  }
  return ds;
}

SensorTable sensor_table(std::span<const InputCouple> couples, bool with_f0) {
  if (couples.empty()) throw std::invalid_argument("sensor_table: no couples");
  const auto nf = with_f0 ? static_cast<Eigen::Index>(couples[0].f0_sensors.size()) : 0;
  const auto nh = static_cast<Eigen::Index>(couples[0].h_sensors.size());
  SensorTable t{RowMat(static_cast<Eigen::Index>(couples.size()), nf),
                RowMat(static_cast<Eigen::Index>(couples.size()), nh)};
  for (std::size_t c = 0; c < couples.size(); ++c) {
    const auto r = static_cast<Eigen::Index>(c);
    if (static_cast<Eigen::Index>(couples[c].h_sensors.size()) != nh ||
        (with_f0 && static_cast<Eigen::Index>(couples[c].f0_sensors.size()) != nf)) {
      throw std::invalid_argument("sensor_table: couples have different sensor counts");
    }
    for (Eigen::Index i = 0; i < nf; ++i) t.f0(r, i) = couples[c].f0_sensors[static_cast<std::size_t>(i)];
    for (Eigen::Index i = 0; i < nh; ++i) t.h(r, i) = couples[c].h_sensors[static_cast<std::size_t>(i)];
  }
  return t;
}

std::vector<InitialCondition> couple_initial_conditions(const ExperimentConfig& cfg,
                                                        std::span<const InputCouple> couples) {
  std::vector<InitialCondition> out;
  out.reserve(couples.size());
  for (const auto& c : couples) out.push_back(cfg.initial_condition(c.h, c.alpha));
  return out;
}

namespace {

void put_couples(std::ostream& os, const std::vector<InputCouple>& cs) {
  binio::put_u64(os, cs.size());
  for (const auto& c : cs) {
    binio::put_f64(os, c.h);
    binio::put_f64(os, c.alpha);
    for (double v : c.f0_sensors) binio::put_f64(os, v);
    for (double v : c.h_sensors) binio::put_f64(os, v);
  }
}

std::vector<InputCouple> get_couples(std::istream& is, std::size_t nf, std::size_t nh) {
  const auto n = binio::get_u64(is, "couple count");
  if (n > (1u << 24)) throw std::runtime_error("dataset: implausible couple count");
  std::vector<InputCouple> cs(n);
  for (auto& c : cs) {
    c.h = binio::get_f64(is, "h");
    c.alpha = binio::get_f64(is, "alpha");
    c.f0_sensors.resize(nf);
    c.h_sensors.resize(nh);
    for (double& v : c.f0_sensors) v = binio::get_f64(is, "f0 sensors");
    for (double& v : c.h_sensors) v = binio::get_f64(is, "h sensors");
  }
  return cs;
}

}  // namespace

void save_dataset(const std::string& path, const Dataset& ds) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open dataset for writing: " + path);
  binio::put_magic(os, "DATA1");
  binio::put_u32(os, static_cast<std::uint32_t>(ds.sensors_x));
  binio::put_u32(os, static_cast<std::uint32_t>(ds.sensors_v));
  binio::put_u8(os, ds.uses_f0 ? 1 : 0);
  put_couples(os, ds.train);
  put_couples(os, ds.test);
  if (!os) throw std::runtime_error("failed writing dataset: " + path);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open dataset: " + path);
  binio::expect_magic(is, "DATA1");
  Dataset ds;
  ds.sensors_x = static_cast<int>(binio::get_u32(is, "sensors_x"));
  ds.sensors_v = static_cast<int>(binio::get_u32(is, "sensors_v"));
  ds.uses_f0 = binio::get_u8(is, "f0 flag") != 0;
  if (ds.sensors_x < 1 || ds.sensors_v < 1 || ds.sensors_x > 4096 || ds.sensors_v > 4096) {
    throw std::runtime_error("dataset: implausible sensor grid");
  }
  const auto nf = static_cast<std::size_t>(ds.sensors_x) * static_cast<std::size_t>(ds.sensors_v);
  ds.train = get_couples(is, nf, static_cast<std::size_t>(ds.sensors_x));
  ds.test = get_couples(is, nf, static_cast<std::size_t>(ds.sensors_x));
  if (is.peek() != std::char_traits<char>::eof()) throw std::runtime_error("trailing bytes in dataset: " + path);
  return ds;
}

}  // namespace apmionet
