#include "apmionet/refsolver/field.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "apmionet/networks/binary_io.hpp"

namespace apmionet {

PhaseGrid::PhaseGrid(int nx, int nv, double x_min, double period, double v_min, double v_max)
    : nx_(nx), nv_(nv), x_min_(x_min), period_(period), v_min_(v_min), v_max_(v_max) {
  if (nx < 8 || nv < 8) throw std::invalid_argument("phase grid needs Nx, Nv >= 8");
  if (!(period > 0.0) || !(v_max > v_min)) throw std::invalid_argument("phase grid: empty domain");
}

std::vector<double> PhaseGrid::xs() const {
  std::vector<double> r(static_cast<std::size_t>(nx_));
  for (int i = 0; i < nx_; ++i) r[static_cast<std::size_t>(i)] = x(i);
  return r;
}

std::vector<double> PhaseGrid::vs() const {
  std::vector<double> r(static_cast<std::size_t>(nv_));
  for (int j = 0; j < nv_; ++j) r[static_cast<std::size_t>(j)] = v(j);
  return r;
}

void SolutionField::validate() const {
  const auto nt = static_cast<Eigen::Index>(times.size());
  if (rho.rows() != nt || E.rows() != nt || rho.cols() != grid.nx() || E.cols() != grid.nx()) {
    throw std::runtime_error("solution field: inconsistent shapes");
  }
  if (!f.empty()) {
    if (static_cast<Eigen::Index>(f.size()) != nt) throw std::runtime_error("solution field: snapshot count mismatch");
    for (const auto& s : f) {
      if (s.rows() != grid.nx() || s.cols() != grid.nv()) throw std::runtime_error("solution field: snapshot shape");
    }
  }
  if (nt > 0 && rho.minCoeff() < -1e-8) throw std::runtime_error("solution field: negative density");
}

double relative_l2(const RowMat& pred, const RowMat& ref) {
  if (pred.rows() != ref.rows() || pred.cols() != ref.cols()) throw std::invalid_argument("relative_l2: shape mismatch");
  const double den = ref.squaredNorm();
  if (den == 0.0) throw std::invalid_argument("relative_l2: reference is identically zero");
  return std::sqrt((pred - ref).squaredNorm() / den);
}

std::vector<double> electric_energy(const RowMat& E, double dx) {
  std::vector<double> r(static_cast<std::size_t>(E.rows()));
  for (Eigen::Index t = 0; t < E.rows(); ++t) r[static_cast<std::size_t>(t)] = std::sqrt(E.row(t).squaredNorm() * dx);
  return r;
}

void write_field_csv(const std::string& path, const SolutionField& s) {
  s.validate();
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw std::runtime_error("cannot write " + path);
  std::fprintf(fp, "t,x,rho,E\n");
  for (std::size_t t = 0; t < s.times.size(); ++t) {
    for (int i = 0; i < s.grid.nx(); ++i) {
      const auto r = static_cast<Eigen::Index>(t);
      std::fprintf(fp, "%.10g,%.10g,%.15e,%.15e\n", s.times[t], s.grid.x(i), s.rho(r, i), s.E(r, i));
    }
  }
  if (std::fclose(fp) != 0) throw std::runtime_error("failed writing " + path);
}

namespace {

void put_string(std::ostream& os, const std::string& s) {
  binio::put_u32(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& is) {
  const auto n = binio::get_u32(is, "string length");
  if (n > 4096) throw std::runtime_error("field file: implausible string length");
  std::string s(n, '\0');
  is.read(s.data(), n);
  binio::need(is, "string");
  return s;
}

void put_mat(std::ostream& os, const RowMat& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) binio::put_f64(os, m.data()[i]);
}

void get_mat(std::istream& is, RowMat& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = binio::get_f64(is, "field values");
}

}  // namespace

void save_field(const std::string& path, const SolutionField& s) {
  s.validate();
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path);
  binio::put_magic(os, "FIELD1");
  put_string(os, s.problem);
  put_string(os, s.epsilon);
  binio::put_f64(os, s.h);
  binio::put_f64(os, s.alpha);
  const auto& g = s.grid;
  binio::put_u32(os, static_cast<std::uint32_t>(g.nx()));
  binio::put_u32(os, static_cast<std::uint32_t>(g.nv()));
  for (double d : {g.x_min(), g.period(), g.v_min(), g.v_max()}) binio::put_f64(os, d);
  binio::put_u64(os, s.times.size());
  for (double t : s.times) binio::put_f64(os, t);
  put_mat(os, s.rho);
  put_mat(os, s.E);
  binio::put_u8(os, s.f.empty() ? 0 : 1);
  for (const auto& f : s.f) put_mat(os, f);
  if (!os) throw std::runtime_error("failed writing " + path);
}

SolutionField load_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  binio::expect_magic(is, "FIELD1");
  SolutionField s;
  s.problem = get_string(is);
  s.epsilon = get_string(is);
  s.h = binio::get_f64(is, "h");
  s.alpha = binio::get_f64(is, "alpha");
  const int nx = static_cast<int>(binio::get_u32(is, "nx"));
  const int nv = static_cast<int>(binio::get_u32(is, "nv"));
  double d[4];
  for (double& e : d) e = binio::get_f64(is, "grid");
  s.grid = PhaseGrid(nx, nv, d[0], d[1], d[2], d[3]);
  const auto nt = binio::get_u64(is, "time count");
  if (nt > (1u << 24)) throw std::runtime_error("field file: implausible time count");
  s.times.resize(nt);
  for (double& t : s.times) t = binio::get_f64(is, "times");
  s.rho.resize(static_cast<Eigen::Index>(nt), nx);
  s.E.resize(static_cast<Eigen::Index>(nt), nx);
  get_mat(is, s.rho);
  get_mat(is, s.E);
  if (binio::get_u8(is, "snapshot flag") != 0) {
    s.f.assign(nt, RowMat(nx, nv));
    for (auto& f : s.f) get_mat(is, f);
  }
  if (is.peek() != std::char_traits<char>::eof()) throw std::runtime_error("trailing bytes in " + path);
  s.validate();
  return s;
}

}  // namespace apmionet
