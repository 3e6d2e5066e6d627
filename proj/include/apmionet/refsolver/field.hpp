#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace apmionet {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Uniform cell-centred phase-space grid, periodic in x.
class PhaseGrid {
 public:
  PhaseGrid() = default;
  PhaseGrid(int nx, int nv, double x_min, double period, double v_min, double v_max);

  int nx() const { return nx_; }
  int nv() const { return nv_; }
  double x_min() const { return x_min_; }
  double period() const { return period_; }
  double v_min() const { return v_min_; }
  double v_max() const { return v_max_; }
  double dx() const { return period_ / nx_; }
  double dv() const { return (v_max_ - v_min_) / nv_; }
  double x(int i) const { return x_min_ + (i + 0.5) * dx(); }
  double v(int j) const { return v_min_ + (j + 0.5) * dv(); }
  std::vector<double> xs() const;
  std::vector<double> vs() const;

 private:
  int nx_ = 8;
  int nv_ = 8;
  double x_min_ = 0.0;
  double period_ = 1.0;
  double v_min_ = -1.0;
  double v_max_ = 1.0;
};

struct SolutionField {
  PhaseGrid grid;
  std::string problem;
  /// Free-form description of epsilon ("1", "mixing", "limit", ...).
  std::string epsilon;
  /// Input couple that produced the initial data.
  double h = 1.0;
  double alpha = 0.0;
  std::vector<double> times;
  RowMat rho;  // Nt x Nx
  RowMat E;    // Nt x Nx
  /// Optional snapshots, each Nx x Nv.
  std::vector<RowMat> f;

  /// Throws when shapes disagree or rho < -1e-8.
  void validate() const;
  double mass(int it) const { return rho.row(it).sum() * grid.dx(); }
};

/// sqrt(sum |pred - ref|^2 / sum |ref|^2).
double relative_l2(const RowMat& pred, const RowMat& ref);
/// Per time: sqrt(sum_x E^2 dx).
std::vector<double> electric_energy(const RowMat& E, double dx);

/// CSV with header t,x,rho,E.
void write_field_csv(const std::string& path, const SolutionField& s);
void save_field(const std::string& path, const SolutionField& s);
SolutionField load_field(const std::string& path);

}  // namespace apmionet
