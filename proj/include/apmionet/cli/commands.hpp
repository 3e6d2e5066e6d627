#pragma once

#include <string>
#include <vector>

#include "apmionet/refsolver/kinetic.hpp"
#include "apmionet/training/config.hpp"
#include "apmionet/training/dataset.hpp"
#include "apmionet/training/predict.hpp"

namespace apmionet {

enum class ReferenceSolver { Auto, Kinetic, Limit };

ReferenceSolver parse_reference_solver(const std::string& s);

/// Reference problem of one input couple under the configured physics.
RefProblem reference_problem(const ExperimentConfig& cfg, double h, double alpha);
PhaseGrid reference_grid(const ExperimentConfig& cfg);

/// Auto picks the limit solver for constant epsilon below 1e-2 and the
/// kinetic integrator otherwise.
SolutionField run_reference(const ExperimentConfig& cfg, double h, double alpha, ReferenceSolver solver);

struct FieldMetrics {
  double rho = 0.0;
  double E = 0.0;
  double energy = 0.0;
};

/// Relative l2 errors of density, field and electric energy.
FieldMetrics compare_fields(const RowMat& rho, const RowMat& E, const SolutionField& ref);

/// Entry point of the apmionet executable. Returns the process exit code:
/// 0 success, 1 usage or input error, 2 numeric failure.
int run_cli(int argc, char** argv);

}  // namespace apmionet
