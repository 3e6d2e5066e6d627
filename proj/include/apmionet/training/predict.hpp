#pragma once

#include <span>

#include "apmionet/refsolver/field.hpp"
#include "apmionet/training/config.hpp"
#include "apmionet/training/dataset.hpp"

namespace apmionet {

struct Prediction {
  RowMat rho;  // Nt x Nx
  RowMat E;    // Nt x Nx, -d(phi)/dx
};

/// Fields of a trained triple for one input couple on times x xs. The density
/// comes from the P net when present and from the velocity quadrature of F
/// otherwise.
Prediction predict_fields(const ExperimentConfig& cfg, const OperatorTriple& triple, const InputCouple& couple,
                          bool with_f0, std::span<const double> times, std::span<const double> xs);

/// max_t |int rho(t) dx - int rho(0) dx| / int rho(0) dx on a uniform grid.
double mass_drift(const RowMat& rho);

}  // namespace apmionet
