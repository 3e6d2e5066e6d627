#pragma once

#include <stdexcept>

namespace apmionet {

/// Divergence, non-finite values, stability violations or solver
/// non-convergence.
class NumericFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace apmionet
