#pragma once

#include <string>

namespace fapprox {

/// Outcome of one numerically verified estimate.
struct EstimateReport {
  std::string name;
  bool passed = true;
  double constant = 0.0;          ///< supremum (empirical constant or max ratio)
  double refined_constant = 0.0;  ///< same quantity on the refined sample, when computed
  std::string witness;            ///< sample attaining the supremum or the first violation
  std::string note;
};

}  // namespace fapprox
