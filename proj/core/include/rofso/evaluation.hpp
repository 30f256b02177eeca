#pragma once

#include <cstddef>

namespace rofso {

/// Objective and constraint slack of a policy on a held-out CSI set.
struct EvalPoint {
  double objective;
  double slack;  ///< P_T - mean total power
};

struct EvalRecord {
  std::size_t iteration;
  double lambda;
  double objective;
  double slack;
};

}  // namespace rofso
