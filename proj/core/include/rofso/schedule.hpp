#pragma once

#include <cmath>
#include <cstddef>

namespace rofso {

/// Stepsize sequence: either a constant or base / sqrt(k + 1).
struct StepSchedule {
  enum class Kind { constant, inv_sqrt };

  double base = 0.05;
  Kind kind = Kind::constant;

  double at(std::size_t k) const {
    return kind == Kind::constant ? base : base / std::sqrt(static_cast<double>(k) + 1.0);
  }

  bool operator==(const StepSchedule&) const = default;
};

}  // namespace rofso
