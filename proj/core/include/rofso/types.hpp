#pragma once

#include <cstddef>
#include <vector>

namespace rofso {

/// Per-wavelength channel gains h_1..h_m observed before allocating power.
struct CsiVector {
  std::vector<double> h;

  std::size_t size() const noexcept { return h.size(); }
  bool operator==(const CsiVector&) const = default;
};

/// Optical power per wavelength in watts, each in [0, P_S].
struct PowerAllocation {
  std::vector<double> p;

  std::size_t size() const noexcept { return p.size(); }
  double total() const noexcept;
  bool operator==(const PowerAllocation&) const = default;
};

/// Service priorities, one per wavelength, all nonnegative.
struct Weights {
  std::vector<double> omega;

  std::size_t size() const noexcept { return omega.size(); }
  bool operator==(const Weights&) const = default;
};

inline double PowerAllocation::total() const noexcept {
  double sum = 0.0;
  for (double v : p) sum += v;
  return sum;
}

/// True when every power lies in [0, peak].
bool within_peak(const PowerAllocation& alloc, double peak);

}  // namespace rofso
