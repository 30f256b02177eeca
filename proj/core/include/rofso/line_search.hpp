#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace rofso {

struct ScalarMax {
  double x;
  double value;
};

/// Golden-section search for a maximum of `f` on [lo, hi]; stops when the
/// bracket is narrower than `tol`. Finds a local maximum only.
template <typename F>
ScalarMax golden_section_maximize(F&& f, double lo, double hi, double tol) {
  constexpr double inv_phi = 0.61803398874989484820;  // (sqrt(5) - 1) / 2
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, f(x)};
}

/// Global maximum of `f` on [lo, hi] to grid resolution: scan `grid_points`
/// equispaced nodes, then refine the best node's neighbouring bracket with
/// golden-section search. The returned value is never below any grid node,
/// and ties go to the smaller abscissa.
template <typename F>
ScalarMax grid_golden_maximize(F&& f, double lo, double hi, std::size_t grid_points,
                               double tol) {
  if (grid_points < 2) {
    throw std::invalid_argument("grid_golden_maximize: need at least two grid points");
  }
  const double step = (hi - lo) / static_cast<double>(grid_points - 1);
  std::size_t best = 0;
  double best_value = f(lo);
  for (std::size_t k = 1; k < grid_points; ++k) {
    const double x = k + 1 == grid_points ? hi : lo + static_cast<double>(k) * step;
    const double v = f(x);
    if (v > best_value) {
      best = k;
      best_value = v;
    }
  }
  const double best_x = best + 1 == grid_points ? hi : lo + static_cast<double>(best) * step;

  const double a = best == 0 ? lo : best_x - step;
  const double b = best + 1 == grid_points ? hi : best_x + step;
  const ScalarMax refined = golden_section_maximize(f, std::fmax(a, lo), std::fmin(b, hi), tol);
  if (refined.value > best_value ||
      (refined.value == best_value && refined.x < best_x)) {
    return refined;
  }
  return {best_x, best_value};
}

}  // namespace rofso
