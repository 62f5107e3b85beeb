#pragma once

#include <cmath>
#include <numbers>

namespace snakesynth::testing {

/// Phi(z) = 1/2 + integral_0^z phi(t) dt by composite Simpson with 20000 panels.
inline double integrated_normal_cdf(double z) {
  constexpr int panels = 20000;
  const double h = z / panels;
  auto phi = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi); };
  double acc = phi(0.0) + phi(z);
  for (int k = 1; k < panels; ++k) acc += (k % 2 ? 4.0 : 2.0) * phi(k * h);
  return 0.5 + acc * h / 3.0;
}

/// Quantile by bisection on the integrated CDF.
inline double bisection_quantile(double p) {
  double lo = -10.0, hi = 10.0;
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    (integrated_normal_cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace snakesynth::testing
