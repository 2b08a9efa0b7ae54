#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "s2sent/numerics/tensor.hpp"

namespace s2sent {

/// Central-difference gradient of a scalar function: (f(x+he) - f(x-he)) / 2h
/// for every coordinate e.
inline Tensor finite_difference_gradient(const std::function<double(const Tensor&)>& f,
                                         const Tensor& x, double step) {
  require(step > 0.0, "finite_difference_gradient: step must be positive");
  Tensor grad(x.shape());
  Tensor probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double original = probe[i];
    probe[i] = original + step;
    const double up = f(probe);
    probe[i] = original - step;
    const double down = f(probe);
    probe[i] = original;
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

/// Elementwise relative error |a - b| / max(|a|, |b|, floor). The floor turns
/// the measure absolute for entries whose true value is near zero, where a
/// central difference carries only rounding noise.
inline double max_relative_error(const Tensor& analytic, const Tensor& numeric,
                                 double floor = 1e-4) {
  if (analytic.shape() != numeric.shape()) {
    throw DimensionError("max_relative_error: shape mismatch " + shape_string(analytic.shape()) +
                         " vs " + shape_string(numeric.shape()));
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double a = analytic[i], n = numeric[i];
    const double denom = std::max({std::abs(a), std::abs(n), floor});
    worst = std::max(worst, std::abs(a - n) / denom);
  }
  return worst;
}

}  // namespace s2sent
