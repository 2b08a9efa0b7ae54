#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "s2sent/numerics/tensor.hpp"

namespace s2sent::harness {

/// 1-based ranks; tied values share the average of their positions.
inline std::vector<double> average_ranks(std::span<const double> xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

inline double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw DimensionError("pearson: lengths " + std::to_string(xs.size()) + " and " +
                         std::to_string(ys.size()));
  }
  require(xs.size() >= 2, "pearson: need at least two observations");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  require(sxx > 0.0 && syy > 0.0, "correlation undefined for constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

inline double spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw DimensionError("spearman: lengths " + std::to_string(xs.size()) + " and " +
                         std::to_string(ys.size()));
  }
  require(xs.size() >= 2, "spearman: need at least two observations");
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  return pearson(rx, ry);
}

inline double mean(std::span<const double> xs) {
  require(!xs.empty(), "mean of empty sequence");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

/// Sample standard deviation (n - 1); 0 for a single value.
inline double sample_std(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

struct PairedTTest {
  double mean_difference = 0.0;
  double t = 0.0;
  double p_two_sided = 1.0;
  std::size_t dof = 0;
};

/// Paired t-test on x - y.
inline PairedTTest paired_t_test(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("paired_t_test: unequal sample sizes");
  require(x.size() >= 2, "paired_t_test: need at least two pairs");
  std::vector<double> d(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - y[i];
  PairedTTest out;
  out.dof = d.size() - 1;
  out.mean_difference = mean(d);
  const double se = sample_std(d) / std::sqrt(static_cast<double>(d.size()));
  if (se == 0.0) {
    out.t = out.mean_difference == 0.0 ? 0.0 : std::copysign(INFINITY, out.mean_difference);
    out.p_two_sided = out.mean_difference == 0.0 ? 1.0 : 0.0;
    return out;
  }
  out.t = out.mean_difference / se;
  const boost::math::students_t dist(static_cast<double>(out.dof));
  out.p_two_sided = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(out.t)));
  return out;
}

}  // namespace s2sent::harness
