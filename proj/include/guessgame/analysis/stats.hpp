#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "guessgame/core/errors.hpp"

namespace gg::stats {

inline constexpr double kZ95 = 1.96;

inline double mean(std::span<const double> xs) {
  if (xs.empty()) throw InvariantError("mean of an empty sample");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

/// Population (ddof=0) or sample (ddof=1) standard deviation.
inline double stddev(std::span<const double> xs, int ddof) {
  if (static_cast<int>(xs.size()) <= ddof) throw InvariantError("too few values for a standard deviation");
  double m = mean(xs);
  double ss = 0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(static_cast<int>(xs.size()) - ddof));
}

/// Standardizes to mean 0 and population sd 1.
inline std::vector<double> zscore(std::span<const double> xs) {
  double m = mean(xs);
  double s = stddev(xs, 0);
  if (!(s > 0)) throw NumericalError("cannot standardize a constant covariate");
  std::vector<double> out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back((x - m) / s);
  return out;
}

/// 1-based ranks; ties share the average of the positions they span.
inline std::vector<double> average_ranks(std::span<const double> xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
    double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

inline double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw InvariantError("pearson inputs differ in length");
  double mx = mean(xs), my = mean(ys);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double dx = xs[i] - mx, dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0) throw NumericalError("correlation undefined for a constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

struct CorrelationResult {
  double rho = 0;
  double p_value = 1;
  int n = 0;
};

/// Two-sided p-value of r under the t approximation with n-2 df.
inline double correlation_p_value(double r, int n) {
  if (n < 3) throw InvariantError("need n >= 3 for a correlation p-value");
  if (std::abs(r) >= 1.0) return 0.0;
  double t = r * std::sqrt((n - 2) / (1.0 - r * r));
  boost::math::students_t dist(n - 2);
  return std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))), 0.0, 1.0);
}

inline CorrelationResult spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw InvariantError("spearman inputs differ in length");
  if (xs.size() < 3) throw InvariantError("spearman needs at least 3 pairs");
  auto rx = average_ranks(xs);
  auto ry = average_ranks(ys);
  CorrelationResult r;
  r.n = static_cast<int>(xs.size());
  r.rho = pearson(rx, ry);
  r.p_value = correlation_p_value(r.rho, r.n);
  return r;
}

/// Two-sided normal p-value for a Wald statistic.
inline double wald_p_value(double z) {
  boost::math::normal n01;
  return std::clamp(2.0 * boost::math::cdf(boost::math::complement(n01, std::abs(z))), 0.0, 1.0);
}

}  // namespace gg::stats
