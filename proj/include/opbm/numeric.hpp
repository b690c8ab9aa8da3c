#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace opbm {

/// Kahan-compensated accumulator. Adding values in a fixed order gives a
/// bit-reproducible sum with O(1) rounding error independent of length.
struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) {
    double y = x - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  double value() const { return sum; }
};

inline double kahan_total(std::span<const double> xs) {
  KahanSum acc;
  for (double x : xs) acc.add(x);
  return acc.value();
}

/// Sample mean and standard error of the mean, two-pass, fixed order.
struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

inline MeanSe mean_and_se(std::span<const double> xs) {
  MeanSe out;
  const auto m = static_cast<double>(xs.size());
  if (xs.empty()) return out;
  out.mean = kahan_total(xs) / m;
  if (xs.size() < 2) return out;
  KahanSum sq;
  for (double x : xs) {
    double d = x - out.mean;
    sq.add(d * d);
  }
  double var = sq.value() / (m - 1.0);
  out.se = std::sqrt(var / m);
  return out;
}

/// Sample covariance of paired samples (both spans equal length >= 2).
inline double sample_cov(std::span<const double> xs, std::span<const double> ys,
                         double mean_x, double mean_y) {
  KahanSum acc;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    acc.add((xs[i] - mean_x) * (ys[i] - mean_y));
  }
  return acc.value() / (static_cast<double>(xs.size()) - 1.0);
}

}  // namespace opbm
