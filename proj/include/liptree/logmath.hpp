#ifndef LIPTREE_LOGMATH_HPP
#define LIPTREE_LOGMATH_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace liptree {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(sum_i exp(x_i)), anchored at the maximum so that no term overflows.
// Returns -inf for an empty range or when every term is -inf.
inline double log_sum_exp(std::span<const double> xs) {
  if (xs.empty()) return kNegInf;
  const double top = *std::max_element(xs.begin(), xs.end());
  if (top == kNegInf) return kNegInf;
  double sum = 0.0;
  for (double x : xs) sum += std::exp(x - top);
  return top + std::log(sum);
}

// log(exp(a) + exp(b))
inline double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == kNegInf) return a;
  return a + std::log1p(std::exp(b - a));
}

// Slack allowed when comparing two log quantities that came out of floating
// point arithmetic: 1e-9 relative to the larger magnitude, never below 1e-9.
inline double log_tolerance(double a, double b) {
  double scale = 1.0;
  if (std::isfinite(a)) scale = std::max(scale, std::abs(a));
  if (std::isfinite(b)) scale = std::max(scale, std::abs(b));
  return 1e-9 * scale;
}

}  // namespace liptree

#endif  // LIPTREE_LOGMATH_HPP
