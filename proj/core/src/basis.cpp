#include "dpgcd/basis.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace dpgcd {

namespace {

void check_index(int i, int t) {
  if (t < 0 || t > kMaxDegree) {
    throw std::domain_error("Bernstein degree " + std::to_string(t) +
                            " outside [0, " + std::to_string(kMaxDegree) + "]");
  }
  if (i < 0 || i > t) {
    throw std::domain_error("Bernstein index " + std::to_string(i) +
                            " outside [0, " + std::to_string(t) + "]");
  }
}

void check_point(double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::domain_error("Bernstein argument outside [0,1]");
  }
}

// Integer power by repeated multiplication; 0^0 = 1.
double ipow(double x, int n) {
  double r = 1.0;
  for (int k = 0; k < n; ++k) r *= x;
  return r;
}

double raw_bernstein(int i, int t, double x) {
  if (i < 0 || i > t) return 0.0;
  return binomial(t, i) * ipow(x, i) * ipow(1.0 - x, t - i);
}

// Newton iteration on P_n starting from the Chebyshev-like guess.
QuadRule build_gauss(int n) {
  QuadRule rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int k = 0; k < (n + 1) / 2; ++k) {
    double z = std::cos(std::numbers::pi * (k + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // Recompute the derivative at the converged root.
    double p0 = 1.0;
    double p1 = 0.0;
    for (int j = 1; j <= n; ++j) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
    }
    dp = n * (z * p0 - p1) / (z * z - 1.0);
    const double w = 1.0 / ((1.0 - z * z) * dp * dp);  // on [0,1]: 2w/2
    rule.points[k] = 0.5 * (1.0 - z);
    rule.points[n - 1 - k] = 0.5 * (1.0 + z);
    rule.weights[k] = w;
    rule.weights[n - 1 - k] = w;
  }
  if (n % 2 == 1) rule.points[n / 2] = 0.5;
  return rule;
}

}  // namespace

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
  return r;
}

double bernstein_eval(int i, int t, double x) {
  check_index(i, t);
  check_point(x);
  return raw_bernstein(i, t, x);
}

double bernstein_deriv(int i, int t, double x) {
  check_index(i, t);
  check_point(x);
  if (t == 0) return 0.0;
  return t * (raw_bernstein(i - 1, t - 1, x) - raw_bernstein(i, t - 1, x));
}

void bernstein_all(int t, double x, std::span<double> values,
                   std::span<double> derivs) {
  // de Casteljau-style triangle: lower-degree values give the derivative.
  std::array<double, kMaxDegree + 2> b{};
  b[0] = 1.0;
  const double y = 1.0 - x;
  for (int d = 1; d < t; ++d) {
    double saved = 0.0;
    for (int i = 0; i < d; ++i) {
      const double tmp = b[i];
      b[i] = saved + y * tmp;
      saved = x * tmp;
    }
    b[d] = saved;
  }
  // b holds degree t-1 values (or degree 0 when t == 0).
  if (t == 0) {
    values[0] = 1.0;
    derivs[0] = 0.0;
    return;
  }
  for (int i = 0; i <= t; ++i) {
    const double left = i > 0 ? b[i - 1] : 0.0;
    const double right = i < t ? b[i] : 0.0;
    derivs[i] = t * (left - right);
    values[i] = x * left + y * right;
  }
}

ShapeValue tensor_shape(int px, int py, int k, std::array<double, 2> xi) {
  const int count = (px + 1) * (py + 1);
  if (k < 0 || k >= count) {
    throw std::out_of_range("tensor shape index " + std::to_string(k) +
                            " outside [0, " + std::to_string(count) + ")");
  }
  const int i = k % (px + 1);
  const int j = k / (px + 1);
  const double bx = bernstein_eval(i, px, xi[0]);
  const double by = bernstein_eval(j, py, xi[1]);
  ShapeValue s;
  s.value = bx * by;
  s.grad = {bernstein_deriv(i, px, xi[0]) * by,
            bx * bernstein_deriv(j, py, xi[1])};
  return s;
}

const QuadRule& gauss_rule(int n) {
  static const std::vector<QuadRule> rules = [] {
    std::vector<QuadRule> r;
    r.reserve(kMaxGaussPoints);
    for (int m = 1; m <= kMaxGaussPoints; ++m) r.push_back(build_gauss(m));
    return r;
  }();
  if (n < 1 || n > kMaxGaussPoints) {
    throw std::out_of_range("Gauss rule size " + std::to_string(n) +
                            " outside [1, " +
                            std::to_string(kMaxGaussPoints) + "]");
  }
  return rules[n - 1];
}

}  // namespace dpgcd
