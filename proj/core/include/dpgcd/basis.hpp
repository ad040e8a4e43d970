#pragma once

#include <array>
#include <span>
#include <vector>

namespace dpgcd {

/// Bernstein polynomials B_{i,t}(x) = C(t,i) x^i (1-x)^(t-i) on [0,1].
///
/// Degrees up to kMaxDegree are supported. Tensor-product functions of
/// Q_{px,py} are indexed lexicographically with the x-index running
/// fastest: k = i + (px + 1) * j.
inline constexpr int kMaxDegree = 12;

double binomial(int n, int k);

/// Value of B_{i,t}(x). Throws std::domain_error for i outside [0,t] or
/// x outside [0,1].
double bernstein_eval(int i, int t, double x);

/// d/dx B_{i,t}(x) = t (B_{i-1,t-1}(x) - B_{i,t-1}(x)).
double bernstein_deriv(int i, int t, double x);

/// Evaluates all t+1 polynomials of degree t (and their derivatives) at x.
/// Both spans must hold t+1 entries. No range checking on x, so callers
/// may evaluate the polynomial extension slightly outside [0,1].
void bernstein_all(int t, double x, std::span<double> values,
                   std::span<double> derivs);

struct ShapeValue {
  double value = 0.0;
  std::array<double, 2> grad{0.0, 0.0};
};

/// Tensor Bernstein shape k of Q_{px,py} at a reference point in [0,1]^2.
/// The gradient is with respect to reference coordinates.
ShapeValue tensor_shape(int px, int py, int k, std::array<double, 2> xi);

/// Gauss-Legendre rule on [0,1]; weights sum to one.
struct QuadRule {
  std::vector<double> points;
  std::vector<double> weights;

  [[nodiscard]] std::size_t size() const { return points.size(); }
};

inline constexpr int kMaxGaussPoints = 32;

/// n-point rule, exact for polynomials of degree <= 2n-1. Valid for
/// 1 <= n <= kMaxGaussPoints; rules are computed once and cached.
const QuadRule& gauss_rule(int n);

}  // namespace dpgcd
