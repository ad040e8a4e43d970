#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dpgcd/mesh.hpp"
#include "dpgcd/testspace.hpp"

namespace dpgcd {

/// Raised when a local or global factorization breaks down.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Vec2 = std::array<double, 2>;

/// Physical coefficients of -eps Lap u + a . grad u = f.
struct Physics {
  double eps = 1.0;
  Vec2 a{0.0, 0.0};
};

enum class NormKind { standard, weighted, quasi_optimal };

/// Test-space inner product selector.
///  - standard:      |div tau|^2 + |tau|^2 + |grad v|^2 + |v|^2
///  - weighted:      the standard norm with every term weighted by beta
///  - quasi_optimal: |tau/eps - grad v|^2 + |div tau + a.grad v|^2
///                   + alpha1 |tau|^2 + alpha2 |v|^2
struct NormSpec {
  NormKind kind = NormKind::standard;
  double gamma = 1.0;   // weighted: weight inside the inflow layer
  double delta = 0.0;   // weighted: inflow layer width
  double alpha1 = 0.0;  // quasi-optimal: tau regularization
  double alpha2 = 1.0;  // quasi-optimal: v regularization

  static NormSpec standard() { return {}; }
  static NormSpec weighted(double gamma, double delta);
  static NormSpec quasi_optimal(double alpha1, double alpha2);
  /// alpha1 = eps^{-3/2}, alpha2 = 1.
  static NormSpec quasi_optimal_default(double eps);

  [[nodiscard]] std::string name() const;
  void validate() const;
};

/// Piecewise constant weight: gamma within distance delta of the inflow
/// boundary {a.n < 0} and at least delta away from the rest of the
/// boundary, 1 elsewhere. Distances are normal distances to the sides of
/// the unit square.
double weight_beta(Point x, double gamma, double delta, Vec2 a);

enum class Op { value, dx, dy };

/// coef * (op(row component), op(column component)) over the element.
struct GramTerm {
  double coef;
  TestComponent row;
  Op row_op;
  TestComponent col;
  Op col_op;
};

/// Bilinear terms making up each block of the Gram matrix.
std::vector<GramTerm> gram_terms(const NormSpec& norm, const Physics& phys);

/// Test-space Gram matrix on one element, integrals in physical
/// coordinates. Layout [tau1 | tau2 | v] as in the test space.
Eigen::MatrixXd assemble_gram(const EnrichedTestSpace& space, const NormSpec& norm,
                              const Element& element, const Physics& phys);

/// Physical-coordinate values of a test function at one point.
struct PhysicalTestValue {
  double tau1 = 0.0;
  double tau2 = 0.0;
  double div_tau = 0.0;
  double v = 0.0;
  double v_x = 0.0;
  double v_y = 0.0;
};

/// Integrand of the squared test norm at one point (beta already
/// evaluated by the caller; ignored unless the norm is weighted).
double norm_density(const NormSpec& norm, const Physics& phys,
                    const PhysicalTestValue& w, double beta);

}  // namespace dpgcd
