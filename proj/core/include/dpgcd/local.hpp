#pragma once

#include <functional>
#include <iosfwd>
#include <string>

#include <Eigen/Dense>

#include "dpgcd/mesh.hpp"
#include "dpgcd/norms.hpp"
#include "dpgcd/testspace.hpp"

namespace dpgcd {

using ScalarField = std::function<double(Point)>;

/// Result of the optimal test function computation on one element.
///
/// Columns of `optimal` are the coefficients of the optimal test functions
/// of the element's trial basis (local layout order, outward flux
/// convention). `stiffness` = optimalᵀ·load and `rhs` = optimalᵀ·source.
struct LocalSystem {
  Eigen::MatrixXd gram;       // K_opt
  Eigen::MatrixXd load;       // F_opt
  Eigen::MatrixXd optimal;    // U_opt
  Eigen::MatrixXd stiffness;  // K_l
  Eigen::VectorXd rhs;        // F_l
  /// max/min diagonal entry of the Gram matrix.
  double diagonal_spread = 1.0;
};

/// Right-hand side matrix B_K(test basis, trial basis) for the hybrid
/// ultra-weak form, rows in test layout, columns in local trial layout.
/// Edge terms use the element's outward normal.
Eigen::MatrixXd assemble_load_matrix(const EnrichedTestSpace& space,
                                     const Element& element, const LocalLayout& layout,
                                     const Physics& phys);

/// (f, v_k)_K for every enriched basis function (zero on tau rows).
Eigen::VectorXd assemble_source(const EnrichedTestSpace& space, const Element& element,
                                const ScalarField& f);

/// Solves K_opt U_opt = F_opt by Cholesky with multiple right-hand sides
/// and forms the local stiffness and load. `label` names the element and
/// norm in diagnostics.
LocalSystem compute_optimal(Eigen::MatrixXd gram, Eigen::MatrixXd load,
                            const Eigen::VectorXd& source, const std::string& label);

/// Assembles and solves everything for one element.
LocalSystem solve_local(const EnrichedTestSpace& space, const NormSpec& norm,
                        const Element& element, const LocalLayout& layout,
                        const Physics& phys, const ScalarField& f);

/// Squared energy norms of the optimal test functions, diag(K_l).
/// Throws NumericalError on entries below -1e-12 (relative to the largest).
Eigen::VectorXd energy_norm_diag(const Eigen::MatrixXd& stiffness);

/// Squared test-space norm of each column of `coeffs` (test functions of
/// `space`) by direct quadrature of the norm integrand on `cells`, which
/// must refine the space's sub-grid.
Eigen::VectorXd norm_by_quadrature(const EnrichedTestSpace& space,
                                   const Eigen::MatrixXd& coeffs, const NormSpec& norm,
                                   const Element& element, const Physics& phys,
                                   const ShishkinGrid& cells);

/// Squared norms of (coeffs_a - coeffs_b) column by column, where the two
/// coefficient sets live in different enriched spaces. Integrated on the
/// common refinement of both sub-grids.
Eigen::VectorXd difference_norm_by_quadrature(const EnrichedTestSpace& space_a,
                                              const Eigen::MatrixXd& coeffs_a,
                                              const EnrichedTestSpace& space_b,
                                              const Eigen::MatrixXd& coeffs_b,
                                              const NormSpec& norm, const Element& element,
                                              const Physics& phys);

/// Row-major plain-text dump, 17 significant digits, one row per line.
void write_matrix(std::ostream& os, const Eigen::MatrixXd& m);

}  // namespace dpgcd
