#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "dpgcd/local.hpp"
#include "dpgcd/mesh.hpp"
#include "dpgcd/norms.hpp"

namespace dpgcd {

/// -eps Lap u + a . grad u = f in the unit square, u = g on the boundary.
struct BoundaryValueProblem {
  Physics phys;
  ScalarField source;    // empty means f = 0
  ScalarField boundary;  // empty means g = 0
};

/// Discretization choices for one DPG solve.
struct DpgOptions {
  int p = 1;
  int dp = 2;
  /// Sub-grid cells per direction for the test space: 1 or 3 (Shishkin).
  int subgrid = 3;
  double kappa = 1.0;
  NormSpec norm;
};

/// Element contribution in local trial layout (outward flux convention).
struct ElementContribution {
  Eigen::MatrixXd stiffness;
  Eigen::VectorXd rhs;
};

struct GlobalSystem {
  Eigen::SparseMatrix<double> matrix;
  Eigen::VectorXd rhs;
};

/// Accumulates element contributions in element order, applying the
/// flux sign factors of the dof map on rows and columns.
GlobalSystem assemble_global(const StructuredMesh& mesh, const DofMap& dofs,
                             std::span<const ElementContribution> locals);

struct ConstrainedSystem {
  Eigen::SparseMatrix<double> matrix;  // free-free block
  Eigen::VectorXd rhs;                 // F_f - K_fc g_c
  std::vector<int> free;
  std::vector<int> fixed;
  Eigen::VectorXd fixed_values;
  int num_global = 0;
};

/// Boundary u-hat coefficients: vertex values g(vertex); edge-interior
/// Bernstein coefficients from the L2 projection on each boundary edge
/// with the end values held fixed.
Eigen::VectorXd boundary_trace_values(const StructuredMesh& mesh, const DofMap& dofs,
                                      const ScalarField& g, std::span<const int> fixed);

/// Eliminates the boundary u-hat unknowns symmetrically.
ConstrainedSystem apply_dirichlet(const GlobalSystem& system, const ScalarField& g,
                                  const StructuredMesh& mesh, const DofMap& dofs);

struct FieldSample {
  double u = 0.0;
  double sigma1 = 0.0;
  double sigma2 = 0.0;
};

struct SolveReport {
  double relative_residual = 0.0;
  double min_pivot = 0.0;
  double max_pivot = 0.0;
  double max_diagonal_spread = 1.0;
  int num_unknowns = 0;
};

/// DPG solution (sigma, u, u-hat, sigma-hat_n) with point evaluation.
class SolutionField {
 public:
  SolutionField(StructuredMesh mesh, DofMap dofs, Eigen::VectorXd coefficients);

  [[nodiscard]] const StructuredMesh& mesh() const { return mesh_; }
  [[nodiscard]] const DofMap& dofs() const { return dofs_; }
  [[nodiscard]] const Eigen::VectorXd& coefficients() const { return coeffs_; }
  [[nodiscard]] int order() const { return dofs_.order(); }

  /// Interior fields at a point; points on element boundaries use the
  /// element with the smaller index.
  [[nodiscard]] FieldSample evaluate(Point x) const;
  /// Same, on a given element with reference coordinates.
  [[nodiscard]] FieldSample evaluate(int element, double xi, double eta) const;
  /// u-hat on a mesh edge at edge parameter s.
  [[nodiscard]] double trace(int edge, double s) const;

 private:
  StructuredMesh mesh_;
  DofMap dofs_;
  Eigen::VectorXd coeffs_;
};

/// Solves the constrained system with a sparse LDLᵀ factorization.
/// Throws NumericalError on a non-positive pivot; `label` names the
/// norm for that message.
SolutionField solve(const ConstrainedSystem& system, const StructuredMesh& mesh,
                    const DofMap& dofs, const std::string& label = {},
                    SolveReport* report = nullptr);

/// Full pipeline: local optimal test functions, assembly, constraints,
/// solve. Congruent elements share one local factorization unless the
/// norm is weighted.
SolutionField solve_dpg(const StructuredMesh& mesh, const BoundaryValueProblem& problem,
                        const DpgOptions& options, SolveReport* report = nullptr);

/// Test space used on an element for the given options.
EnrichedTestSpace element_test_space(const Element& element, const Physics& phys,
                                     const DpgOptions& options);

struct SampleRow {
  Point x;
  FieldSample value;
};

/// Samples on the grid with k points per element edge (element corners
/// included, no duplicates), row-major with x fastest.
std::vector<SampleRow> sample_solution(const SolutionField& sol, int k);

struct MinMax {
  double min = 0.0;
  double max = 0.0;
};
MinMax sampled_range(std::span<const SampleRow> rows);

/// CSV with header `x,y,u,sigma1,sigma2`, 17 significant digits.
void write_solution_csv(std::ostream& os, std::span<const SampleRow> rows);

}  // namespace dpgcd
