#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dpgcd/solver.hpp"

namespace dpgcd {

enum class ProblemKind { eriksson_johnson, skew_continuous, skew_discontinuous };

/// Parses `ej`, `skew-cont` or `skew-disc`.
ProblemKind parse_problem(const std::string& name);
std::string problem_name(ProblemKind kind);

/// One of the three benchmark problems on the unit square, f = 0.
struct BenchmarkProblem {
  ProblemKind kind = ProblemKind::eriksson_johnson;
  double eps = 1e-2;
  double theta_deg = 45.0;  // skew problems only

  [[nodiscard]] Vec2 advection() const;
  /// Dirichlet data. The discontinuous problem takes the value 1 at the
  /// jump point (0, 0.2).
  [[nodiscard]] double boundary(Point x) const;
  [[nodiscard]] BoundaryValueProblem bvp() const;
  [[nodiscard]] bool has_exact_solution() const {
    return kind == ProblemKind::eriksson_johnson;
  }
};

/// Validates eps > 0 and theta in [0, 90].
BenchmarkProblem make_problem(ProblemKind kind, double eps, double theta_deg = 45.0);

/// Closed-form Eriksson-Johnson solution, evaluated without overflow for
/// any eps > 0.
double eriksson_johnson_exact(double x, double y, double eps);
/// The same function through a different factorization; used to
/// cross-check rounding.
double eriksson_johnson_exact_factored(double x, double y, double eps);
/// (u, sigma1, sigma2) with sigma = -eps grad u.
FieldSample eriksson_johnson_field(Point x, double eps);

/// Thrown when a reference solution is not available for the request.
class ReferenceUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Grading { uniform, layer };

/// Nodal Q1 field on a tensor grid with bilinear interpolation of u and of
/// the nodal finite-difference flux.
struct GridField {
  std::vector<double> x;
  std::vector<double> y;
  Eigen::VectorXd u;       // (x.size() * y.size()), x fastest
  Eigen::VectorXd sigma1;  // -eps du/dx at nodes
  Eigen::VectorXd sigma2;

  [[nodiscard]] FieldSample evaluate(Point p) const;
};

/// Tensor grid with n cells per direction. `layer` grading puts half of
/// the cells in a band of width min(1/2, 2 eps ln n) at each outflow side
/// (direction with positive advection component).
std::vector<double> reference_grid(int n, double eps, double a_component, Grading grading);

/// Bilinear Galerkin solution of -eps Lap u + a.grad u = 0 with the
/// problem's Dirichlet data, solved by sparse LU. Refuses eps < 1e-4 and
/// grids whose outflow cells are not smaller than eps.
GridField galerkin_reference(const BenchmarkProblem& problem, int n,
                             Grading grading = Grading::uniform);

using ReferenceField = std::function<FieldSample(Point)>;

struct L2Error {
  double u = 0.0;
  double sigma = 0.0;
};

/// L2 distances of u and sigma. Each trial element is split at the given
/// global breakpoints (plus the element's own edges) and every piece gets a
/// (p+3)^2 Gauss rule.
L2Error l2_error(const SolutionField& sol, const ReferenceField& reference,
                 std::span<const double> breaks_x, std::span<const double> breaks_y);

/// Breakpoints resolving the Eriksson-Johnson layer at x = 1: a uniform
/// 1/64 grid plus a geometric sequence towards x = 1 reaching 1e-3 eps.
std::vector<double> layer_breakpoints(double eps);

/// A norm family whose unset parameters take their defaults once eps and
/// the mesh size are known: gamma = eps, delta = h, alpha1 = eps^{-3/2}.
struct NormChoice {
  NormKind kind = NormKind::quasi_optimal;
  std::optional<double> gamma;
  std::optional<double> delta;
  std::optional<double> alpha1;
  double alpha2 = 1.0;

  [[nodiscard]] NormSpec resolve(double eps, double h) const;
  /// SN, WN or QON.
  [[nodiscard]] std::string tag() const;
  /// 3 for QON, 1 otherwise.
  [[nodiscard]] int default_subgrid() const {
    return kind == NormKind::quasi_optimal ? 3 : 1;
  }
};

/// Parses `sn`, `wn`, `qon` (case-insensitive).
NormKind parse_norm(const std::string& name);

/// Runs one DPG solve for a benchmark on an N x N mesh.
/// `subgrid` <= 0 selects the norm's default.
SolutionField solve_benchmark(const BenchmarkProblem& problem, const NormChoice& norm, int n,
                              int p, int dp, int subgrid = 0, double kappa = 1.0,
                              SolveReport* report = nullptr);

enum class SweepKind { h, p };

struct StudyOptions {
  SweepKind sweep = SweepKind::h;
  std::vector<int> values{5, 10, 25, 50, 100};
  int n = 5;  // mesh size for p sweeps
  int p = 1;  // order for h sweeps
  int dp = 2;
  int subgrid = 0;
  double kappa = 1.0;
};

struct ConvergenceRecord {
  std::string sweep;  // "N" or "p"
  std::string norm;   // SN, WN, QON
  std::vector<int> values;
  std::vector<double> e_u;
  std::vector<double> e_sigma;
  /// Empty on success; the error message of a failed step otherwise
  /// (its errors are NaN).
  std::vector<std::string> failures;
};

/// Error measurement for studies: the reference field and the breakpoints
/// its quadrature should respect.
struct ReferenceSpec {
  ReferenceField field;
  std::vector<double> breaks_x;
  std::vector<double> breaks_y;
};

/// Exact solution for Eriksson-Johnson, otherwise a Galerkin reference on
/// an n x n grid.
ReferenceSpec make_reference(const BenchmarkProblem& problem, int n = 512,
                             Grading grading = Grading::uniform);

/// One solve per sweep value; a failing step is recorded and the sweep
/// continues.
ConvergenceRecord run_convergence_study(const BenchmarkProblem& problem, const NormChoice& norm,
                                        const StudyOptions& options,
                                        const ReferenceSpec& reference);

/// Trial groups of the local layout: sigma, u, u-hat, sigma-hat_n.
inline constexpr int kTrialGroups = 4;

struct TestFunctionStep {
  int dp = 0;
  std::array<double, kTrialGroups> group_error{};    // averaged e_i
  std::array<double, kTrialGroups> group_squared{};  // averaged e_i^2
  Eigen::VectorXd relative;                          // e_i per trial function
  double e_u = std::numeric_limits<double>::quiet_NaN();
};

/// Relative errors |||w(pt+1) - w(pt)||| / |||w(pt+1)||| of the optimal
/// test functions on one element, pt = p + dp, for each dp. The norm of the
/// difference is integrated on the common refinement of both sub-grids;
/// the denominator is read from diag(K_l).
std::vector<TestFunctionStep> test_function_convergence(const Element& element,
                                                        const Physics& phys,
                                                        const NormSpec& norm, int p,
                                                        std::span<const int> dps,
                                                        int subgrid = 3, double kappa = 1.0);

/// `min/max = a/b` with two decimals.
std::string format_min_max(MinMax m);

/// Table with columns `<sweep>,u_SN,u_WN,u_QON,sigma_SN,sigma_WN,sigma_QON`
/// (one pair of columns per record, in the order given), 3 significant
/// digits. Records must share their sweep values.
void write_table_csv(std::ostream& os, std::span<const ConvergenceRecord> records);

/// `dp,e_sigma,e_u,e_trace,e_flux,l2_u`, 3 significant digits. With
/// `squared` the group columns hold the averaged e_i^2.
void write_test_function_csv(std::ostream& os, std::span<const TestFunctionStep> steps,
                             bool squared = false);

}  // namespace dpgcd
