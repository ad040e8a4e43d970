#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace dpgcd {

/// Sub-grid of the reference element [0,1]^2 used to resolve test
/// functions. Breakpoints are strictly increasing from 0 to 1.
struct ShishkinGrid {
  std::vector<double> breakpoints_x{0.0, 1.0};
  std::vector<double> breakpoints_y{0.0, 1.0};
  double transition_x = 0.5;
  double transition_y = 0.5;

  [[nodiscard]] int intervals_x() const { return static_cast<int>(breakpoints_x.size()) - 1; }
  [[nodiscard]] int intervals_y() const { return static_cast<int>(breakpoints_y.size()) - 1; }
};

/// 3x3 layer-adapted grid with needle sub-elements on all four sides.
/// The reference transition width is min(1/4, kappa * pt * eps / h), i.e.
/// a physical needle width of kappa * pt * eps when the cap is inactive.
ShishkinGrid build_shishkin(double eps, double h, int pt, double kappa = 1.0);
ShishkinGrid build_shishkin(double eps, double hx, double hy, int pt,
                            double kappa = 1.0);

/// Single sub-element (no sub-grid).
ShishkinGrid single_cell_grid();

/// Sub-grid with the union of both grids' breakpoints, so piecewise
/// polynomials on either grid are polynomial on every cell.
ShishkinGrid common_refinement(const ShishkinGrid& a, const ShishkinGrid& b);

/// Piecewise Bernstein space on a 1D partition of [0,1], either C0 across
/// breakpoints or fully discontinuous.
class PiecewiseBernstein {
 public:
  PiecewiseBernstein(std::vector<double> breakpoints, int degree, bool continuous);

  [[nodiscard]] int degree() const { return degree_; }
  [[nodiscard]] bool continuous() const { return continuous_; }
  [[nodiscard]] int intervals() const { return static_cast<int>(breaks_.size()) - 1; }
  [[nodiscard]] int size() const;
  [[nodiscard]] double lower(int s) const { return breaks_[s]; }
  [[nodiscard]] double length(int s) const { return breaks_[s + 1] - breaks_[s]; }
  [[nodiscard]] int global_index(int interval, int local) const;
  /// Interval containing x; breakpoints belong to the lower interval.
  [[nodiscard]] int interval_of(double x) const;

 private:
  std::vector<double> breaks_;
  int degree_;
  bool continuous_;
};

enum class TestComponent : int { tau1 = 0, tau2 = 1, v = 2 };
inline constexpr std::array<TestComponent, 3> kTestComponents{
    TestComponent::tau1, TestComponent::tau2, TestComponent::v};

/// Basis functions of one sub-element tabulated at a tensor grid of
/// points. Rows are points (x-point fastest), columns are the sub-element's
/// local functions (x-index fastest). Derivatives are with respect to the
/// element reference coordinates.
struct Tabulation {
  Eigen::MatrixXd value;
  Eigen::MatrixXd dx;
  Eigen::MatrixXd dy;
  std::vector<int> dofs;  // within-element test indices of the columns
};

/// Values of a test function (tau1, tau2, v) with reference derivatives.
struct TestValue {
  double tau1 = 0.0;
  double tau2 = 0.0;
  double tau1_x = 0.0;
  double tau2_y = 0.0;
  double v = 0.0;
  double v_x = 0.0;
  double v_y = 0.0;
};

/// Enriched local test space T x V on a sub-gridded reference element:
/// tau1 in Q_{pt+1,pt} continuous in x, tau2 in Q_{pt,pt+1} continuous in
/// y (normal-trace conformity), v in Q_pt continuous everywhere. Test
/// coefficients are ordered [tau1 | tau2 | v].
class EnrichedTestSpace {
 public:
  EnrichedTestSpace(ShishkinGrid grid, int pt);

  [[nodiscard]] int degree() const { return pt_; }
  [[nodiscard]] const ShishkinGrid& grid() const { return grid_; }
  [[nodiscard]] int dimension() const { return offset_[3]; }
  [[nodiscard]] int offset(TestComponent c) const { return offset_[static_cast<int>(c)]; }
  [[nodiscard]] int size(TestComponent c) const;
  [[nodiscard]] const PiecewiseBernstein& x_space(TestComponent c) const {
    return x_[static_cast<int>(c)];
  }
  [[nodiscard]] const PiecewiseBernstein& y_space(TestComponent c) const {
    return y_[static_cast<int>(c)];
  }

  /// Tabulates component c on sub-element (sx, sy) at the points
  /// lower + length * t for t in the given unit-interval abscissae.
  [[nodiscard]] Tabulation tabulate(TestComponent c, int sx, int sy,
                                    std::span<const double> tx,
                                    std::span<const double> ty) const;

  /// Evaluates the test function with the given coefficients at a
  /// reference point, using the polynomial piece of sub-element (sx, sy).
  [[nodiscard]] TestValue evaluate(std::span<const double> coeffs,
                                   std::array<double, 2> xi, int sx, int sy) const;
  /// As above, locating the sub-element from the point.
  [[nodiscard]] TestValue evaluate(std::span<const double> coeffs,
                                   std::array<double, 2> xi) const;

 private:
  ShishkinGrid grid_;
  int pt_;
  std::vector<PiecewiseBernstein> x_;
  std::vector<PiecewiseBernstein> y_;
  std::array<int, 4> offset_{};
};

EnrichedTestSpace build_test_space(const ShishkinGrid& grid, int pt);

}  // namespace dpgcd
