#include "dpgcd/testspace.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dpgcd/basis.hpp"

namespace dpgcd {

namespace {

std::vector<double> needle_breaks(double width) {
  if (width >= 0.5) return {0.0, 1.0};
  return {0.0, width, 1.0 - width, 1.0};
}

double transition_width(double eps, double h, int pt, double kappa) {
  if (!(eps > 0.0) || !(h > 0.0) || pt < 1 || !(kappa > 0.0)) {
    throw std::invalid_argument("Shishkin grid needs eps, h, kappa > 0 and degree >= 1");
  }
  return std::min(0.25, kappa * pt * eps / h);
}

std::vector<double> merge_breaks(const std::vector<double>& a,
                                 const std::vector<double>& b) {
  std::vector<double> out;
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  std::vector<double> unique;
  for (double x : out) {
    if (unique.empty() || x - unique.back() > 1e-14) unique.push_back(x);
  }
  unique.back() = 1.0;
  return unique;
}

}  // namespace

ShishkinGrid build_shishkin(double eps, double h, int pt, double kappa) {
  return build_shishkin(eps, h, h, pt, kappa);
}

ShishkinGrid build_shishkin(double eps, double hx, double hy, int pt, double kappa) {
  ShishkinGrid g;
  g.transition_x = transition_width(eps, hx, pt, kappa);
  g.transition_y = transition_width(eps, hy, pt, kappa);
  g.breakpoints_x = needle_breaks(g.transition_x);
  g.breakpoints_y = needle_breaks(g.transition_y);
  return g;
}

ShishkinGrid single_cell_grid() { return ShishkinGrid{}; }

ShishkinGrid common_refinement(const ShishkinGrid& a, const ShishkinGrid& b) {
  ShishkinGrid g;
  g.breakpoints_x = merge_breaks(a.breakpoints_x, b.breakpoints_x);
  g.breakpoints_y = merge_breaks(a.breakpoints_y, b.breakpoints_y);
  g.transition_x = std::min(a.transition_x, b.transition_x);
  g.transition_y = std::min(a.transition_y, b.transition_y);
  return g;
}

PiecewiseBernstein::PiecewiseBernstein(std::vector<double> breakpoints, int degree,
                                       bool continuous)
    : breaks_(std::move(breakpoints)), degree_(degree), continuous_(continuous) {
  if (breaks_.size() < 2 || breaks_.front() != 0.0 || breaks_.back() != 1.0) {
    throw std::invalid_argument("sub-grid breakpoints must run from 0 to 1");
  }
  for (std::size_t k = 1; k < breaks_.size(); ++k) {
    if (!(breaks_[k] > breaks_[k - 1])) {
      throw std::invalid_argument("sub-grid breakpoints must be strictly increasing");
    }
  }
  if (degree < 0 || degree > kMaxDegree) {
    throw std::invalid_argument("test degree " + std::to_string(degree) +
                                " outside [0, " + std::to_string(kMaxDegree) + "]");
  }
}

int PiecewiseBernstein::size() const {
  return continuous_ ? intervals() * degree_ + 1 : intervals() * (degree_ + 1);
}

int PiecewiseBernstein::global_index(int interval, int local) const {
  return continuous_ ? interval * degree_ + local : interval * (degree_ + 1) + local;
}

int PiecewiseBernstein::interval_of(double x) const {
  const auto it = std::lower_bound(breaks_.begin() + 1, breaks_.end() - 1, x);
  return static_cast<int>(it - (breaks_.begin() + 1));
}

EnrichedTestSpace::EnrichedTestSpace(ShishkinGrid grid, int pt)
    : grid_(std::move(grid)), pt_(pt) {
  if (pt < 1 || pt + 1 > kMaxDegree) {
    throw std::invalid_argument("enriched degree " + std::to_string(pt) +
                                " outside [1, " + std::to_string(kMaxDegree - 1) + "]");
  }
  const auto& bx = grid_.breakpoints_x;
  const auto& by = grid_.breakpoints_y;
  x_ = {PiecewiseBernstein(bx, pt + 1, true), PiecewiseBernstein(bx, pt, false),
        PiecewiseBernstein(bx, pt, true)};
  y_ = {PiecewiseBernstein(by, pt, false), PiecewiseBernstein(by, pt + 1, true),
        PiecewiseBernstein(by, pt, true)};
  offset_[0] = 0;
  for (int c = 0; c < 3; ++c) offset_[c + 1] = offset_[c] + x_[c].size() * y_[c].size();
}

int EnrichedTestSpace::size(TestComponent c) const {
  const int k = static_cast<int>(c);
  return x_[k].size() * y_[k].size();
}

Tabulation EnrichedTestSpace::tabulate(TestComponent c, int sx, int sy,
                                       std::span<const double> tx,
                                       std::span<const double> ty) const {
  const int k = static_cast<int>(c);
  const PiecewiseBernstein& X = x_[k];
  const PiecewiseBernstein& Y = y_[k];
  const int dx = X.degree();
  const int dy = Y.degree();
  const int nqx = static_cast<int>(tx.size());
  const int nqy = static_cast<int>(ty.size());

  // 1D tables; derivatives scaled to element reference coordinates.
  Eigen::MatrixXd vx(nqx, dx + 1), gx(nqx, dx + 1), vy(nqy, dy + 1), gy(nqy, dy + 1);
  std::array<double, kMaxDegree + 1> val{};
  std::array<double, kMaxDegree + 1> der{};
  for (int q = 0; q < nqx; ++q) {
    bernstein_all(dx, tx[q], val, der);
    for (int i = 0; i <= dx; ++i) {
      vx(q, i) = val[i];
      gx(q, i) = der[i] / X.length(sx);
    }
  }
  for (int q = 0; q < nqy; ++q) {
    bernstein_all(dy, ty[q], val, der);
    for (int j = 0; j <= dy; ++j) {
      vy(q, j) = val[j];
      gy(q, j) = der[j] / Y.length(sy);
    }
  }

  const int nf = (dx + 1) * (dy + 1);
  Tabulation t;
  t.value.resize(nqx * nqy, nf);
  t.dx.resize(nqx * nqy, nf);
  t.dy.resize(nqx * nqy, nf);
  t.dofs.resize(nf);
  const int stride = X.size();
  for (int j = 0; j <= dy; ++j) {
    for (int i = 0; i <= dx; ++i) {
      const int col = i + (dx + 1) * j;
      t.dofs[col] = offset_[k] + X.global_index(sx, i) + stride * Y.global_index(sy, j);
      for (int qy = 0; qy < nqy; ++qy) {
        for (int qx = 0; qx < nqx; ++qx) {
          const int row = qx + nqx * qy;
          t.value(row, col) = vx(qx, i) * vy(qy, j);
          t.dx(row, col) = gx(qx, i) * vy(qy, j);
          t.dy(row, col) = vx(qx, i) * gy(qy, j);
        }
      }
    }
  }
  return t;
}

TestValue EnrichedTestSpace::evaluate(std::span<const double> coeffs,
                                      std::array<double, 2> xi, int sx, int sy) const {
  if (static_cast<int>(coeffs.size()) != dimension()) {
    throw std::invalid_argument("test coefficient vector has wrong length");
  }
  TestValue out;
  for (TestComponent c : kTestComponents) {
    const int k = static_cast<int>(c);
    const PiecewiseBernstein& X = x_[k];
    const PiecewiseBernstein& Y = y_[k];
    const double tx = (xi[0] - X.lower(sx)) / X.length(sx);
    const double ty = (xi[1] - Y.lower(sy)) / Y.length(sy);
    const std::array<double, 1> px{tx};
    const std::array<double, 1> py{ty};
    const Tabulation t = tabulate(c, sx, sy, px, py);
    double val = 0.0;
    double ddx = 0.0;
    double ddy = 0.0;
    for (std::size_t col = 0; col < t.dofs.size(); ++col) {
      const double w = coeffs[t.dofs[col]];
      val += w * t.value(0, col);
      ddx += w * t.dx(0, col);
      ddy += w * t.dy(0, col);
    }
    switch (c) {
      case TestComponent::tau1:
        out.tau1 = val;
        out.tau1_x = ddx;
        break;
      case TestComponent::tau2:
        out.tau2 = val;
        out.tau2_y = ddy;
        break;
      case TestComponent::v:
        out.v = val;
        out.v_x = ddx;
        out.v_y = ddy;
        break;
    }
  }
  return out;
}

TestValue EnrichedTestSpace::evaluate(std::span<const double> coeffs,
                                      std::array<double, 2> xi) const {
  const int sx = x_[2].interval_of(xi[0]);
  const int sy = y_[2].interval_of(xi[1]);
  return evaluate(coeffs, xi, sx, sy);
}

EnrichedTestSpace build_test_space(const ShishkinGrid& grid, int pt) {
  return EnrichedTestSpace(grid, pt);
}

}  // namespace dpgcd
