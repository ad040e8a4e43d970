#include "dpgcd/local.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "dpgcd/basis.hpp"

namespace dpgcd {

namespace {

using TC = TestComponent;

// Trial shape tables for the three interior fields (all Q_p) at a tensor
// grid of element-reference points.
struct TrialTable {
  Eigen::MatrixXd value;  // rows: points (x fastest), cols: tensor index
};

TrialTable tabulate_trial(int p, std::span<const double> xs, std::span<const double> ys) {
  const int nx = static_cast<int>(xs.size());
  const int ny = static_cast<int>(ys.size());
  const int nf = (p + 1) * (p + 1);
  std::vector<double> bx(static_cast<std::size_t>(nx) * (p + 1));
  std::vector<double> by(static_cast<std::size_t>(ny) * (p + 1));
  std::array<double, kMaxDegree + 1> val{};
  std::array<double, kMaxDegree + 1> der{};
  for (int q = 0; q < nx; ++q) {
    bernstein_all(p, xs[q], val, der);
    std::copy_n(val.begin(), p + 1, bx.begin() + q * (p + 1));
  }
  for (int q = 0; q < ny; ++q) {
    bernstein_all(p, ys[q], val, der);
    std::copy_n(val.begin(), p + 1, by.begin() + q * (p + 1));
  }
  TrialTable t;
  t.value.resize(nx * ny, nf);
  for (int j = 0; j <= p; ++j) {
    for (int i = 0; i <= p; ++i) {
      for (int qy = 0; qy < ny; ++qy) {
        for (int qx = 0; qx < nx; ++qx) {
          t.value(qx + nx * qy, i + (p + 1) * j) = bx[qx * (p + 1) + i] * by[qy * (p + 1) + j];
        }
      }
    }
  }
  return t;
}

void scatter(Eigen::MatrixXd& F, const std::vector<int>& rows, int col_offset,
             const Eigen::MatrixXd& block) {
  for (Eigen::Index j = 0; j < block.cols(); ++j) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      F(rows[i], col_offset + j) += block(static_cast<Eigen::Index>(i), j);
    }
  }
}

std::vector<double> mapped(const std::vector<double>& t, double lo, double len) {
  std::vector<double> out(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) out[k] = lo + len * t[k];
  return out;
}

// Physical values of many test functions at the points of one cell.
struct ColumnValues {
  Eigen::MatrixXd tau1, tau2, div, v, vx, vy;
};

ColumnValues evaluate_columns(const EnrichedTestSpace& space, const Eigen::MatrixXd& coeffs,
                              const Element& element, std::span<const double> xs,
                              std::span<const double> ys, double cx, double cy) {
  ColumnValues out;
  const auto& grid = space.grid();
  const PiecewiseBernstein& X = space.x_space(TC::v);
  const PiecewiseBernstein& Y = space.y_space(TC::v);
  const int sx = X.interval_of(cx);
  const int sy = Y.interval_of(cy);
  const double lx = grid.breakpoints_x[sx + 1] - grid.breakpoints_x[sx];
  const double ly = grid.breakpoints_y[sy + 1] - grid.breakpoints_y[sy];
  std::vector<double> tx(xs.size());
  std::vector<double> ty(ys.size());
  for (std::size_t k = 0; k < xs.size(); ++k) tx[k] = (xs[k] - grid.breakpoints_x[sx]) / lx;
  for (std::size_t k = 0; k < ys.size(); ++k) ty[k] = (ys[k] - grid.breakpoints_y[sy]) / ly;

  const auto gather = [&](const Tabulation& t) {
    Eigen::MatrixXd c(t.dofs.size(), coeffs.cols());
    for (std::size_t i = 0; i < t.dofs.size(); ++i) c.row(i) = coeffs.row(t.dofs[i]);
    return c;
  };
  const Tabulation t1 = space.tabulate(TC::tau1, sx, sy, tx, ty);
  const Tabulation t2 = space.tabulate(TC::tau2, sx, sy, tx, ty);
  const Tabulation tv = space.tabulate(TC::v, sx, sy, tx, ty);
  const Eigen::MatrixXd c1 = gather(t1);
  const Eigen::MatrixXd c2 = gather(t2);
  const Eigen::MatrixXd cv = gather(tv);
  out.tau1 = t1.value * c1;
  out.tau2 = t2.value * c2;
  out.div = (t1.dx * c1) / element.hx + (t2.dy * c2) / element.hy;
  out.v = tv.value * cv;
  out.vx = (tv.dx * cv) / element.hx;
  out.vy = (tv.dy * cv) / element.hy;
  return out;
}

}  // namespace

Eigen::MatrixXd assemble_load_matrix(const EnrichedTestSpace& space, const Element& element,
                                     const LocalLayout& layout, const Physics& phys) {
  const int p = layout.p;
  const int n_test = space.dimension();
  Eigen::MatrixXd F = Eigen::MatrixXd::Zero(n_test, layout.total());
  const auto& grid = space.grid();
  const QuadRule& rule = gauss_rule(space.degree() + 2);
  const int nq = static_cast<int>(rule.size());
  const double ie = 1.0 / phys.eps;
  const int o_s1 = layout.offset(TrialField::sigma1);
  const int o_s2 = layout.offset(TrialField::sigma2);
  const int o_u = layout.offset(TrialField::u);
  const int o_tr = layout.offset(TrialField::trace);
  const int o_fl = layout.offset(TrialField::flux);

  // Volume terms.
  for (int sy = 0; sy < grid.intervals_y(); ++sy) {
    for (int sx = 0; sx < grid.intervals_x(); ++sx) {
      const double x0 = grid.breakpoints_x[sx];
      const double y0 = grid.breakpoints_y[sy];
      const double lx = grid.breakpoints_x[sx + 1] - x0;
      const double ly = grid.breakpoints_y[sy + 1] - y0;
      const TrialTable trial =
          tabulate_trial(p, mapped(rule.points, x0, lx), mapped(rule.points, y0, ly));
      Eigen::VectorXd w(nq * nq);
      for (int qy = 0; qy < nq; ++qy) {
        for (int qx = 0; qx < nq; ++qx) {
          w(qx + nq * qy) = rule.weights[qx] * rule.weights[qy] * lx * ly * element.area();
        }
      }
      const Eigen::MatrixXd wt = w.asDiagonal() * trial.value;

      Tabulation t1 = space.tabulate(TC::tau1, sx, sy, rule.points, rule.points);
      Tabulation t2 = space.tabulate(TC::tau2, sx, sy, rule.points, rule.points);
      Tabulation tv = space.tabulate(TC::v, sx, sy, rule.points, rule.points);
      t1.dx /= element.hx;
      t2.dy /= element.hy;
      tv.dx /= element.hx;
      tv.dy /= element.hy;

      // (eps^-1 tau1, sigma1), -(tau1_x, u)
      scatter(F, t1.dofs, o_s1, ie * (t1.value.transpose() * wt));
      scatter(F, t1.dofs, o_u, -(t1.dx.transpose() * wt));
      // (eps^-1 tau2, sigma2), -(tau2_y, u)
      scatter(F, t2.dofs, o_s2, ie * (t2.value.transpose() * wt));
      scatter(F, t2.dofs, o_u, -(t2.dy.transpose() * wt));
      // -(v_x, sigma1), -(v_y, sigma2), -(a . grad v, u)
      scatter(F, tv.dofs, o_s1, -(tv.dx.transpose() * wt));
      scatter(F, tv.dofs, o_s2, -(tv.dy.transpose() * wt));
      scatter(F, tv.dofs, o_u,
              -((phys.a[0] * tv.dx + phys.a[1] * tv.dy).transpose() * wt));
    }
  }

  // Edge terms <tau.n, u-hat> and <v, sigma-hat_n> with outward normals.
  std::array<double, kMaxDegree + 1> val{};
  std::array<double, kMaxDegree + 1> der{};
  const std::array<double, 1> at0{0.0};
  const std::array<double, 1> at1{1.0};
  for (int edge = 0; edge < 4; ++edge) {
    const bool horizontal = edge == kBottom || edge == kTop;
    const auto& breaks = horizontal ? grid.breakpoints_x : grid.breakpoints_y;
    const int nsub = static_cast<int>(breaks.size()) - 1;
    const double h_edge = horizontal ? element.hx : element.hy;
    const TC normal_comp = horizontal ? TC::tau2 : TC::tau1;
    const double sign = kOutwardSign[edge];
    for (int s = 0; s < nsub; ++s) {
      const double lo = breaks[s];
      const double len = breaks[s + 1] - lo;
      int sx = 0;
      int sy = 0;
      std::span<const double> tx;
      std::span<const double> ty;
      switch (edge) {
        case kBottom: sx = s; sy = 0; tx = rule.points; ty = at0; break;
        case kTop: sx = s; sy = grid.intervals_y() - 1; tx = rule.points; ty = at1; break;
        case kLeft: sx = 0; sy = s; tx = at0; ty = rule.points; break;
        default: sx = grid.intervals_x() - 1; sy = s; tx = at1; ty = rule.points; break;
      }
      const Tabulation tn = space.tabulate(normal_comp, sx, sy, tx, ty);
      const Tabulation tv = space.tabulate(TC::v, sx, sy, tx, ty);

      Eigen::MatrixXd trace(nq, p + 2);
      Eigen::MatrixXd flux(nq, p + 1);
      for (int q = 0; q < nq; ++q) {
        const double param = lo + len * rule.points[q];
        const double wq = rule.weights[q] * len * h_edge;
        bernstein_all(p + 1, param, val, der);
        for (int i = 0; i <= p + 1; ++i) trace(q, i) = wq * val[i];
        bernstein_all(p, param, val, der);
        for (int i = 0; i <= p; ++i) flux(q, i) = wq * val[i];
      }
      const Eigen::MatrixXd tr_block = sign * (tn.value.transpose() * trace);
      for (int i = 0; i <= p + 1; ++i) {
        const int col = o_tr + layout.trace_index(edge, i);
        for (std::size_t r = 0; r < tn.dofs.size(); ++r) F(tn.dofs[r], col) += tr_block(r, i);
      }
      const Eigen::MatrixXd fl_block = tv.value.transpose() * flux;
      for (int i = 0; i <= p; ++i) {
        const int col = o_fl + layout.flux_index(edge, i);
        for (std::size_t r = 0; r < tv.dofs.size(); ++r) F(tv.dofs[r], col) += fl_block(r, i);
      }
    }
  }
  return F;
}

Eigen::VectorXd assemble_source(const EnrichedTestSpace& space, const Element& element,
                                const ScalarField& f) {
  Eigen::VectorXd L = Eigen::VectorXd::Zero(space.dimension());
  if (!f) return L;
  const auto& grid = space.grid();
  const QuadRule& rule = gauss_rule(space.degree() + 3);
  const int nq = static_cast<int>(rule.size());
  for (int sy = 0; sy < grid.intervals_y(); ++sy) {
    for (int sx = 0; sx < grid.intervals_x(); ++sx) {
      const double x0 = grid.breakpoints_x[sx];
      const double y0 = grid.breakpoints_y[sy];
      const double lx = grid.breakpoints_x[sx + 1] - x0;
      const double ly = grid.breakpoints_y[sy + 1] - y0;
      Eigen::VectorXd wf(nq * nq);
      for (int qy = 0; qy < nq; ++qy) {
        for (int qx = 0; qx < nq; ++qx) {
          const Point x = element.map(x0 + lx * rule.points[qx], y0 + ly * rule.points[qy]);
          wf(qx + nq * qy) =
              rule.weights[qx] * rule.weights[qy] * lx * ly * element.area() * f(x);
        }
      }
      const Tabulation tv = space.tabulate(TC::v, sx, sy, rule.points, rule.points);
      const Eigen::VectorXd contrib = tv.value.transpose() * wf;
      for (std::size_t i = 0; i < tv.dofs.size(); ++i) L(tv.dofs[i]) += contrib(i);
    }
  }
  return L;
}

LocalSystem compute_optimal(Eigen::MatrixXd gram, Eigen::MatrixXd load,
                            const Eigen::VectorXd& source, const std::string& label) {
  LocalSystem sys;
  const Eigen::VectorXd diag = gram.diagonal();
  if (diag.minCoeff() <= 0.0) {
    throw NumericalError("non-positive Gram diagonal on " + label);
  }
  sys.diagonal_spread = diag.maxCoeff() / diag.minCoeff();
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) {
    std::ostringstream os;
    os << "Cholesky of the test Gram matrix failed on " << label
       << " (diagonal spread " << sys.diagonal_spread << "; norm likely mis-scaled)";
    throw NumericalError(os.str());
  }
  sys.optimal = llt.solve(load);
  sys.stiffness = sys.optimal.transpose() * load;
  sys.rhs = sys.optimal.transpose() * source;
  sys.gram = std::move(gram);
  sys.load = std::move(load);
  return sys;
}

LocalSystem solve_local(const EnrichedTestSpace& space, const NormSpec& norm,
                        const Element& element, const LocalLayout& layout,
                        const Physics& phys, const ScalarField& f) {
  std::ostringstream label;
  label << "element at (" << element.origin.x << ", " << element.origin.y << ") with "
        << norm.name();
  return compute_optimal(assemble_gram(space, norm, element, phys),
                         assemble_load_matrix(space, element, layout, phys),
                         assemble_source(space, element, f), label.str());
}

Eigen::VectorXd energy_norm_diag(const Eigen::MatrixXd& stiffness) {
  Eigen::VectorXd d = stiffness.diagonal();
  const double scale = std::max(1.0, d.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d(i) < -1e-12 * scale) {
      std::ostringstream os;
      os << "negative energy norm " << d(i) << " for trial function " << i;
      throw NumericalError(os.str());
    }
  }
  return d;
}

namespace {

Eigen::VectorXd quadrature_norms(const EnrichedTestSpace& space_a, const Eigen::MatrixXd& ca,
                                 const EnrichedTestSpace* space_b, const Eigen::MatrixXd* cb,
                                 const NormSpec& norm, const Element& element,
                                 const Physics& phys, const ShishkinGrid& cells) {
  int degree = space_a.degree();
  if (space_b != nullptr) degree = std::max(degree, space_b->degree());
  const QuadRule& rule = gauss_rule(degree + 3);
  const int nq = static_cast<int>(rule.size());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(ca.cols());
  for (int cy = 0; cy < cells.intervals_y(); ++cy) {
    for (int cx = 0; cx < cells.intervals_x(); ++cx) {
      const double x0 = cells.breakpoints_x[cx];
      const double y0 = cells.breakpoints_y[cy];
      const double lx = cells.breakpoints_x[cx + 1] - x0;
      const double ly = cells.breakpoints_y[cy + 1] - y0;
      const std::vector<double> xs = mapped(rule.points, x0, lx);
      const std::vector<double> ys = mapped(rule.points, y0, ly);
      const double mx = x0 + 0.5 * lx;
      const double my = y0 + 0.5 * ly;
      ColumnValues w = evaluate_columns(space_a, ca, element, xs, ys, mx, my);
      if (space_b != nullptr) {
        const ColumnValues b = evaluate_columns(*space_b, *cb, element, xs, ys, mx, my);
        w.tau1 -= b.tau1;
        w.tau2 -= b.tau2;
        w.div -= b.div;
        w.v -= b.v;
        w.vx -= b.vx;
        w.vy -= b.vy;
      }
      for (int qy = 0; qy < nq; ++qy) {
        for (int qx = 0; qx < nq; ++qx) {
          const int q = qx + nq * qy;
          const double wq = rule.weights[qx] * rule.weights[qy] * lx * ly * element.area();
          const Point x = element.map(xs[qx], ys[qy]);
          const double beta = norm.kind == NormKind::weighted
                                  ? weight_beta(x, norm.gamma, norm.delta, phys.a)
                                  : 1.0;
          for (Eigen::Index c = 0; c < ca.cols(); ++c) {
            PhysicalTestValue pv;
            pv.tau1 = w.tau1(q, c);
            pv.tau2 = w.tau2(q, c);
            pv.div_tau = w.div(q, c);
            pv.v = w.v(q, c);
            pv.v_x = w.vx(q, c);
            pv.v_y = w.vy(q, c);
            out(c) += wq * norm_density(norm, phys, pv, beta);
          }
        }
      }
    }
  }
  return out;
}

}  // namespace

Eigen::VectorXd norm_by_quadrature(const EnrichedTestSpace& space, const Eigen::MatrixXd& coeffs,
                                   const NormSpec& norm, const Element& element,
                                   const Physics& phys, const ShishkinGrid& cells) {
  return quadrature_norms(space, coeffs, nullptr, nullptr, norm, element, phys, cells);
}

Eigen::VectorXd difference_norm_by_quadrature(const EnrichedTestSpace& space_a,
                                              const Eigen::MatrixXd& coeffs_a,
                                              const EnrichedTestSpace& space_b,
                                              const Eigen::MatrixXd& coeffs_b,
                                              const NormSpec& norm, const Element& element,
                                              const Physics& phys) {
  if (coeffs_a.cols() != coeffs_b.cols()) {
    throw std::invalid_argument("difference norm needs matching column counts");
  }
  const ShishkinGrid cells = common_refinement(space_a.grid(), space_b.grid());
  return quadrature_norms(space_a, coeffs_a, &space_b, &coeffs_b, norm, element, phys, cells);
}

void write_matrix(std::ostream& os, const Eigen::MatrixXd& m) {
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::scientific << std::setprecision(16);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) os << ' ';
      os << m(i, j);
    }
    os << '\n';
  }
  os.flags(flags);
  os.precision(prec);
}

}  // namespace dpgcd
