#include "dpgcd/norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dpgcd/basis.hpp"

namespace dpgcd {

namespace {

using TC = TestComponent;

const Eigen::MatrixXd& pick(const Tabulation& t, Op op) {
  switch (op) {
    case Op::value: return t.value;
    case Op::dx: return t.dx;
    case Op::dy: return t.dy;
  }
  return t.value;
}

}  // namespace

NormSpec NormSpec::weighted(double gamma, double delta) {
  NormSpec n;
  n.kind = NormKind::weighted;
  n.gamma = gamma;
  n.delta = delta;
  return n;
}

NormSpec NormSpec::quasi_optimal(double alpha1, double alpha2) {
  NormSpec n;
  n.kind = NormKind::quasi_optimal;
  n.alpha1 = alpha1;
  n.alpha2 = alpha2;
  return n;
}

NormSpec NormSpec::quasi_optimal_default(double eps) {
  return quasi_optimal(std::pow(eps, -1.5), 1.0);
}

std::string NormSpec::name() const {
  std::ostringstream os;
  switch (kind) {
    case NormKind::standard: return "SN";
    case NormKind::weighted:
      os << "WN(gamma=" << gamma << ", delta=" << delta << ")";
      return os.str();
    case NormKind::quasi_optimal:
      os << "QON(alpha1=" << alpha1 << ", alpha2=" << alpha2 << ")";
      return os.str();
  }
  return "?";
}

void NormSpec::validate() const {
  if (kind == NormKind::weighted && (!(gamma > 0.0) || !(delta >= 0.0))) {
    throw std::invalid_argument("weighted norm needs gamma > 0 and delta >= 0");
  }
  if (kind == NormKind::quasi_optimal && (!(alpha1 >= 0.0) || !(alpha2 >= 0.0))) {
    throw std::invalid_argument("quasi-optimal norm needs alpha1 >= 0 and alpha2 >= 0");
  }
}

double weight_beta(Point x, double gamma, double delta, Vec2 a) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  // Sides of the unit square: left, right, bottom, top.
  const std::array<double, 4> a_dot_n{-a[0], a[0], -a[1], a[1]};
  const std::array<double, 4> dist{x.x, 1.0 - x.x, x.y, 1.0 - x.y};
  double d_in = inf;
  double d_out = inf;
  for (int s = 0; s < 4; ++s) {
    if (a_dot_n[s] < 0.0) {
      d_in = std::min(d_in, dist[s]);
    } else {
      d_out = std::min(d_out, dist[s]);
    }
  }
  return (d_in <= delta && d_out >= delta) ? gamma : 1.0;
}

std::vector<GramTerm> gram_terms(const NormSpec& norm, const Physics& phys) {
  std::vector<GramTerm> t;
  if (norm.kind != NormKind::quasi_optimal) {
    t = {
        {1.0, TC::tau1, Op::dx, TC::tau1, Op::dx},
        {1.0, TC::tau1, Op::value, TC::tau1, Op::value},
        {1.0, TC::tau1, Op::dx, TC::tau2, Op::dy},
        {1.0, TC::tau2, Op::dy, TC::tau1, Op::dx},
        {1.0, TC::tau2, Op::dy, TC::tau2, Op::dy},
        {1.0, TC::tau2, Op::value, TC::tau2, Op::value},
        {1.0, TC::v, Op::dx, TC::v, Op::dx},
        {1.0, TC::v, Op::dy, TC::v, Op::dy},
        {1.0, TC::v, Op::value, TC::v, Op::value},
    };
    return t;
  }
  const double ie = 1.0 / phys.eps;
  const double mass = ie * ie + norm.alpha1;
  const auto [a1, a2] = phys.a;
  t = {
      // [11], [12], [13]
      {1.0, TC::tau1, Op::dx, TC::tau1, Op::dx},
      {mass, TC::tau1, Op::value, TC::tau1, Op::value},
      {1.0, TC::tau1, Op::dx, TC::tau2, Op::dy},
      {-ie, TC::tau1, Op::value, TC::v, Op::dx},
      {a1, TC::tau1, Op::dx, TC::v, Op::dx},
      {a2, TC::tau1, Op::dx, TC::v, Op::dy},
      // [21], [22], [23]
      {1.0, TC::tau2, Op::dy, TC::tau1, Op::dx},
      {1.0, TC::tau2, Op::dy, TC::tau2, Op::dy},
      {mass, TC::tau2, Op::value, TC::tau2, Op::value},
      {-ie, TC::tau2, Op::value, TC::v, Op::dy},
      {a1, TC::tau2, Op::dy, TC::v, Op::dx},
      {a2, TC::tau2, Op::dy, TC::v, Op::dy},
      // [31], [32], [33]
      {-ie, TC::v, Op::dx, TC::tau1, Op::value},
      {a1, TC::v, Op::dx, TC::tau1, Op::dx},
      {a2, TC::v, Op::dy, TC::tau1, Op::dx},
      {-ie, TC::v, Op::dy, TC::tau2, Op::value},
      {a1, TC::v, Op::dx, TC::tau2, Op::dy},
      {a2, TC::v, Op::dy, TC::tau2, Op::dy},
      {1.0 + a1 * a1, TC::v, Op::dx, TC::v, Op::dx},
      {a1 * a2, TC::v, Op::dx, TC::v, Op::dy},
      {1.0 + a2 * a2, TC::v, Op::dy, TC::v, Op::dy},
      {a1 * a2, TC::v, Op::dy, TC::v, Op::dx},
      {norm.alpha2, TC::v, Op::value, TC::v, Op::value},
  };
  return t;
}

Eigen::MatrixXd assemble_gram(const EnrichedTestSpace& space, const NormSpec& norm,
                              const Element& element, const Physics& phys) {
  norm.validate();
  const int n = space.dimension();
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
  const auto terms = gram_terms(norm, phys);
  const QuadRule& rule = gauss_rule(space.degree() + 2);
  const int nq1 = static_cast<int>(rule.size());
  const auto& grid = space.grid();

  for (int sy = 0; sy < grid.intervals_y(); ++sy) {
    for (int sx = 0; sx < grid.intervals_x(); ++sx) {
      std::array<Tabulation, 3> tab;
      for (TC c : kTestComponents) {
        Tabulation t = space.tabulate(c, sx, sy, rule.points, rule.points);
        // Reference derivatives to physical.
        t.dx /= element.hx;
        t.dy /= element.hy;
        tab[static_cast<int>(c)] = std::move(t);
      }
      const double lx = grid.breakpoints_x[sx + 1] - grid.breakpoints_x[sx];
      const double ly = grid.breakpoints_y[sy + 1] - grid.breakpoints_y[sy];
      Eigen::VectorXd w(nq1 * nq1);
      for (int qy = 0; qy < nq1; ++qy) {
        for (int qx = 0; qx < nq1; ++qx) {
          double wq = rule.weights[qx] * rule.weights[qy] * lx * ly * element.area();
          if (norm.kind == NormKind::weighted) {
            const Point x = element.map(grid.breakpoints_x[sx] + lx * rule.points[qx],
                                        grid.breakpoints_y[sy] + ly * rule.points[qy]);
            wq *= weight_beta(x, norm.gamma, norm.delta, phys.a);
          }
          w(qx + nq1 * qy) = wq;
        }
      }
      for (const GramTerm& term : terms) {
        if (term.coef == 0.0) continue;
        const Tabulation& r = tab[static_cast<int>(term.row)];
        const Tabulation& c = tab[static_cast<int>(term.col)];
        const Eigen::MatrixXd block =
            term.coef * (pick(r, term.row_op).transpose() * w.asDiagonal() *
                         pick(c, term.col_op));
        for (std::size_t j = 0; j < c.dofs.size(); ++j) {
          for (std::size_t i = 0; i < r.dofs.size(); ++i) {
            K(r.dofs[i], c.dofs[j]) += block(i, j);
          }
        }
      }
    }
  }
  return K;
}

double norm_density(const NormSpec& norm, const Physics& phys,
                    const PhysicalTestValue& w, double beta) {
  const double sq_tau = w.tau1 * w.tau1 + w.tau2 * w.tau2;
  const double sq_grad = w.v_x * w.v_x + w.v_y * w.v_y;
  switch (norm.kind) {
    case NormKind::standard:
      return w.div_tau * w.div_tau + sq_tau + sq_grad + w.v * w.v;
    case NormKind::weighted:
      return beta * (w.div_tau * w.div_tau + sq_tau + sq_grad + w.v * w.v);
    case NormKind::quasi_optimal: {
      const double r1 = w.tau1 / phys.eps - w.v_x;
      const double r2 = w.tau2 / phys.eps - w.v_y;
      const double r3 = w.div_tau + phys.a[0] * w.v_x + phys.a[1] * w.v_y;
      return r1 * r1 + r2 * r2 + r3 * r3 + norm.alpha1 * sq_tau +
             norm.alpha2 * w.v * w.v;
    }
  }
  return 0.0;
}

}  // namespace dpgcd
