#include "dpgcd/solver.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <Eigen/SparseCholesky>

#include "dpgcd/basis.hpp"

namespace dpgcd {

GlobalSystem assemble_global(const StructuredMesh& mesh, const DofMap& dofs,
                             std::span<const ElementContribution> locals) {
  if (static_cast<int>(locals.size()) != mesh.num_elements()) {
    throw std::logic_error("one local contribution per element required");
  }
  const int n = dofs.num_global();
  const int nl = dofs.num_local();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(locals.size() * nl * nl);
  GlobalSystem sys;
  sys.rhs = Eigen::VectorXd::Zero(n);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto g = dofs.element_dofs(e);
    const auto s = dofs.element_signs(e);
    const ElementContribution& loc = locals[e];
    if (loc.stiffness.rows() != nl || loc.stiffness.cols() != nl || loc.rhs.size() != nl) {
      throw std::logic_error("local contribution has the wrong size");
    }
    for (int j = 0; j < nl; ++j) {
      if (g[j] < 0 || g[j] >= n) throw std::logic_error("global index out of bounds");
      for (int i = 0; i < nl; ++i) {
        triplets.emplace_back(g[i], g[j], s[i] * s[j] * loc.stiffness(i, j));
      }
      sys.rhs(g[j]) += s[j] * loc.rhs(j);
    }
  }
  sys.matrix.resize(n, n);
  sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
  return sys;
}

Eigen::VectorXd boundary_trace_values(const StructuredMesh& mesh, const DofMap& dofs,
                                      const ScalarField& g, std::span<const int> fixed) {
  const int p = dofs.order();
  const int base = dofs.block_offset(TrialField::trace);
  const int edge_base = base + mesh.num_vertices();
  std::map<int, double> value;
  const auto eval = [&](Point x) { return g ? g(x) : 0.0; };
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    if (mesh.is_boundary_vertex(v)) value[base + v] = eval(mesh.vertex(v));
  }

  // Composite rule so data with a jump inside an edge is still integrated
  // reasonably.
  constexpr int kPieces = 16;
  const QuadRule& rule = gauss_rule(10);
  std::array<double, kMaxDegree + 1> b{};
  std::array<double, kMaxDegree + 1> db{};
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const Edge& edge = mesh.edge(e);
    if (!edge.boundary) continue;
    const Point a = mesh.vertex(edge.vertices[0]);
    const Point c = mesh.vertex(edge.vertices[1]);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(p + 2, p + 2);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(p + 2);
    for (int piece = 0; piece < kPieces; ++piece) {
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const double s = (piece + rule.points[q]) / kPieces;
        const double w = rule.weights[q] / kPieces;
        bernstein_all(p + 1, s, b, db);
        const double gv = eval({a.x + s * (c.x - a.x), a.y + s * (c.y - a.y)});
        for (int i = 0; i <= p + 1; ++i) {
          rhs(i) += w * gv * b[i];
          for (int j = 0; j <= p + 1; ++j) M(i, j) += w * b[i] * b[j];
        }
      }
    }
    Eigen::VectorXd coef(p + 2);
    coef(0) = value.at(base + edge.vertices[0]);
    coef(p + 1) = value.at(base + edge.vertices[1]);
    const Eigen::MatrixXd Mii = M.block(1, 1, p, p);
    const Eigen::VectorXd r =
        rhs.segment(1, p) - M.block(1, 0, p, 1) * coef(0) - M.block(1, p + 1, p, 1) * coef(p + 1);
    coef.segment(1, p) = Mii.llt().solve(r);
    for (int m = 0; m < p; ++m) value[edge_base + e * p + m] = coef(1 + m);
  }

  Eigen::VectorXd out(fixed.size());
  for (std::size_t k = 0; k < fixed.size(); ++k) {
    const auto it = value.find(fixed[k]);
    if (it == value.end()) throw std::logic_error("constrained index is not a boundary trace");
    out(static_cast<Eigen::Index>(k)) = it->second;
  }
  return out;
}

ConstrainedSystem apply_dirichlet(const GlobalSystem& system, const ScalarField& g,
                                  const StructuredMesh& mesh, const DofMap& dofs) {
  ConstrainedSystem out;
  out.num_global = dofs.num_global();
  out.fixed = dirichlet_indices(mesh, dofs);
  out.fixed_values = boundary_trace_values(mesh, dofs, g, out.fixed);

  std::vector<int> slot(out.num_global, -1);  // free position, or -(fixed pos)-2
  for (std::size_t k = 0; k < out.fixed.size(); ++k) {
    slot[out.fixed[k]] = -static_cast<int>(k) - 2;
  }
  for (int i = 0; i < out.num_global; ++i) {
    if (slot[i] == -1) {
      slot[i] = static_cast<int>(out.free.size());
      out.free.push_back(i);
    }
  }
  const int nf = static_cast<int>(out.free.size());
  out.rhs.resize(nf);
  for (int i = 0; i < nf; ++i) out.rhs(i) = system.rhs(out.free[i]);

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(system.matrix.nonZeros());
  for (int col = 0; col < system.matrix.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(system.matrix, col); it; ++it) {
      const int r = slot[it.row()];
      const int c = slot[it.col()];
      if (r < 0) continue;
      if (c >= 0) {
        triplets.emplace_back(r, c, it.value());
      } else {
        out.rhs(r) -= it.value() * out.fixed_values(-c - 2);
      }
    }
  }
  out.matrix.resize(nf, nf);
  out.matrix.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

SolutionField::SolutionField(StructuredMesh mesh, DofMap dofs, Eigen::VectorXd coefficients)
    : mesh_(std::move(mesh)), dofs_(std::move(dofs)), coeffs_(std::move(coefficients)) {
  if (coeffs_.size() != dofs_.num_global()) {
    throw std::invalid_argument("coefficient vector does not match the dof map");
  }
}

FieldSample SolutionField::evaluate(int element, double xi, double eta) const {
  const int p = dofs_.order();
  std::array<double, kMaxDegree + 1> bx{};
  std::array<double, kMaxDegree + 1> by{};
  std::array<double, kMaxDegree + 1> d{};
  bernstein_all(p, xi, bx, d);
  bernstein_all(p, eta, by, d);
  const auto g = dofs_.element_dofs(element);
  const int ni = (p + 1) * (p + 1);
  FieldSample s;
  for (int j = 0; j <= p; ++j) {
    for (int i = 0; i <= p; ++i) {
      const int k = i + (p + 1) * j;
      const double phi = bx[i] * by[j];
      s.sigma1 += coeffs_(g[k]) * phi;
      s.sigma2 += coeffs_(g[ni + k]) * phi;
      s.u += coeffs_(g[2 * ni + k]) * phi;
    }
  }
  return s;
}

FieldSample SolutionField::evaluate(Point x) const {
  const int e = mesh_.locate(x);
  const Element& el = mesh_.element(e);
  const double xi = std::clamp((x.x - el.origin.x) / el.hx, 0.0, 1.0);
  const double eta = std::clamp((x.y - el.origin.y) / el.hy, 0.0, 1.0);
  return evaluate(e, xi, eta);
}

double SolutionField::trace(int edge, double s) const {
  const int e = mesh_.edge(edge).elements[0];
  const Element& el = mesh_.element(e);
  const int le = static_cast<int>(std::find(el.edges.begin(), el.edges.end(), edge) -
                                  el.edges.begin());
  const auto& layout = dofs_.layout();
  const auto g = dofs_.element_dofs(e);
  const int o = layout.offset(TrialField::trace);
  double out = 0.0;
  for (int i = 0; i <= layout.p + 1; ++i) {
    out += coeffs_(g[o + layout.trace_index(le, i)]) * bernstein_eval(i, layout.p + 1, s);
  }
  return out;
}

SolutionField solve(const ConstrainedSystem& system, const StructuredMesh& mesh,
                    const DofMap& dofs, const std::string& label, SolveReport* report) {
  Eigen::VectorXd full = Eigen::VectorXd::Zero(system.num_global);
  for (std::size_t k = 0; k < system.fixed.size(); ++k) {
    full(system.fixed[k]) = system.fixed_values(static_cast<Eigen::Index>(k));
  }
  SolveReport rep;
  rep.num_unknowns = static_cast<int>(system.free.size());
  if (!system.free.empty()) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    ldlt.compute(system.matrix);
    const Eigen::VectorXd D =
        ldlt.info() == Eigen::Success ? Eigen::VectorXd(ldlt.vectorD()) : Eigen::VectorXd();
    rep.min_pivot = D.size() > 0 ? D.minCoeff() : 0.0;
    rep.max_pivot = D.size() > 0 ? D.maxCoeff() : 0.0;
    if (ldlt.info() != Eigen::Success || !(rep.min_pivot > 0.0)) {
      std::ostringstream os;
      os << "global factorization failed (smallest pivot " << rep.min_pivot << ")";
      if (!label.empty()) os << " with " << label;
      throw NumericalError(os.str());
    }
    Eigen::VectorXd x = ldlt.solve(system.rhs);
    Eigen::VectorXd r = system.rhs - system.matrix * x;
    // One step of iterative refinement.
    x += ldlt.solve(r);
    r = system.rhs - system.matrix * x;
    const double bnorm = system.rhs.norm();
    rep.relative_residual = bnorm > 0.0 ? r.norm() / bnorm : r.norm();
    for (std::size_t i = 0; i < system.free.size(); ++i) {
      full(system.free[i]) = x(static_cast<Eigen::Index>(i));
    }
  }
  if (report != nullptr) *report = rep;
  return SolutionField(mesh, dofs, std::move(full));
}

EnrichedTestSpace element_test_space(const Element& element, const Physics& phys,
                                     const DpgOptions& options) {
  if (options.dp < 1) throw std::invalid_argument("enrichment dp must be at least 1");
  const int pt = options.p + options.dp;
  switch (options.subgrid) {
    case 1: return EnrichedTestSpace(single_cell_grid(), pt);
    case 3:
      return EnrichedTestSpace(
          build_shishkin(phys.eps, element.hx, element.hy, pt, options.kappa), pt);
    default:
      throw std::invalid_argument("sub-grid must be 1 or 3, got " +
                                  std::to_string(options.subgrid));
  }
}

SolutionField solve_dpg(const StructuredMesh& mesh, const BoundaryValueProblem& problem,
                        const DpgOptions& options, SolveReport* report) {
  options.norm.validate();
  DofMap dofs(mesh, options.p);
  const LocalLayout& layout = dofs.layout();
  const bool shareable = options.norm.kind != NormKind::weighted;

  struct Cached {
    double hx;
    double hy;
    EnrichedTestSpace space;
    LocalSystem sys;
  };
  std::vector<Cached> cache;
  std::vector<ElementContribution> locals(mesh.num_elements());
  double spread = 1.0;

  for (int e = 0; e < mesh.num_elements(); ++e) {
    const Element& el = mesh.element(e);
    if (!shareable) {
      const EnrichedTestSpace space = element_test_space(el, problem.phys, options);
      LocalSystem sys =
          solve_local(space, options.norm, el, layout, problem.phys, problem.source);
      spread = std::max(spread, sys.diagonal_spread);
      locals[e] = {std::move(sys.stiffness), std::move(sys.rhs)};
      continue;
    }
    auto it = std::find_if(cache.begin(), cache.end(),
                           [&](const Cached& c) { return c.hx == el.hx && c.hy == el.hy; });
    if (it == cache.end()) {
      EnrichedTestSpace space = element_test_space(el, problem.phys, options);
      LocalSystem sys = solve_local(space, options.norm, el, layout, problem.phys, {});
      // Only U_opt and K_l are needed from here on.
      sys.gram.resize(0, 0);
      sys.load.resize(0, 0);
      cache.push_back({el.hx, el.hy, std::move(space), std::move(sys)});
      it = cache.end() - 1;
    }
    spread = std::max(spread, it->sys.diagonal_spread);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(layout.total());
    if (problem.source) {
      rhs = it->sys.optimal.transpose() * assemble_source(it->space, el, problem.source);
    }
    locals[e] = {it->sys.stiffness, std::move(rhs)};
  }

  const GlobalSystem global = assemble_global(mesh, dofs, locals);
  const ConstrainedSystem constrained = apply_dirichlet(global, problem.boundary, mesh, dofs);
  SolveReport rep;
  SolutionField sol = solve(constrained, mesh, dofs, options.norm.name(), &rep);
  rep.max_diagonal_spread = spread;
  if (report != nullptr) *report = rep;
  return sol;
}

std::vector<SampleRow> sample_solution(const SolutionField& sol, int k) {
  if (k < 2) throw std::invalid_argument("need at least 2 samples per element edge");
  const int nx = sol.mesh().nx() * (k - 1);
  const int ny = sol.mesh().ny() * (k - 1);
  std::vector<SampleRow> rows;
  rows.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      const Point x{static_cast<double>(i) / nx, static_cast<double>(j) / ny};
      rows.push_back({x, sol.evaluate(x)});
    }
  }
  return rows;
}

MinMax sampled_range(std::span<const SampleRow> rows) {
  MinMax m{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const SampleRow& r : rows) {
    m.min = std::min(m.min, r.value.u);
    m.max = std::max(m.max, r.value.u);
  }
  return m;
}

void write_solution_csv(std::ostream& os, std::span<const SampleRow> rows) {
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::setprecision(17);
  os << "x,y,u,sigma1,sigma2\n";
  for (const SampleRow& r : rows) {
    os << r.x.x << ',' << r.x.y << ',' << r.value.u << ',' << r.value.sigma1 << ','
       << r.value.sigma2 << '\n';
  }
  os.flags(flags);
  os.precision(prec);
}

}  // namespace dpgcd
