#include "dpgcd/bench.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <ostream>
#include <sstream>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "dpgcd/basis.hpp"

namespace dpgcd {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// Sorted, deduplicated union of breakpoints restricted to (lo, hi), with
// the interval ends added.
std::vector<double> cut(double lo, double hi, std::span<const double> breaks) {
  std::vector<double> out{lo};
  const auto first = std::upper_bound(breaks.begin(), breaks.end(), lo);
  for (auto it = first; it != breaks.end() && *it < hi; ++it) {
    if (*it - out.back() > 1e-14 * (hi - lo)) out.push_back(*it);
  }
  if (hi - out.back() <= 1e-14 * (hi - lo) && out.size() > 1) out.pop_back();
  out.push_back(hi);
  return out;
}

std::string sci3(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

}  // namespace

ProblemKind parse_problem(const std::string& name) {
  const std::string n = lower(name);
  if (n == "ej") return ProblemKind::eriksson_johnson;
  if (n == "skew-cont") return ProblemKind::skew_continuous;
  if (n == "skew-disc") return ProblemKind::skew_discontinuous;
  throw std::invalid_argument("unknown problem '" + name + "' (ej, skew-cont, skew-disc)");
}

std::string problem_name(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::eriksson_johnson: return "ej";
    case ProblemKind::skew_continuous: return "skew-cont";
    case ProblemKind::skew_discontinuous: return "skew-disc";
  }
  return "?";
}

BenchmarkProblem make_problem(ProblemKind kind, double eps, double theta_deg) {
  if (!(eps > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (!(theta_deg >= 0.0 && theta_deg <= 90.0)) {
    throw std::invalid_argument("theta must lie in [0, 90] degrees");
  }
  return {kind, eps, theta_deg};
}

Vec2 BenchmarkProblem::advection() const {
  if (kind == ProblemKind::eriksson_johnson) return {1.0, 0.0};
  const double t = theta_deg * std::numbers::pi / 180.0;
  return {std::cos(t), std::sin(t)};
}

double BenchmarkProblem::boundary(Point x) const {
  switch (kind) {
    case ProblemKind::eriksson_johnson:
      return x.x <= 0.0 ? std::sin(std::numbers::pi * x.y) : 0.0;
    case ProblemKind::skew_continuous:
      if (x.x <= 0.0) return 1.0 - x.y;
      if (x.y <= 0.0) return 1.0 - x.x;
      return 0.0;
    case ProblemKind::skew_discontinuous:
      if (x.y <= 0.0) return 1.0;
      if (x.x <= 0.0) return x.y <= 0.2 ? 1.0 : 0.0;
      return 0.0;
  }
  return 0.0;
}

BoundaryValueProblem BenchmarkProblem::bvp() const {
  BoundaryValueProblem b;
  b.phys.eps = eps;
  b.phys.a = advection();
  b.boundary = [self = *this](Point x) { return self.boundary(x); };
  return b;
}

namespace {

// s - 1 without cancellation.
double s_minus_one(double eps) {
  const double q = 4.0 * std::numbers::pi * std::numbers::pi * eps * eps;
  return q / (1.0 + std::sqrt(1.0 + q));
}

}  // namespace

double eriksson_johnson_exact(double x, double y, double eps) {
  const double sm1 = s_minus_one(eps);
  const double s = 1.0 + sm1;
  // exp((1-s)x/2eps) (1 - exp(s(x-1)/eps)) / (1 - exp(-s/eps))
  const double lead = std::exp(-sm1 * x / (2.0 * eps));
  const double num = -std::expm1(s * (x - 1.0) / eps);
  const double den = -std::expm1(-s / eps);
  return lead * num / den * std::sin(std::numbers::pi * y);
}

double eriksson_johnson_exact_factored(double x, double y, double eps) {
  const double s = std::sqrt(1.0 + 4.0 * std::numbers::pi * std::numbers::pi * eps * eps);
  const double t1 = std::exp((1.0 - s) * x / (2.0 * eps));
  const double t2 = std::exp(((1.0 + s) * x - 2.0 * s) / (2.0 * eps));
  return (t1 - t2) / (1.0 - std::exp(-s / eps)) * std::sin(std::numbers::pi * y);
}

FieldSample eriksson_johnson_field(Point p, double eps) {
  const double sm1 = s_minus_one(eps);
  const double s = 1.0 + sm1;
  const double r1 = -sm1 / (2.0 * eps);
  const double r2 = (2.0 + sm1) / (2.0 * eps);
  const double den = -std::expm1(-s / eps);
  const double e1 = std::exp(r1 * p.x);
  const double e2 = std::exp(r2 * p.x - s / eps);
  const double X = (e1 - e2) / den;
  const double dX = (r1 * e1 - r2 * e2) / den;
  const double sy = std::sin(std::numbers::pi * p.y);
  const double cy = std::cos(std::numbers::pi * p.y);
  FieldSample f;
  f.u = eriksson_johnson_exact(p.x, p.y, eps);
  f.sigma1 = -eps * dX * sy;
  f.sigma2 = -eps * X * std::numbers::pi * cy;
  return f;
}

FieldSample GridField::evaluate(Point p) const {
  const auto locate = [](const std::vector<double>& g, double t) {
    const auto it = std::upper_bound(g.begin(), g.end(), t);
    const int i = static_cast<int>(it - g.begin()) - 1;
    return std::clamp(i, 0, static_cast<int>(g.size()) - 2);
  };
  const int i = locate(x, p.x);
  const int j = locate(y, p.y);
  const double s = (p.x - x[i]) / (x[i + 1] - x[i]);
  const double t = (p.y - y[j]) / (y[j + 1] - y[j]);
  const int nxp = static_cast<int>(x.size());
  const int k = j * nxp + i;
  const std::array<double, 4> w{(1 - s) * (1 - t), s * (1 - t), (1 - s) * t, s * t};
  const std::array<int, 4> id{k, k + 1, k + nxp, k + nxp + 1};
  FieldSample f;
  for (int c = 0; c < 4; ++c) {
    f.u += w[c] * u(id[c]);
    f.sigma1 += w[c] * sigma1(id[c]);
    f.sigma2 += w[c] * sigma2(id[c]);
  }
  return f;
}

std::vector<double> reference_grid(int n, double eps, double a_component, Grading grading) {
  if (n < 2) throw std::invalid_argument("reference grid needs at least 2 cells");
  std::vector<double> g(n + 1);
  if (grading == Grading::uniform || a_component <= 0.0) {
    for (int i = 0; i <= n; ++i) g[i] = static_cast<double>(i) / n;
    return g;
  }
  const int half = n / 2;
  const double tau = std::min(0.5, 2.0 * eps * std::log(static_cast<double>(n)));
  const double mid = 1.0 - tau;
  for (int i = 0; i <= half; ++i) g[i] = mid * i / half;
  for (int i = half; i <= n; ++i) g[i] = mid + tau * (i - half) / (n - half);
  g[n] = 1.0;
  return g;
}

GridField galerkin_reference(const BenchmarkProblem& problem, int n, Grading grading) {
  const double eps = problem.eps;
  if (eps < 1e-4) {
    throw ReferenceUnavailable("reference not computable for epsilon < 1e-4");
  }
  const Vec2 a = problem.advection();
  GridField out;
  out.x = reference_grid(n, eps, a[0], grading);
  out.y = reference_grid(n, eps, a[1], grading);
  for (int d = 0; d < 2; ++d) {
    const auto& g = d == 0 ? out.x : out.y;
    const double h_out = g[n] - g[n - 1];
    if (a[d] > 0.0 && h_out >= eps) {
      std::ostringstream os;
      os << "reference grid does not resolve the layer: cell width " << h_out
         << " >= epsilon " << eps;
      throw ReferenceUnavailable(os.str());
    }
  }

  const int nxp = n + 1;
  const int nodes = nxp * nxp;
  std::vector<int> slot(nodes, -1);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(nodes);
  int nfree = 0;
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      const int k = j * nxp + i;
      if (i == 0 || j == 0 || i == n || j == n) {
        g(k) = problem.boundary({out.x[i], out.y[j]});
      } else {
        slot[k] = nfree++;
      }
    }
  }

  const QuadRule& rule = gauss_rule(2);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(n) * n * 16);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nfree);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double hx = out.x[i + 1] - out.x[i];
      const double hy = out.y[j + 1] - out.y[j];
      Eigen::Matrix4d A = Eigen::Matrix4d::Zero();
      for (std::size_t qy = 0; qy < rule.size(); ++qy) {
        for (std::size_t qx = 0; qx < rule.size(); ++qx) {
          const double w = rule.weights[qx] * rule.weights[qy] * hx * hy;
          std::array<ShapeValue, 4> s;
          for (int k = 0; k < 4; ++k) s[k] = tensor_shape(1, 1, k, {rule.points[qx], rule.points[qy]});
          for (int r = 0; r < 4; ++r) {
            for (int c = 0; c < 4; ++c) {
              const double gx_c = s[c].grad[0] / hx;
              const double gy_c = s[c].grad[1] / hy;
              const double gx_r = s[r].grad[0] / hx;
              const double gy_r = s[r].grad[1] / hy;
              A(r, c) += w * (eps * (gx_c * gx_r + gy_c * gy_r) +
                              (a[0] * gx_c + a[1] * gy_c) * s[r].value);
            }
          }
        }
      }
      const std::array<int, 4> id{j * nxp + i, j * nxp + i + 1, (j + 1) * nxp + i,
                                  (j + 1) * nxp + i + 1};
      for (int r = 0; r < 4; ++r) {
        const int sr = slot[id[r]];
        if (sr < 0) continue;
        for (int c = 0; c < 4; ++c) {
          const int sc = slot[id[c]];
          if (sc >= 0) {
            trip.emplace_back(sr, sc, A(r, c));
          } else {
            rhs(sr) -= A(r, c) * g(id[c]);
          }
        }
      }
    }
  }
  out.u = g;
  if (nfree > 0) {
    Eigen::SparseMatrix<double> K(nfree, nfree);
    K.setFromTriplets(trip.begin(), trip.end());
    K.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(K);
    if (lu.info() != Eigen::Success) {
      throw NumericalError("reference factorization failed: " + lu.lastErrorMessage());
    }
    const Eigen::VectorXd x = lu.solve(rhs);
    for (int k = 0; k < nodes; ++k) {
      if (slot[k] >= 0) out.u(k) = x(slot[k]);
    }
  }

  // Nodal flux from central differences (one-sided on the boundary).
  out.sigma1.resize(nodes);
  out.sigma2.resize(nodes);
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      const int il = std::max(i - 1, 0);
      const int ir = std::min(i + 1, n);
      const int jl = std::max(j - 1, 0);
      const int jr = std::min(j + 1, n);
      const int k = j * nxp + i;
      out.sigma1(k) = -eps * (out.u(j * nxp + ir) - out.u(j * nxp + il)) / (out.x[ir] - out.x[il]);
      out.sigma2(k) = -eps * (out.u(jr * nxp + i) - out.u(jl * nxp + i)) / (out.y[jr] - out.y[jl]);
    }
  }
  return out;
}

L2Error l2_error(const SolutionField& sol, const ReferenceField& reference,
                 std::span<const double> breaks_x, std::span<const double> breaks_y) {
  std::vector<double> bx(breaks_x.begin(), breaks_x.end());
  std::vector<double> by(breaks_y.begin(), breaks_y.end());
  std::sort(bx.begin(), bx.end());
  std::sort(by.begin(), by.end());
  const QuadRule& rule = gauss_rule(sol.order() + 3);
  const StructuredMesh& mesh = sol.mesh();
  double eu = 0.0;
  double es = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const Element& el = mesh.element(e);
    const auto cx = cut(el.origin.x, el.origin.x + el.hx, bx);
    const auto cy = cut(el.origin.y, el.origin.y + el.hy, by);
    for (std::size_t sy = 0; sy + 1 < cy.size(); ++sy) {
      const double ly = cy[sy + 1] - cy[sy];
      for (std::size_t sx = 0; sx + 1 < cx.size(); ++sx) {
        const double lx = cx[sx + 1] - cx[sx];
        for (std::size_t qy = 0; qy < rule.size(); ++qy) {
          const double y = cy[sy] + ly * rule.points[qy];
          for (std::size_t qx = 0; qx < rule.size(); ++qx) {
            const double x = cx[sx] + lx * rule.points[qx];
            const double w = rule.weights[qx] * rule.weights[qy] * lx * ly;
            const FieldSample d = sol.evaluate(e, (x - el.origin.x) / el.hx,
                                               (y - el.origin.y) / el.hy);
            const FieldSample r = reference({x, y});
            eu += w * (d.u - r.u) * (d.u - r.u);
            es += w * ((d.sigma1 - r.sigma1) * (d.sigma1 - r.sigma1) +
                       (d.sigma2 - r.sigma2) * (d.sigma2 - r.sigma2));
          }
        }
      }
    }
  }
  return {std::sqrt(eu), std::sqrt(es)};
}

std::vector<double> layer_breakpoints(double eps) {
  std::vector<double> b;
  for (int i = 1; i < 64; ++i) b.push_back(i / 64.0);
  for (double d = 1e-3 * eps; d < 0.5; d *= 2.0) b.push_back(1.0 - d);
  std::sort(b.begin(), b.end());
  return b;
}

NormSpec NormChoice::resolve(double eps, double h) const {
  switch (kind) {
    case NormKind::standard: return NormSpec::standard();
    case NormKind::weighted: return NormSpec::weighted(gamma.value_or(eps), delta.value_or(h));
    case NormKind::quasi_optimal:
      return NormSpec::quasi_optimal(alpha1.value_or(std::pow(eps, -1.5)), alpha2);
  }
  return {};
}

std::string NormChoice::tag() const {
  switch (kind) {
    case NormKind::standard: return "SN";
    case NormKind::weighted: return "WN";
    case NormKind::quasi_optimal: return "QON";
  }
  return "?";
}

NormKind parse_norm(const std::string& name) {
  const std::string n = lower(name);
  if (n == "sn") return NormKind::standard;
  if (n == "wn") return NormKind::weighted;
  if (n == "qon") return NormKind::quasi_optimal;
  throw std::invalid_argument("unknown norm '" + name + "' (sn, wn, qon)");
}

SolutionField solve_benchmark(const BenchmarkProblem& problem, const NormChoice& norm, int n,
                              int p, int dp, int subgrid, double kappa, SolveReport* report) {
  const StructuredMesh mesh(n, n);
  DpgOptions opt;
  opt.p = p;
  opt.dp = dp;
  opt.subgrid = subgrid > 0 ? subgrid : norm.default_subgrid();
  opt.kappa = kappa;
  opt.norm = norm.resolve(problem.eps, 1.0 / n);
  return solve_dpg(mesh, problem.bvp(), opt, report);
}

ReferenceSpec make_reference(const BenchmarkProblem& problem, int n, Grading grading) {
  ReferenceSpec ref;
  if (problem.has_exact_solution()) {
    const double eps = problem.eps;
    ref.field = [eps](Point x) { return eriksson_johnson_field(x, eps); };
    ref.breaks_x = layer_breakpoints(eps);
    for (int i = 1; i < 64; ++i) ref.breaks_y.push_back(i / 64.0);
    return ref;
  }
  auto grid = std::make_shared<GridField>(galerkin_reference(problem, n, grading));
  ref.breaks_x = grid->x;
  ref.breaks_y = grid->y;
  ref.field = [grid](Point x) { return grid->evaluate(x); };
  return ref;
}

ConvergenceRecord run_convergence_study(const BenchmarkProblem& problem, const NormChoice& norm,
                                        const StudyOptions& options,
                                        const ReferenceSpec& reference) {
  ConvergenceRecord rec;
  rec.sweep = options.sweep == SweepKind::h ? "N" : "p";
  rec.norm = norm.tag();
  for (std::size_t k = 0; k < options.values.size(); ++k) {
    if (k > 0 && options.values[k] <= options.values[k - 1]) {
      throw std::invalid_argument("sweep values must be strictly increasing");
    }
  }
  for (int v : options.values) {
    const int n = options.sweep == SweepKind::h ? v : options.n;
    const int p = options.sweep == SweepKind::p ? v : options.p;
    rec.values.push_back(v);
    try {
      const SolutionField sol =
          solve_benchmark(problem, norm, n, p, options.dp, options.subgrid, options.kappa);
      const L2Error err = l2_error(sol, reference.field, reference.breaks_x, reference.breaks_y);
      rec.e_u.push_back(err.u);
      rec.e_sigma.push_back(err.sigma);
      rec.failures.emplace_back();
    } catch (const std::exception& ex) {
      rec.e_u.push_back(std::numeric_limits<double>::quiet_NaN());
      rec.e_sigma.push_back(std::numeric_limits<double>::quiet_NaN());
      rec.failures.emplace_back(ex.what());
    }
  }
  return rec;
}

std::vector<TestFunctionStep> test_function_convergence(const Element& element,
                                                        const Physics& phys,
                                                        const NormSpec& norm, int p,
                                                        std::span<const int> dps, int subgrid,
                                                        double kappa) {
  const LocalLayout layout{p};
  const std::array<std::pair<int, int>, kTrialGroups> groups{{
      {layout.offset(TrialField::sigma1), 2 * layout.interior()},
      {layout.offset(TrialField::u), layout.interior()},
      {layout.offset(TrialField::trace), layout.trace()},
      {layout.offset(TrialField::flux), layout.flux()},
  }};
  std::vector<TestFunctionStep> out;
  for (int dp : dps) {
    DpgOptions lo{p, dp, subgrid, kappa, norm};
    DpgOptions hi{p, dp + 1, subgrid, kappa, norm};
    const EnrichedTestSpace sa = element_test_space(element, phys, lo);
    const EnrichedTestSpace sb = element_test_space(element, phys, hi);
    const LocalSystem la = solve_local(sa, norm, element, layout, phys, {});
    const LocalSystem lb = solve_local(sb, norm, element, layout, phys, {});
    const Eigen::VectorXd diff =
        difference_norm_by_quadrature(sb, lb.optimal, sa, la.optimal, norm, element, phys);
    const Eigen::VectorXd energy = energy_norm_diag(lb.stiffness);
    TestFunctionStep step;
    step.dp = dp;
    step.relative.resize(layout.total());
    for (int i = 0; i < layout.total(); ++i) {
      step.relative(i) = energy(i) > 0.0 ? std::sqrt(std::max(diff(i), 0.0) / energy(i)) : 0.0;
    }
    for (int g = 0; g < kTrialGroups; ++g) {
      const auto seg = step.relative.segment(groups[g].first, groups[g].second);
      step.group_error[g] = seg.mean();
      step.group_squared[g] = seg.squaredNorm() / static_cast<double>(seg.size());
    }
    out.push_back(std::move(step));
  }
  return out;
}

std::string format_min_max(MinMax m) {
  // Avoid printing -0.00.
  const auto fix = [](double v) { return std::abs(v) < 0.005 ? 0.0 : v; };
  char buf[64];
  std::snprintf(buf, sizeof buf, "min/max = %.2f/%.2f", fix(m.min), fix(m.max));
  return buf;
}

void write_table_csv(std::ostream& os, std::span<const ConvergenceRecord> records) {
  os << (records.empty() ? std::string("N") : records.front().sweep);
  for (const auto& r : records) os << ",u_" << r.norm;
  for (const auto& r : records) os << ",sigma_" << r.norm;
  os << '\n';
  if (records.empty()) return;
  const auto& values = records.front().values;
  for (const auto& r : records) {
    if (r.values != values) throw std::invalid_argument("records have different sweeps");
  }
  for (std::size_t k = 0; k < values.size(); ++k) {
    os << values[k];
    for (const auto& r : records) os << ',' << sci3(r.e_u[k]);
    for (const auto& r : records) os << ',' << sci3(r.e_sigma[k]);
    os << '\n';
  }
}

void write_test_function_csv(std::ostream& os, std::span<const TestFunctionStep> steps,
                             bool squared) {
  os << "dp,e_sigma,e_u,e_trace,e_flux,l2_u\n";
  for (const auto& s : steps) {
    os << s.dp;
    for (double g : squared ? s.group_squared : s.group_error) os << ',' << sci3(g);
    os << ',' << sci3(s.e_u) << '\n';
  }
}

}  // namespace dpgcd
