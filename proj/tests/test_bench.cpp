#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "dpgcd/bench.hpp"

using namespace dpgcd;

TEST(Problems, ParseAndName) {
  for (auto k : {ProblemKind::eriksson_johnson, ProblemKind::skew_continuous,
                 ProblemKind::skew_discontinuous}) {
    EXPECT_EQ(parse_problem(problem_name(k)), k);
  }
  EXPECT_THROW(parse_problem("bogus"), std::invalid_argument);
  EXPECT_THROW(make_problem(ProblemKind::eriksson_johnson, 0.0), std::invalid_argument);
  EXPECT_THROW(make_problem(ProblemKind::skew_continuous, 1e-2, 91.0), std::invalid_argument);
  EXPECT_EQ(parse_norm("QON"), NormKind::quasi_optimal);
  EXPECT_THROW(parse_norm("h1"), std::invalid_argument);
}

TEST(Problems, BoundaryData) {
  const auto sc = make_problem(ProblemKind::skew_continuous, 1e-2);
  EXPECT_DOUBLE_EQ(sc.boundary({0.0, 0.25}), 0.75);
  EXPECT_DOUBLE_EQ(sc.boundary({0.25, 0.0}), 0.75);
  EXPECT_DOUBLE_EQ(sc.boundary({1.0, 0.5}), 0.0);
  const auto sd = make_problem(ProblemKind::skew_discontinuous, 1e-2);
  EXPECT_DOUBLE_EQ(sd.boundary({0.0, 0.2}), 1.0);
  EXPECT_DOUBLE_EQ(sd.boundary({0.0, 0.21}), 0.0);
  EXPECT_DOUBLE_EQ(sd.boundary({1.0, 0.0}), 1.0);
  const Vec2 a = sd.advection();
  EXPECT_NEAR(a[0], std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(a[1], std::sqrt(0.5), 1e-15);
}

TEST(ErikssonJohnson, BoundaryValues) {
  for (double eps : {1e-1, 1e-2, 1e-4, 1e-6, 1e-9}) {
    EXPECT_NEAR(eriksson_johnson_exact(1.0, 0.3, eps), 0.0, 1e-14);
    EXPECT_NEAR(eriksson_johnson_exact(0.0, 0.5, eps), 1.0, 1e-14);
    EXPECT_NEAR(eriksson_johnson_exact(0.5, 0.0, eps), 0.0, 1e-14);
    EXPECT_TRUE(std::isfinite(eriksson_johnson_exact(0.999999, 0.5, eps)));
  }
}

TEST(ErikssonJohnson, TwoEvaluationOrdersAgree) {
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    for (double x : {0.0, 0.1, 0.5, 0.9, 0.99, 0.999}) {
      for (double y : {0.1, 0.5, 0.8}) {
        EXPECT_NEAR(eriksson_johnson_exact(x, y, eps),
                    eriksson_johnson_exact_factored(x, y, eps), 1e-12)
            << eps << ' ' << x << ' ' << y;
      }
    }
  }
}

TEST(ErikssonJohnson, FluxMatchesFiniteDifferences) {
  const double h = 1e-6;
  for (double eps : {1e-1, 1e-2}) {
    for (Point p : {Point{0.3, 0.4}, Point{0.9, 0.7}, Point{0.97, 0.2}}) {
      const FieldSample f = eriksson_johnson_field(p, eps);
      const double ux = (eriksson_johnson_exact(p.x + h, p.y, eps) -
                         eriksson_johnson_exact(p.x - h, p.y, eps)) / (2 * h);
      const double uy = (eriksson_johnson_exact(p.x, p.y + h, eps) -
                         eriksson_johnson_exact(p.x, p.y - h, eps)) / (2 * h);
      EXPECT_NEAR(f.sigma1, -eps * ux, 1e-6 * std::max(1.0, std::abs(f.sigma1)));
      EXPECT_NEAR(f.sigma2, -eps * uy, 1e-6 * std::max(1.0, std::abs(f.sigma2)));
    }
  }
}

TEST(ErikssonJohnson, SatisfiesTheEquation) {
  const double eps = 5e-2;
  const double h = 1e-4;
  const auto u = [eps](double x, double y) { return eriksson_johnson_exact(x, y, eps); };
  for (Point p : {Point{0.2, 0.3}, Point{0.8, 0.6}}) {
    const double lap = (u(p.x + h, p.y) + u(p.x - h, p.y) + u(p.x, p.y + h) +
                        u(p.x, p.y - h) - 4 * u(p.x, p.y)) / (h * h);
    const double ux = (u(p.x + h, p.y) - u(p.x - h, p.y)) / (2 * h);
    EXPECT_NEAR(-eps * lap + ux, 0.0, 1e-3);
  }
}

TEST(Reference, GridGrading) {
  const auto uni = reference_grid(8, 1e-2, 1.0, Grading::uniform);
  ASSERT_EQ(uni.size(), 9u);
  EXPECT_DOUBLE_EQ(uni[4], 0.5);
  const auto lay = reference_grid(64, 1e-3, 1.0, Grading::layer);
  EXPECT_DOUBLE_EQ(lay.front(), 0.0);
  EXPECT_DOUBLE_EQ(lay.back(), 1.0);
  EXPECT_NEAR(1.0 - lay[32], 2e-3 * std::log(64.0), 1e-14);
  for (std::size_t i = 1; i < lay.size(); ++i) EXPECT_GT(lay[i], lay[i - 1]);
  // No outflow side in a direction without advection.
  EXPECT_EQ(reference_grid(8, 1e-3, 0.0, Grading::layer), uni);
  EXPECT_THROW(reference_grid(1, 1e-2, 1.0, Grading::uniform), std::invalid_argument);
}

TEST(Reference, RefusesUnresolvableRequests) {
  const auto ej6 = make_problem(ProblemKind::eriksson_johnson, 1e-6);
  EXPECT_THROW(galerkin_reference(ej6, 512, Grading::layer), ReferenceUnavailable);
  const auto ej2 = make_problem(ProblemKind::eriksson_johnson, 1e-2);
  EXPECT_THROW(galerkin_reference(ej2, 50), ReferenceUnavailable);
}

namespace {

double nodal_rms_error(const GridField& g, double eps) {
  double s = 0.0;
  int n = 0;
  for (std::size_t j = 0; j < g.y.size(); ++j) {
    for (std::size_t i = 0; i < g.x.size(); ++i) {
      const double d = g.u(j * g.x.size() + i) - eriksson_johnson_exact(g.x[i], g.y[j], eps);
      s += d * d;
      ++n;
    }
  }
  return std::sqrt(s / n);
}

}  // namespace

TEST(Reference, GalerkinConvergesToExactSolution) {
  const auto ej = make_problem(ProblemKind::eriksson_johnson, 1e-2);
  const GridField fine = galerkin_reference(ej, 512);
  // Off-node values carry the bilinear interpolation error of the layer.
  double worst = 0.0;
  for (double x : {0.1, 0.5, 0.9, 0.98, 0.995}) {
    for (double y : {0.25, 0.5, 0.75}) {
      worst = std::max(worst, std::abs(fine.evaluate({x, y}).u -
                                       eriksson_johnson_exact(x, y, 1e-2)));
    }
  }
  EXPECT_LT(worst, 5e-3);
  EXPECT_LT(nodal_rms_error(fine, 1e-2), 1e-3);
  const double e128 = nodal_rms_error(galerkin_reference(ej, 128), 1e-2);
  const double e256 = nodal_rms_error(galerkin_reference(ej, 256), 1e-2);
  EXPECT_GT(e128 / e256, 3.0);
}

TEST(Reference, InterpolatesNodalValues) {
  GridField g;
  g.x = {0.0, 0.5, 1.0};
  g.y = {0.0, 1.0};
  g.u.resize(6);
  g.u << 0, 1, 2, 3, 4, 5;
  g.sigma1 = g.u;
  g.sigma2 = -g.u;
  EXPECT_DOUBLE_EQ(g.evaluate({0.5, 1.0}).u, 4.0);
  EXPECT_DOUBLE_EQ(g.evaluate({0.25, 0.5}).u, 2.0);
  EXPECT_DOUBLE_EQ(g.evaluate({0.25, 0.5}).sigma2, -2.0);
}

TEST(L2Error, SelfDistanceIsZero) {
  const auto prob = make_problem(ProblemKind::skew_continuous, 1e-2);
  const SolutionField sol = solve_benchmark(prob, NormChoice{}, 4, 2, 2);
  const ReferenceField self = [&sol](Point x) { return sol.evaluate(x); };
  const auto brk = layer_breakpoints(1e-2);
  const L2Error e = l2_error(sol, self, brk, brk);
  EXPECT_LT(e.u, 1e-14);
  EXPECT_LT(e.sigma, 1e-14);
}

TEST(L2Error, ConstantOffset) {
  const auto prob = make_problem(ProblemKind::skew_continuous, 1e-2);
  const SolutionField sol = solve_benchmark(prob, NormChoice{}, 3, 1, 2);
  const ReferenceField shifted = [&sol](Point x) {
    FieldSample f = sol.evaluate(x);
    f.u += 0.5;
    f.sigma1 -= 0.3;
    f.sigma2 += 0.4;
    return f;
  };
  const L2Error e = l2_error(sol, shifted, {}, {});
  EXPECT_NEAR(e.u, 0.5, 1e-13);
  EXPECT_NEAR(e.sigma, 0.5, 1e-13);
}

TEST(L2Error, LayerBreakpointsAreSortedAndInside) {
  const auto b = layer_breakpoints(1e-4);
  ASSERT_FALSE(b.empty());
  EXPECT_GT(b.front(), 0.0);
  EXPECT_LT(b.back(), 1.0);
  EXPECT_LE(1.0 - b.back(), 1.01e-7);
  for (std::size_t i = 1; i < b.size(); ++i) EXPECT_GE(b[i], b[i - 1]);
}

TEST(NormChoice, Defaults) {
  NormChoice wn{NormKind::weighted};
  const NormSpec s = wn.resolve(1e-3, 0.1);
  EXPECT_EQ(s.gamma, 1e-3);
  EXPECT_EQ(s.delta, 0.1);
  EXPECT_EQ(wn.default_subgrid(), 1);
  NormChoice q;
  EXPECT_DOUBLE_EQ(q.resolve(1e-2, 0.1).alpha1, 1e3);
  q.alpha1 = 7.0;
  EXPECT_EQ(q.resolve(1e-2, 0.1).alpha1, 7.0);
  EXPECT_EQ(q.default_subgrid(), 3);
  EXPECT_EQ(q.tag(), "QON");
}

TEST(Study, RecordsFailuresAndKeepsGoing) {
  const auto prob = make_problem(ProblemKind::eriksson_johnson, 1e-2);
  const ReferenceSpec ref = make_reference(prob);
  StudyOptions opt;
  opt.values = {2, 4};
  opt.dp = 2;
  const ConvergenceRecord ok = run_convergence_study(prob, NormChoice{}, opt, ref);
  ASSERT_EQ(ok.e_u.size(), 2u);
  EXPECT_TRUE(ok.failures[0].empty());
  EXPECT_LT(ok.e_u[1], ok.e_u[0]);
  opt.dp = 0;
  const ConvergenceRecord bad = run_convergence_study(prob, NormChoice{}, opt, ref);
  EXPECT_TRUE(std::isnan(bad.e_u[0]));
  EXPECT_FALSE(bad.failures[0].empty());
  opt.values = {4, 2};
  EXPECT_THROW(run_convergence_study(prob, NormChoice{}, opt, ref), std::invalid_argument);
}

TEST(Output, TableCsv) {
  ConvergenceRecord a{"N", "SN", {5, 10}, {0.255, 0.176}, {0.0428, 0.038}, {"", ""}};
  ConvergenceRecord b{"N", "QON", {5, 10}, {0.0769, std::nan("")}, {0.0338, 0.0245}, {"", "x"}};
  const std::vector<ConvergenceRecord> recs{a, b};
  std::ostringstream os;
  write_table_csv(os, recs);
  EXPECT_EQ(os.str(),
            "N,u_SN,u_QON,sigma_SN,sigma_QON\n"
            "5,2.55e-01,7.69e-02,4.28e-02,3.38e-02\n"
            "10,1.76e-01,nan,3.80e-02,2.45e-02\n");
  std::ostringstream empty;
  write_table_csv(empty, std::span<const ConvergenceRecord>{});
  EXPECT_EQ(empty.str(), "N\n");
  b.values = {5, 25};
  const std::vector<ConvergenceRecord> mismatched{a, b};
  std::ostringstream bad;
  EXPECT_THROW(write_table_csv(bad, mismatched), std::invalid_argument);
}

TEST(Output, MinMaxFormat) {
  EXPECT_EQ(format_min_max({-0.001, 0.987}), "min/max = 0.00/0.99");
  EXPECT_EQ(format_min_max({-0.25, 1.014}), "min/max = -0.25/1.01");
}

TEST(Output, TestFunctionCsv) {
  TestFunctionStep s;
  s.dp = 3;
  s.group_error = {0.1, 0.2, 0.3, 0.4};
  s.group_squared = {0.01, 0.04, 0.09, 0.16};
  const std::vector<TestFunctionStep> steps{s};
  std::ostringstream a;
  write_test_function_csv(a, steps);
  EXPECT_EQ(a.str(), "dp,e_sigma,e_u,e_trace,e_flux,l2_u\n3,1.00e-01,2.00e-01,3.00e-01,4.00e-01,nan\n");
  std::ostringstream b;
  write_test_function_csv(b, steps, true);
  EXPECT_EQ(b.str(), "dp,e_sigma,e_u,e_trace,e_flux,l2_u\n3,1.00e-02,4.00e-02,9.00e-02,1.60e-01,nan\n");
}

TEST(TestFunctions, ErrorsAreBoundedAndDecrease) {
  const StructuredMesh mesh(10, 10);
  const Physics ph{1e-2, {std::sqrt(0.5), std::sqrt(0.5)}};
  const std::vector<int> dps{1, 2, 3, 4, 5};
  const auto steps = test_function_convergence(
      mesh.element(0), ph, NormSpec::quasi_optimal_default(1e-2), 1, dps);
  ASSERT_EQ(steps.size(), dps.size());
  for (std::size_t k = 0; k < steps.size(); ++k) {
    EXPECT_EQ(steps[k].relative.size(), 28);
    for (int g = 0; g < kTrialGroups; ++g) {
      EXPECT_GE(steps[k].group_error[g], 0.0);
      EXPECT_LE(steps[k].group_squared[g], steps[k].group_error[g] + 1e-15);
    }
    if (k > 0) {
      EXPECT_LT(steps[k].group_squared[0], steps[k - 1].group_squared[0]);
      EXPECT_LT(steps[k].group_squared[1], steps[k - 1].group_squared[1]);
    }
  }
}

TEST(Benchmarks, ErikssonJohnsonQuasiOptimalHasNoOvershoot) {
  const auto ej = make_problem(ProblemKind::eriksson_johnson, 1e-4);
  const SolutionField sol = solve_benchmark(ej, NormChoice{}, 10, 1, 2);
  const MinMax m = sampled_range(sample_solution(sol, 5));
  EXPECT_GE(m.min, -0.02);
  EXPECT_LE(m.min, 0.02);
  EXPECT_GE(m.max, 0.97);
  EXPECT_LE(m.max, 1.03);
}

TEST(Benchmarks, NormOrderingOnErikssonJohnson) {
  const auto ej = make_problem(ProblemKind::eriksson_johnson, 1e-2);
  const ReferenceSpec ref = make_reference(ej);
  double e[3];
  const NormKind kinds[3] = {NormKind::quasi_optimal, NormKind::weighted, NormKind::standard};
  for (int k = 0; k < 3; ++k) {
    const SolutionField sol = solve_benchmark(ej, NormChoice{kinds[k]}, 10, 1, 2);
    e[k] = l2_error(sol, ref.field, ref.breaks_x, ref.breaks_y).u;
  }
  EXPECT_LT(e[0], e[1]);
  EXPECT_LT(e[1], e[2]);
}
