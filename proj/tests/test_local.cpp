#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "dpgcd/local.hpp"

using namespace dpgcd;
using TC = TestComponent;

namespace {

Element make_element(double x0, double y0, double hx, double hy) {
  Element e;
  e.origin = {x0, y0};
  e.hx = hx;
  e.hy = hy;
  return e;
}

const Physics kSkew{1e-2, {std::sqrt(0.5), std::sqrt(0.5)}};

}  // namespace

TEST(LoadMatrix, InteriorTestRowsDoNotSeeTraces) {
  const LocalLayout L{2};
  const EnrichedTestSpace s(build_shishkin(1e-2, 0.1, 4), 4);
  const Eigen::MatrixXd F = assemble_load_matrix(s, make_element(0.3, 0.3, 0.1, 0.1), L, kSkew);
  // v never pairs with u-hat, tau never pairs with sigma-hat_n.
  EXPECT_EQ(F.block(s.offset(TC::v), L.offset(TrialField::trace), s.size(TC::v), L.trace())
                .cwiseAbs()
                .maxCoeff(),
            0.0);
  EXPECT_EQ(F.block(0, L.offset(TrialField::flux), s.offset(TC::v), L.flux()).cwiseAbs().maxCoeff(),
            0.0);
}

TEST(LoadMatrix, HandIntegratedTauDivergenceTerm) {
  const LocalLayout L{1};
  const int pt = 3;
  const EnrichedTestSpace s(single_cell_grid(), pt);
  const Element el = make_element(0.2, 0.4, 0.5, 0.25);
  const Eigen::MatrixXd F = assemble_load_matrix(s, el, L, {0.3, {0.6, 0.8}});

  // tau1 = xi (reference coordinate), tau2 = v = 0.
  Eigen::VectorXd c = Eigen::VectorXd::Zero(s.dimension());
  const int nx = s.x_space(TC::tau1).size();
  for (int j = 0; j < s.y_space(TC::tau1).size(); ++j) {
    for (int i = 0; i < nx; ++i) c(s.offset(TC::tau1) + i + nx * j) = double(i) / (pt + 1);
  }
  const TestValue w = s.evaluate(std::span<const double>(c.data(), c.size()), {0.3, 0.7});
  ASSERT_NEAR(w.tau1, 0.3, 1e-14);
  ASSERT_NEAR(w.tau1_x, 1.0, 1e-13);

  // u = 1: -(d tau1/dx, u) = -(1/hx) |K| = -hy.
  const Eigen::VectorXd u_col = F.middleCols(L.offset(TrialField::u), L.interior()).rowwise().sum();
  EXPECT_NEAR(c.dot(u_col), -el.hy, 1e-14);
}

TEST(LocalSystem, StiffnessIsSymmetricPositiveSemidefinite) {
  for (const NormSpec& n : {NormSpec::standard(), NormSpec::weighted(1e-2, 0.1),
                            NormSpec::quasi_optimal_default(kSkew.eps)}) {
    const LocalLayout L{1};
    const EnrichedTestSpace s(build_shishkin(kSkew.eps, 0.1, 3), 3);
    const LocalSystem sys = solve_local(s, n, make_element(0.0, 0.0, 0.1, 0.1), L, kSkew, {});
    const double scale = sys.stiffness.cwiseAbs().maxCoeff();
    EXPECT_LE((sys.stiffness - sys.stiffness.transpose()).cwiseAbs().maxCoeff(), 1e-10 * scale)
        << n.name();
    const Eigen::MatrixXd sym = 0.5 * (sys.stiffness + sys.stiffness.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    EXPECT_GT(es.eigenvalues().minCoeff(), -1e-10 * scale) << n.name();
  }
}

TEST(LocalSystem, OptimalFunctionsSolveTheGramSystem) {
  const LocalLayout L{2};
  const EnrichedTestSpace s(build_shishkin(kSkew.eps, 0.2, 4), 4);
  const LocalSystem sys = solve_local(s, NormSpec::quasi_optimal_default(kSkew.eps),
                                      make_element(0.4, 0.2, 0.2, 0.2), L, kSkew, {});
  const Eigen::MatrixXd r = sys.gram * sys.optimal - sys.load;
  EXPECT_LE(r.norm(), 1e-10 * sys.load.norm());
  EXPECT_GE(sys.diagonal_spread, 1.0);
}

TEST(LocalSystem, ZeroSourceGivesZeroRhs) {
  const LocalLayout L{1};
  const EnrichedTestSpace s(single_cell_grid(), 3);
  const Element el = make_element(0.0, 0.0, 0.2, 0.2);
  const LocalSystem a = solve_local(s, NormSpec::standard(), el, L, kSkew, {});
  EXPECT_EQ(a.rhs.cwiseAbs().maxCoeff(), 0.0);
  const LocalSystem b =
      solve_local(s, NormSpec::standard(), el, L, kSkew, [](Point) { return 0.0; });
  EXPECT_EQ(b.rhs.cwiseAbs().maxCoeff(), 0.0);
}

TEST(LocalSystem, SourceHitsOnlyV) {
  const EnrichedTestSpace s(single_cell_grid(), 2);
  const Element el = make_element(0.0, 0.0, 0.5, 0.5);
  const Eigen::VectorXd f = assemble_source(s, el, [](Point x) { return 1.0 + x.x * x.y; });
  EXPECT_EQ(f.head(s.offset(TC::v)).cwiseAbs().maxCoeff(), 0.0);
  // Bernstein functions sum to one, so the v entries sum to the integral of f.
  EXPECT_NEAR(f.tail(s.size(TC::v)).sum(), 0.25 + 0.125 * 0.125, 1e-14);
}

TEST(LocalSystem, EnergyNormsMatchDirectQuadrature) {
  const LocalLayout L{2};
  const Element el = make_element(0.5, 0.0, 0.1, 0.1);
  for (const NormSpec& n :
       {NormSpec::standard(), NormSpec::quasi_optimal_default(kSkew.eps)}) {
    const EnrichedTestSpace s(build_shishkin(kSkew.eps, 0.1, 4), 4);
    const LocalSystem sys = solve_local(s, n, el, L, kSkew, {});
    const Eigen::VectorXd d = energy_norm_diag(sys.stiffness);
    const Eigen::VectorXd q = norm_by_quadrature(s, sys.optimal, n, el, kSkew, s.grid());
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      EXPECT_NEAR(d(i), q(i), 1e-8 * std::max(1.0, std::abs(d(i)))) << n.name() << " i=" << i;
    }
  }
}

TEST(LocalSystem, CongruentElementsAgree) {
  const LocalLayout L{1};
  const EnrichedTestSpace s(build_shishkin(kSkew.eps, 0.1, 3), 3);
  const NormSpec n = NormSpec::quasi_optimal_default(kSkew.eps);
  const LocalSystem a = solve_local(s, n, make_element(0.0, 0.0, 0.1, 0.1), L, kSkew, {});
  const LocalSystem b = solve_local(s, n, make_element(0.7, 0.3, 0.1, 0.1), L, kSkew, {});
  EXPECT_LE((a.stiffness - b.stiffness).cwiseAbs().maxCoeff(),
            1e-12 * a.stiffness.cwiseAbs().maxCoeff());
}

TEST(LocalSystem, DifferenceNormOfIdenticalFunctionsIsZero) {
  const EnrichedTestSpace s(build_shishkin(kSkew.eps, 0.1, 3), 3);
  const Element el = make_element(0.0, 0.0, 0.1, 0.1);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Eigen::MatrixXd c(s.dimension(), 3);
  for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = U(rng);
  const Eigen::VectorXd d =
      difference_norm_by_quadrature(s, c, s, c, NormSpec::standard(), el, kSkew);
  EXPECT_EQ(d.cwiseAbs().maxCoeff(), 0.0);
  const Eigen::VectorXd n = norm_by_quadrature(s, c, NormSpec::standard(), el, kSkew, s.grid());
  const Eigen::VectorXd z =
      difference_norm_by_quadrature(s, c, s, Eigen::MatrixXd::Zero(c.rows(), 3),
                                    NormSpec::standard(), el, kSkew);
  EXPECT_LE((n - z).cwiseAbs().maxCoeff(), 1e-12 * n.maxCoeff());
}

TEST(ComputeOptimal, RejectsSingularGram) {
  const Eigen::MatrixXd load = Eigen::MatrixXd::Ones(2, 1);
  const Eigen::VectorXd src = Eigen::VectorXd::Zero(2);
  EXPECT_THROW(compute_optimal(Eigen::MatrixXd::Zero(2, 2), load, src, "test"), NumericalError);
  Eigen::MatrixXd indefinite(2, 2);
  indefinite << 1.0, 2.0, 2.0, 1.0;
  EXPECT_THROW(compute_optimal(indefinite, load, src, "test"), NumericalError);
}

TEST(ComputeOptimal, ReportsDiagonalSpread) {
  Eigen::MatrixXd g = Eigen::MatrixXd::Identity(2, 2);
  g(1, 1) = 1e6;
  const LocalSystem s =
      compute_optimal(g, Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Ones(2), "test");
  EXPECT_DOUBLE_EQ(s.diagonal_spread, 1e6);
  EXPECT_NEAR(s.stiffness(1, 1), 1e-6, 1e-20);
  EXPECT_NEAR(s.rhs(0), 1.0, 1e-15);
}

TEST(EnergyNormDiag, ToleratesRoundingButNotNegativeNorms) {
  Eigen::MatrixXd k = Eigen::MatrixXd::Identity(3, 3);
  k(2, 2) = -1e-15;
  EXPECT_NO_THROW(energy_norm_diag(k));
  k(2, 2) = -1e-6;
  EXPECT_THROW(energy_norm_diag(k), NumericalError);
}
