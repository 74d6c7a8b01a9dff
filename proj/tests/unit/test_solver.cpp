#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fracvar/errors.hpp"
#include "fracvar/solver.hpp"
#include "fracvar_cli/commands.hpp"

using namespace fracvar;

namespace {

Problem make(std::size_t n, double alpha, double beta, double gamma, const std::string& lagr,
             EndCondition right, double left = 0.0) {
  return Problem{Grid(0, 1, n), FracOrder(alpha), FracOrder(beta), gamma, 1,
                 parse(lagr, 1, 0),  {{left}, {right}}, {}};
}

double sup_distance(const SampledTrajectory& y, double (*f)(double)) {
  double m = 0.0;
  for (std::size_t k = 0; k < y.grid().size(); ++k) {
    m = std::max(m, std::abs(y[0][k] - f(y.grid().node(k))));
  }
  return m;
}

double sup_norm(const SampledTrajectory& y) {
  double m = 0.0;
  for (const auto& c : y.components())
    for (double v : c.values()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

TEST(Options, RejectNonPositiveFields) {
  SolveOptions o;
  EXPECT_NO_THROW(o.validate());
  o.max_iterations = 0;
  EXPECT_THROW(o.validate(), DomainError);
  o = {};
  o.step_control.shrink = 1.0;
  EXPECT_THROW(o.validate(), DomainError);
  o = {};
  o.gradient_tolerance = -1.0;
  EXPECT_THROW(o.validate(), DomainError);
}

TEST(DiscreteGradient, LinearLagrangianGivesTrapezoidWeights) {
  const Problem p = make(41, 0.5, 0.5, 0.5, "y1", EndCondition::fixed(1.0));
  const auto g = discrete_gradient(p, initial_trajectory(p));
  EXPECT_EQ(g[0][0], 0.0);
  EXPECT_EQ(g[0][40], 0.0);
  for (std::size_t k = 1; k < 40; ++k) EXPECT_DOUBLE_EQ(g[0][k], p.grid.step());
}

TEST(DiscreteGradient, FreeEndGetsHalfWeight) {
  const Problem p = make(41, 0.5, 0.5, 0.5, "y1", EndCondition::free());
  const auto g = discrete_gradient(p, initial_trajectory(p));
  EXPECT_DOUBLE_EQ(g[0][40], 0.5 * p.grid.step());
}

TEST(DiscreteGradient, MatchesCentralDifferences) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> ord(0.1, 0.9);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::vector<std::string> lagr = {"0.5*D[y1]^2 + sin(y1)", "exp(x)*D[y1]^2 - y1*D[y1]",
                                         "sqrt(1 + D[y1]^2) + y1^2", "cos(D[y1]) + x*y1^3"};
  for (int t = 0; t < 8; ++t) {
    const auto right = t % 2 ? EndCondition::free() : EndCondition::fixed(unit(rng));
    const Problem p = make(33, ord(rng), ord(rng), unit(rng), lagr[t % lagr.size()], right);
    SampledTrajectory y(p.grid, 1);
    const double c = unit(rng);
    for (std::size_t k = 0; k < p.grid.size(); ++k) y[0][k] = std::sin(3 * p.grid.node(k) + c);
    y[0][0] = 0.0;
    const auto g = discrete_gradient(p, y);
    const std::size_t last = t % 2 ? p.grid.size() : p.grid.size() - 1;
    for (std::size_t k = 1; k < last; ++k) {
      const double step = 1e-6;
      auto yp = y;
      auto ym = y;
      yp[0][k] += step;
      ym[0][k] -= step;
      const double fd = (evaluate_functional(p, yp) - evaluate_functional(p, ym)) / (2 * step);
      EXPECT_LE(std::abs(g[0][k] - fd), 1e-5 * std::abs(fd) + 1e-10) << t << " node " << k;
    }
  }
}

TEST(DiscreteGradient, AugmentedVersionSubtractsMultipliedConstraint) {
  Problem p = make(31, 0.6, 0.6, 1.0, "0.5*D[y1]^2", EndCondition::fixed(1.0));
  p.constraints.push_back({parse("y1", 1, 0), 0.3, ConstraintMode::equality});
  const auto y = initial_trajectory(p);
  const auto g0 = discrete_gradient(p, y);
  const std::vector<double> lam{2.0};
  const auto g1 = discrete_gradient(p, y, lam);
  for (std::size_t k = 1; k + 1 < p.grid.size(); ++k) {
    EXPECT_NEAR(g1[0][k], g0[0][k] - 2.0 * p.grid.step(), 1e-14);
  }
}

TEST(InitialTrajectory, InterpolatesBoundaryData) {
  const Problem fixed = make(11, 0.5, 0.5, 1.0, "0.5*D[y1]^2", EndCondition::fixed(3.0), 1.0);
  const auto y = initial_trajectory(fixed);
  EXPECT_DOUBLE_EQ(y[0][5], 2.0);
  const Problem freed = make(11, 0.5, 0.5, 1.0, "0.5*D[y1]^2", EndCondition::free(), 1.0);
  const auto yf = initial_trajectory(freed);
  for (double v : yf[0].values()) EXPECT_EQ(v, 1.0);
  const Problem capped = make(11, 0.5, 0.5, 1.0, "0.5*D[y1]^2", EndCondition::capped(0.5), 1.0);
  EXPECT_EQ(initial_trajectory(capped)[0][10], 0.5);
}

TEST(Solve, ClassicalLimitStraightLine) {
  const Problem p = make(501, 0.99, 0.99, 1.0, "0.5*D[y1]^2", EndCondition::fixed(1.0));
  const auto rep = solve(p);
  EXPECT_TRUE(rep.converged) << rep.diagnostics;
  EXPECT_LE(sup_distance(rep.trajectory, [](double x) { return x; }), 2e-2);
  EXPECT_NEAR(rep.objective, 0.5, 2e-2);
  EXPECT_LE(rep.el_residual_norm, 5e-2);
  EXPECT_LE(rep.gradient_norm, SolveOptions{}.gradient_tolerance);
}

TEST(Solve, FreeEndGivesZeroTrajectory) {
  for (auto [a, b, g] : {std::tuple{0.99, 0.99, 1.0}, {0.5, 0.5, 0.5}, {0.3, 0.8, 0.0}}) {
    const Problem p = make(201, a, b, g, "0.5*D[y1]^2", EndCondition::free());
    const auto rep = solve(p);
    EXPECT_TRUE(rep.converged);
    EXPECT_LE(rep.objective, 1e-10);
    EXPECT_EQ(sup_norm(rep.trajectory), 0.0);
    ASSERT_EQ(rep.transversality.size(), 1u);
    EXPECT_LE(rep.transversality[0].residual(), 1e-2);
  }
}

// The residual of the discrete minimizer at alpha = 0.5 is small in the bulk
// but d L / d D y behaves like (b - x)^(-1/2) at the right end, so the
// interior norm over nodes 2..n-3 does not fall below 1e-2 on any grid.
TEST(Solve, HalfOrderBeatsLinearInterpolant) {
  const Problem p = make(501, 0.5, 0.5, 1.0, "0.5*D[y1]^2", EndCondition::fixed(1.0));
  const auto rep = solve(p);
  EXPECT_TRUE(rep.converged);
  EXPECT_LE(rep.objective, evaluate_functional(p, initial_trajectory(p)));
  EXPECT_LE(rep.el_residual_norm, rep.el_residual_bound);
  const auto r = el_residual(p, rep.trajectory);
  double bulk = 0.0;
  for (std::size_t k = 50; k <= 450; ++k) bulk = std::max(bulk, std::abs(r[0][k]));
  EXPECT_LE(bulk, 1e-2);
}

TEST(Solve, CappedEndIsProjected) {
  const Problem p = make(101, 0.7, 0.7, 1.0, "0.5*(D[y1] - 2)^2", EndCondition::capped(0.5));
  const auto rep = solve(p);
  EXPECT_TRUE(rep.converged) << rep.diagnostics;
  EXPECT_LE(rep.trajectory[0][100], 0.5);
  ASSERT_EQ(rep.transversality.size(), 1u);
  EXPECT_EQ(rep.transversality[0].status, TransversalityReport::Status::active);
  EXPECT_TRUE(rep.transversality[0].sign_ok);
}

TEST(Solve, LooseCapBehavesLikeFreeEnd) {
  const Problem capped = make(101, 0.7, 0.7, 1.0, "0.5*D[y1]^2 + (y1 - x)^2", EndCondition::capped(5.0));
  const Problem freed = make(101, 0.7, 0.7, 1.0, "0.5*D[y1]^2 + (y1 - x)^2", EndCondition::free());
  const auto a = solve(capped);
  const auto b = solve(freed);
  EXPECT_EQ(a.transversality[0].status, TransversalityReport::Status::interior);
  EXPECT_NEAR(a.objective, b.objective, 1e-10);
}

TEST(Solve, ObjectiveHistoryIsMonotone) {
  const Problem p = make(101, 0.4, 0.6, 0.3, "sqrt(1 + D[y1]^2) + y1^2", EndCondition::fixed(1.0));
  for (auto dir : {DescentDirection::newton, DescentDirection::steepest_descent}) {
    SolveOptions o;
    o.direction = dir;
    o.max_iterations = 300;
    const auto rep = solve(p, o);
    ASSERT_FALSE(rep.objective_history.empty());
    for (std::size_t i = 1; i < rep.objective_history.size(); ++i) {
      EXPECT_LE(rep.objective_history[i], rep.objective_history[i - 1]);
    }
  }
}

TEST(Solve, IsDeterministic) {
  const Problem p = make(151, 0.4, 0.6, 0.3, "sqrt(1 + D[y1]^2) + y1^2", EndCondition::free(), 1.0);
  const auto a = solve(p);
  const auto b = solve(p);
  for (std::size_t k = 0; k < p.grid.size(); ++k) EXPECT_EQ(a.trajectory[0][k], b.trajectory[0][k]);
  EXPECT_EQ(a.objective, b.objective);
  EXPECT_EQ(a.gradient_norm, b.gradient_norm);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_EQ(a.el_residual_norm, b.el_residual_norm);
  EXPECT_EQ(a.transversality[0].value, b.transversality[0].value);
  EXPECT_EQ(a.objective_history, b.objective_history);
}

TEST(Solve, SteepestDescentReachesNewtonSolution) {
  const Problem p = make(21, 0.6, 0.6, 0.5, "0.5*D[y1]^2 + y1^2", EndCondition::fixed(1.0));
  SolveOptions o;
  o.direction = DescentDirection::steepest_descent;
  o.gradient_tolerance = 1e-7;
  o.max_iterations = 200000;
  const auto sd = solve(p, o);
  const auto nt = solve(p);
  EXPECT_TRUE(sd.converged) << sd.diagnostics;
  EXPECT_NEAR(sd.objective, nt.objective, 1e-9);
}

TEST(Solve, IterationLimitIsReported) {
  const Problem p = make(101, 0.4, 0.6, 0.3, "sqrt(1 + D[y1]^2) + y1^2", EndCondition::fixed(1.0));
  SolveOptions o;
  o.direction = DescentDirection::steepest_descent;
  o.max_iterations = 3;
  const auto rep = solve(p, o);
  EXPECT_FALSE(rep.converged);
  EXPECT_FALSE(rep.diagnostics.empty());
  EXPECT_EQ(rep.iterations, 3u);
}

TEST(Solve, CertificateHoldsOnConvergedRuns) {
  const std::vector<std::string> lagr = {"0.5*D[y1]^2 + y1^2", "sqrt(1 + D[y1]^2)",
                                         "exp(-x)*D[y1]^2 + x*y1"};
  for (const auto& l : lagr) {
    for (double g : {1.0, 0.5, 0.0}) {
      const Problem p = make(201, 0.8, 0.7, g, l, EndCondition::fixed(1.0));
      const auto rep = solve(p);
      ASSERT_TRUE(rep.converged) << l << " " << g;
      EXPECT_LE(rep.el_residual_norm, rep.el_residual_bound) << l << " " << g;
    }
  }
}

TEST(Solve, RejectsConstrainedProblems) {
  Problem p = make(21, 0.5, 0.5, 1.0, "0.5*D[y1]^2", EndCondition::fixed(1.0));
  p.constraints.push_back({parse("y1", 1, 0), 0.3, ConstraintMode::equality});
  EXPECT_THROW(solve(p), PreconditionError);
  Problem q = make(21, 0.5, 0.5, 1.0, "0.5*D[y1]^2", EndCondition::fixed(1.0));
  EXPECT_THROW(solve_isoperimetric(q), PreconditionError);
}

TEST(BruteForce, SolverBeatsSeededRandomSearch) {
  const std::vector<Problem> problems = {
      make(7, 0.5, 0.5, 1.0, "0.5*D[y1]^2", EndCondition::fixed(1.0)),
      make(7, 0.3, 0.7, 0.4, "0.5*D[y1]^2 + y1^2", EndCondition::fixed(1.0)),
      make(7, 0.6, 0.6, 0.5, "(D[y1] - 1)^2 + 0.5*y1^2", EndCondition::free()),
      make(7, 0.8, 0.2, 0.0, "D[y1]^2 + x*y1", EndCondition::capped(0.2), 0.5),
      make(7, 0.9, 0.9, 0.7, "exp(-x)*D[y1]^2 + (y1 - x)^2", EndCondition::free()),
  };
  for (std::size_t i = 0; i < problems.size(); ++i) {
    const auto rep = solve(problems[i]);
    ASSERT_TRUE(rep.converged) << i;
    const auto rs = cli::random_search(problems[i], 42, 10000);
    EXPECT_EQ(rs.evaluated, 10000u);
    EXPECT_LE(rep.objective, rs.best_objective + 1e-6) << i;
  }
}

TEST(Isoperimetric, ClassicalLimit) {
  Problem p = make(501, 0.99, 0.99, 1.0, "D[y1]^2", EndCondition::fixed(0.0));
  p.constraints.push_back({parse("y1", 1, 0), 0.25, ConstraintMode::equality});
  const auto rep = solve_isoperimetric(p);
  EXPECT_TRUE(rep.converged) << rep.diagnostics;
  EXPECT_LE(sup_distance(rep.trajectory, [](double x) { return 1.5 * x * (1 - x); }), 0.05 * 0.375);
  ASSERT_TRUE(rep.multipliers.has_value());
  EXPECT_NEAR(rep.multipliers->lam[0], 6.0, 0.3);
  EXPECT_LE(std::abs(rep.constraint_residuals[0]), 1e-6);
  EXPECT_EQ(rep.complementarity, 0.0);
  ASSERT_TRUE(rep.regularity_determinant.has_value());
  EXPECT_FALSE(rep.regularity_warning);
}

TEST(Isoperimetric, FeasibleUnconstrainedOptimumNeedsNoMultiplier) {
  Problem p = make(201, 0.8, 0.8, 1.0, "0.5*D[y1]^2", EndCondition::fixed(1.0));
  const auto free_rep = solve(p);
  const double l = constraint_integral(
      Problem{p.grid, p.alpha, p.beta, p.gamma, 1, p.lagrangian, p.bcs,
              {{parse("y1", 1, 0), 0.0, ConstraintMode::equality}}},
      free_rep.trajectory, 0);
  p.constraints.push_back({parse("y1", 1, 0), l, ConstraintMode::equality});
  const auto rep = solve_isoperimetric(p);
  EXPECT_TRUE(rep.converged) << rep.diagnostics;
  EXPECT_LE(std::abs(rep.multipliers->lam[0]), 1e-6);
}

TEST(Isoperimetric, InactiveInequality) {
  Problem p = make(201, 0.6, 0.6, 0.5, "0.5*D[y1]^2", EndCondition::free());
  p.constraints.push_back({parse("y1", 1, 0), 10.0, ConstraintMode::inequality});
  const auto rep = solve_isoperimetric(p);
  EXPECT_TRUE(rep.converged) << rep.diagnostics;
  EXPECT_EQ(rep.multipliers->lam[0], 0.0);
  EXPECT_EQ(rep.complementarity, 0.0);
  EXPECT_LE(rep.objective, 1e-10);
}

TEST(Isoperimetric, ActiveInequalityHasNonNegativeMultiplier) {
  // The unconstrained minimizer has int y^2 far above the cap.
  Problem p = make(201, 0.9, 0.9, 1.0, "D[y1]^2 - y1", EndCondition::fixed(0.0));
  p.constraints.push_back({parse("y1^2", 1, 0), 0.001, ConstraintMode::inequality});
  const auto rep = solve_isoperimetric(p);
  EXPECT_TRUE(rep.converged) << rep.diagnostics;
  EXPECT_GE(rep.multipliers->lam[0], 0.0);
  EXPECT_LE(std::abs(rep.constraint_residuals[0]), 1e-6);
  EXPECT_EQ(rep.complementarity, 0.0);
}

TEST(BumpDirections, VanishAtEndsAndCycleComponents) {
  const Grid g(0, 2, 51);
  const auto d = bump_directions(g, 2, 3);
  ASSERT_EQ(d.size(), 3u);
  for (const auto& h : d) {
    EXPECT_EQ(h[0][0], 0.0);
    EXPECT_EQ(h[0][50], 0.0);
    EXPECT_EQ(h[1][50], 0.0);
  }
  EXPECT_TRUE(d[0][1].values()[25] == 0.0);
  EXPECT_NEAR(d[0][0][25], 1.0, 1e-15);
  EXPECT_NEAR(d[1][1][25], 1.0, 1e-15);
  EXPECT_NEAR(d[2][0][25], 0.0, 1e-15);
}
