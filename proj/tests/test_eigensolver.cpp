#include <chrono>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include <friedrichs/decompose.hpp>
#include <friedrichs/eigensolver.hpp>

#include "support.hpp"

using namespace friedrichs;
using friedrichs::test_support::pair_1d;
using friedrichs::test_support::pair_2d;
using friedrichs::test_support::rel_diff;

TEST(Eigensolver, LinearCaseMatchesPiSquared) {
  const EigenPair& pair = pair_1d(2.0, 2.0, 256);
  EXPECT_LT(rel_diff(pair.lambda1, std::numbers::pi * std::numbers::pi), 5e-3);
  EXPECT_TRUE(pair.diagnostics.converged);
}

TEST(Eigensolver, PairInvariants) {
  for (auto [p, q] : {std::pair{3.0, 2.0}, std::pair{3.0, 3.0}, std::pair{4.0, 2.0}, std::pair{2.5, 2.0}}) {
    const EigenPair& pair = pair_1d(p, q);
    const Exponents e(p, q);
    for (int i : pair.grid().free_nodes()) ASSERT_GT(pair.phi1[i], 0.0);
    EXPECT_LT(std::abs(norm_q(pair.phi1, q) - 1.0), 1e-12);
    EXPECT_LT(rel_diff(rayleigh(pair.phi1, e), pair.lambda1), 1e-12);
    EXPECT_LE(eigen_residual(pair.phi1, e), 1e-11);
  }
  const EigenPair& sq = pair_2d(3.0, 2.0, 12);
  for (int i : sq.grid().free_nodes()) ASSERT_GT(sq.phi1[i], 0.0);
}

TEST(Eigensolver, SeedInvariance) {
  const GridPtr g = build_grid(GridSpec::interval(0.0, 1.0, 96));
  const Exponents e(3.0, 2.0);
  SolverConfig a, b;
  a.seed = 1;
  b.seed = 99;
  const EigenPair pa = solve_eigenpair(g, e, a);
  const EigenPair pb = solve_eigenpair(g, e, b);
  EXPECT_LT(rel_diff(pa.lambda1, pb.lambda1), 1e-8);
  EXPECT_LT((pa.phi1.values() - pb.phi1.values()).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Eigensolver, DiscreteMinimality) {
  const EigenPair& pair = pair_1d(3.0, 2.0);
  const Exponents e(3.0, 2.0);
  for (int k = 0; k < 200; ++k) {
    const GridFunction u = sample_test_function(pair.grid_ptr(), k, static_cast<SampleStyle>(k % 3));
    EXPECT_GE(rayleigh(u, e), pair.lambda1 * (1.0 - 1e-12));
  }
}

TEST(Eigensolver, MonotoneUnderNestedRefinement) {
  const Exponents e(3.0, 2.0);
  double prev = std::numeric_limits<double>::infinity();
  for (int n : {16, 32, 64, 128}) {
    const double l = solve_eigenpair(build_grid(GridSpec::interval(0.0, 1.0, n)), e).lambda1;
    EXPECT_LE(l, prev + 1e-10 * prev) << n;
    prev = l;
  }
}

TEST(Eigensolver, NoConvergenceCarriesDiagnostics) {
  SolverConfig c;
  c.max_iterations = 1;
  c.max_newton = 0;
  c.tolerance = 1e-15;
  try {
    solve_eigenpair(build_grid(GridSpec::interval(0.0, 1.0, 64)), Exponents(3.0, 2.0), c);
    FAIL() << "expected no-convergence";
  } catch (const NoConvergence& e) {
    EXPECT_EQ(e.code(), ErrorCode::no_convergence);
    EXPECT_FALSE(e.diagnostics().converged);
    EXPECT_GE(e.diagnostics().iterations, 1);
    EXPECT_FALSE(e.diagnostics().residual_history.empty());
  }
}

TEST(Eigensolver, ConfigValidation) {
  SolverConfig c;
  c.tolerance = 0.0;
  EXPECT_THROW(c.validate(), Error);
  c = SolverConfig{};
  c.max_iterations = 0;
  EXPECT_THROW(c.validate(), Error);
  c = SolverConfig{};
  c.backtrack = 1.0;
  EXPECT_THROW(c.validate(), Error);
}

TEST(Shooting, LinearAndHomogeneousClosedForms) {
  const ShootingResult s = shooting_oracle_1d(0.0, 1.0, Exponents(2.0, 2.0));
  EXPECT_LT(rel_diff(s.lambda1, std::numbers::pi * std::numbers::pi), 1e-6);
  EXPECT_LT(rel_diff(homogeneous_lambda1_1d(1.0, 2.0), std::numbers::pi * std::numbers::pi), 1e-15);
  const ShootingResult s3 = shooting_oracle_1d(0.0, 1.0, Exponents(3.0, 3.0));
  EXPECT_LT(rel_diff(s3.lambda1, homogeneous_lambda1_1d(1.0, 3.0)), 1e-6);
  // scaling with the interval length: lambda ~ L^{-p} at p = q
  const ShootingResult s3l = shooting_oracle_1d(-1.0, 1.0, Exponents(3.0, 3.0));
  EXPECT_LT(rel_diff(s3l.lambda1, homogeneous_lambda1_1d(1.0, 3.0) / 8.0), 1e-6);
}

TEST(Shooting, FirstCrossingAndBracket) {
  const ShootingResult s = shooting_oracle_1d(0.0, 1.0, Exponents(3.0, 2.0));
  EXPECT_GT(s.lambda1, 0.0);
  EXPECT_LT(s.end_slope, 0.0);
  EXPECT_LE(s.bracket_lo, s.bracket_hi);
  EXPECT_GT(s.bisections, 0);
  for (std::size_t i = 1; i + 1 < s.samples.size(); ++i) EXPECT_GT(s.samples[i], 0.0);
  EXPECT_THROW(shooting_oracle_1d(1.0, 0.0, Exponents(3.0, 2.0)), Error);
}

TEST(Shooting, CrossValidatesVariationalSolver) {
  for (auto [p, q] : {std::pair{3.0, 2.0}, std::pair{4.0, 2.0}, std::pair{4.0, 3.0}}) {
    const double oracle = shooting_oracle_1d(0.0, 1.0, Exponents(p, q)).lambda1;
    EXPECT_LT(rel_diff(pair_1d(p, q, 256).lambda1, oracle), 1e-2) << p << "," << q;
  }
  const EigenPair p512 = solve_eigenpair(build_grid(GridSpec::interval(0.0, 1.0, 512)), Exponents(3.0, 3.0));
  EXPECT_LT(rel_diff(p512.lambda1, shooting_oracle_1d(0.0, 1.0, Exponents(3.0, 3.0)).lambda1), 1e-2);
}

TEST(Mu1, LinearCaseIsExact) {
  const EigenPair& pair = pair_1d(2.0, 2.0);
  const Mu1Result m = solve_mu1(pair, Exponents(2.0, 2.0));
  EXPECT_LT(rel_diff(m.mu1, pair.lambda1), 1e-10);
}

TEST(Mu1, EqualsLambdaAndAligns) {
  struct Case {
    const EigenPair* pair;
    Exponents exps;
  };
  for (const auto& [pair, e] : {Case{&pair_1d(3.0, 2.0), {3.0, 2.0}}, Case{&pair_2d(3.0, 2.0, 12), {3.0, 2.0}},
                                Case{&pair_1d(4.0, 3.0), {4.0, 3.0}}}) {
    const Mu1Result m = solve_mu1(*pair, e);
    EXPECT_GT(m.mu1, 0.0);
    EXPECT_LT(rel_diff(m.mu1, pair->lambda1), 2e-2);
    EXPECT_GE(m.alignment, 0.999);
    EXPECT_FALSE(m.v.is_zero());
    EXPECT_LT(rel_diff(mu_quotient(m.v, *pair, e), m.mu1), 1e-10);
  }
}

TEST(Mu1, KernelRestrictionExceedsLambda) {
  const EigenPair& pair = pair_1d(3.0, 2.0);
  const Exponents e(3.0, 2.0);
  const Vector r = LinearFunctional::bind(LinearFunctionalSpec::phi_power(1.0), pair).riesz();
  const Mu1Result m = solve_mu1_on_kernel(pair, e, r);
  EXPECT_GT(m.mu1, pair.lambda1 * 1.5);
  EXPECT_LT(std::abs(r.dot(m.v.values())), 1e-10 * r.norm() * m.v.values().norm());
}
