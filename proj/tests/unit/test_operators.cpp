#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fracvar/errors.hpp"
#include "fracvar/operators.hpp"
#include "oracles.hpp"

using namespace fracvar;

namespace {

constexpr double kInvGamma15 = 1.1283791670955126;   // 1 / Gamma(1.5)
constexpr double kInvSqrtPi = 0.5641895835477563;    // 1 / sqrt(pi)
// Left RL derivative of order 1/2 of x(1 - x) at 1/2, equal to the right
// one by symmetry: x^0.5/Gamma(1.5) - 2 x^1.5/Gamma(2.5).
constexpr double kRlMidpoint = 0.26596152026762179;
// Left RL integral of order 1/2 of exp at x = 1.
constexpr double kRlfiExp = 2.2906982523032382;

SampledFunction sample(const Grid& g, double (*f)(double)) { return SampledFunction::sample(g, f); }

SampledFunction random_function(const Grid& g, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(g.size());
  for (double& x : v) x = u(rng);
  return SampledFunction(g, v);
}

double max_abs_diff(const SampledFunction& a, const SampledFunction& b, std::size_t from = 0,
                    std::size_t trim = 0) {
  double d = 0.0;
  for (std::size_t k = from; k + trim < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

}  // namespace

TEST(OracleSelfCheck, QuadratureReproducesFrozenValues) {
  EXPECT_NEAR(oracle::rlfi_left([](double) { return 1.0; }, 0, 1, 0.5), kInvGamma15, 1e-13);
  EXPECT_NEAR(oracle::rlfi_right([](double) { return 1.0; }, 0, 1, 0.5), kInvGamma15, 1e-13);
  EXPECT_NEAR(oracle::rlfi_left([](double t) { return std::exp(t); }, 0, 1, 0.5), kRlfiExp, 1e-12);
  EXPECT_NEAR(oracle::caputo_left([](double) { return 1.0; }, 0, 1, 0.5), kInvGamma15, 1e-13);
  EXPECT_NEAR(oracle::caputo_right([](double) { return 1.0; }, 0, 1, 0.5), -kInvGamma15, 1e-13);
  EXPECT_NEAR(oracle::rl_left_fd([](double) { return 1.0; }, 0, 1, 0.5), kInvSqrtPi, 1e-8);
  EXPECT_NEAR(oracle::rl_left_fd([](double t) { return t * (1 - t); }, 0, 0.5, 0.5), kRlMidpoint,
              1e-8);
  EXPECT_NEAR(oracle::rl_right_fd([](double t) { return t * (1 - t); }, 0.5, 1, 0.5),
              kRlMidpoint, 1e-8);
}

TEST(Rlfi, ConstantOneAtRightEnd) {
  const Grid g(0, 1, 1001);
  const auto r = rlfi(Side::left, FracOrder(0.5), sample(g, [](double) { return 1.0; }));
  EXPECT_EQ(r[0], 0.0);
  EXPECT_NEAR(r[1000], kInvGamma15, 1e-12);
}

TEST(Rlfi, RightConstantOneAtLeftEnd) {
  const Grid g(0, 1, 1001);
  const auto r = rlfi(Side::right, FracOrder(0.5), sample(g, [](double) { return 1.0; }));
  EXPECT_EQ(r[1000], 0.0);
  EXPECT_NEAR(r[0], kInvGamma15, 1e-12);
}

TEST(Rlfi, ZeroInputGivesZero) {
  const Grid g(0, 1, 51);
  for (double q : {0.1, 0.5, 0.9}) {
    const auto r = rlfi(Side::left, FracOrder(q), SampledFunction(g));
    for (double v : r.values()) EXPECT_EQ(v, 0.0);
  }
}

TEST(Rlfi, SmoothFunctionAgainstQuadrature) {
  const Grid g(0, 1, 2001);
  const auto r = rlfi(Side::left, FracOrder(0.5), sample(g, [](double x) { return std::exp(x); }));
  EXPECT_NEAR(r[2000], kRlfiExp, 1e-6);
  const auto s = rlfi(Side::right, FracOrder(0.3), sample(g, [](double x) { return std::sin(3 * x); }));
  const double want = oracle::rlfi_right([](double t) { return std::sin(3 * t); }, 0.4, 1, 0.3);
  EXPECT_NEAR(s[800], want, 1e-6);
}

TEST(Cfd, ConstantIsAnnihilated) {
  const Grid g(0, 1, 101);
  const auto d = cfd(Side::left, FracOrder(0.5), sample(g, [](double) { return 3.7; }));
  for (double v : d.values()) EXPECT_EQ(v, 0.0);
}

TEST(Cfd, LinearFunctionBothSides) {
  const Grid g(0, 1, 1001);
  const auto f = sample(g, [](double x) { return x; });
  EXPECT_NEAR(cfd(Side::left, FracOrder(0.5), f)[1000], kInvGamma15, 1e-12);
  EXPECT_NEAR(cfd(Side::right, FracOrder(0.5), f)[0], -kInvGamma15, 1e-12);
}

TEST(Cfd, PowerRuleConvergesAtLeastFirstOrder) {
  auto err = [](std::size_t n) {
    const Grid g(0, 1, n);
    const auto d = cfd(Side::left, FracOrder(0.5), sample(g, [](double x) { return x * x; }));
    double e = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double x = g.node(k);
      if (x < 0.1 - 1e-12) continue;
      const double want = oracle::power_rule(2.0, 0.5, x);
      e = std::max(e, std::abs(d[k] - want) / want);
    }
    return e;
  };
  const double e1 = err(1001);
  const double e2 = err(2001);
  EXPECT_LE(e2, 1e-2);
  EXPECT_GE(std::log2(e1 / e2), 1.0);
}

TEST(Cfd, ClassicalLimitApproachesFirstDerivative) {
  const Grid g(0, 1, 2001);
  const auto d = cfd(Side::left, FracOrder(0.999), sample(g, [](double x) { return x * x; }));
  double e = 0.0;
  for (std::size_t k = 1; k + 1 < g.size(); ++k) e = std::max(e, std::abs(d[k] - 2 * g.node(k)));
  EXPECT_LE(e, 2e-2);
}

TEST(Cfd, RightSideAgainstQuadrature) {
  const Grid g(0, 2, 2001);
  const auto d = cfd(Side::right, FracOrder(0.4), sample(g, [](double x) { return std::cos(x); }));
  const double want = oracle::caputo_right([](double t) { return -std::sin(t); }, 0.5, 2, 0.4);
  EXPECT_NEAR(d[500], want, 1e-4);
}

TEST(Rlfd, ConstantOneLeft) {
  const Grid g(0, 1, 1001);
  const auto d = rlfd(Side::left, FracOrder(0.5), sample(g, [](double) { return 1.0; }));
  EXPECT_NEAR(d[1000], kInvSqrtPi, 1e-12);
  EXPECT_TRUE(d.singular(0));
  EXPECT_FALSE(d.singular(1));
}

TEST(Rlfd, EqualsCaputoWhenBoundaryValueVanishes) {
  const Grid g(0, 1, 501);
  const auto f = sample(g, [](double x) { return x; });
  const auto rl = rlfd(Side::left, FracOrder(0.5), f);
  const auto c = cfd(Side::left, FracOrder(0.5), f);
  for (std::size_t k = 0; k < g.size(); ++k) EXPECT_EQ(rl[k], c[k]);
}

TEST(Rlfd, SymmetricFunctionAgainstFiniteDifferenceOracle) {
  const Grid g(0, 1, 2001);
  const auto f = sample(g, [](double x) { return x * (1 - x); });
  EXPECT_NEAR(rlfd(Side::left, FracOrder(0.5), f)[1000], kRlMidpoint, 1e-3);
  EXPECT_NEAR(rlfd(Side::right, FracOrder(0.5), f)[1000], kRlMidpoint, 1e-3);
}

TEST(Rlfd, NonzeroRightBoundaryIsSingularAtB) {
  const Grid g(0, 1, 101);
  const auto d = rlfd(Side::right, FracOrder(0.3), sample(g, [](double x) { return 1.0 + x; }));
  EXPECT_TRUE(d.singular(100));
  EXPECT_FALSE(d.has_singular() && d.singular(0));
}

TEST(Combined, GammaOneAndZeroAreBitExact) {
  const Grid g(0, 1, 257);
  std::mt19937 rng(7);
  const FracOrder a(0.37);
  const FracOrder b(0.81);
  for (int i = 0; i < 5; ++i) {
    const auto f = random_function(g, rng);
    const auto l = cfd(Side::left, a, f);
    const auto r = cfd(Side::right, b, f);
    const auto c1 = combined_cfd(a, b, 1.0, f);
    const auto c0 = combined_cfd(a, b, 0.0, f);
    for (std::size_t k = 0; k < g.size(); ++k) {
      EXPECT_EQ(c1[k], l[k]);
      EXPECT_EQ(c0[k], r[k]);
    }
    const auto d1 = combined_rlfd(a, b, 1.0, f);
    const auto d0 = combined_rlfd(a, b, 0.0, f);
    const auto rr = rlfd(Side::right, a, f);
    const auto rl = rlfd(Side::left, b, f);
    for (std::size_t k = 0; k < g.size(); ++k) {
      EXPECT_TRUE(d1[k] == rr[k] || (std::isnan(d1[k]) && std::isnan(rr[k])));
      EXPECT_TRUE(d0[k] == rl[k] || (std::isnan(d0[k]) && std::isnan(rl[k])));
    }
  }
}

TEST(Combined, CaputoMidpointOfLinearVanishes) {
  const Grid g(0, 1, 1001);
  const auto c = combined_cfd(FracOrder(0.5), FracOrder(0.5), 0.5, sample(g, [](double x) { return x; }));
  EXPECT_NEAR(c[500], 0.0, 1e-3);
}

// For a symmetric g the two one-sided Riemann-Liouville derivatives agree at
// the midpoint, so their average is the one-sided value, not zero.
TEST(Combined, RiemannLiouvilleMidpointOfSymmetricFunction) {
  const Grid g(0, 1, 1001);
  const auto d = combined_rlfd(FracOrder(0.5), FracOrder(0.5), 0.5,
                               sample(g, [](double x) { return x * (1 - x); }));
  EXPECT_NEAR(d[500], kRlMidpoint, 1e-3);
  EXPECT_FALSE(d.singular(0));
  EXPECT_FALSE(d.singular(1000));
}

TEST(Combined, GammaOutsideUnitIntervalIsRejected) {
  const Grid g(0, 1, 11);
  const SampledFunction f(g);
  EXPECT_THROW(combined_cfd(FracOrder(0.5), FracOrder(0.5), 1.5, f), DomainError);
  EXPECT_THROW(combined_rlfd(FracOrder(0.5), FracOrder(0.5), -0.1, f), DomainError);
}

TEST(Operators, AreLinear) {
  const Grid g(0, 1, 201);
  std::mt19937 rng(11);
  const auto f = random_function(g, rng);
  const auto h = random_function(g, rng);
  const double c1 = 1.7;
  const double c2 = -0.4;
  std::vector<double> mix(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) mix[k] = c1 * f[k] + c2 * h[k];
  const SampledFunction m(g, mix);
  for (const char* name : {"rlfi-left", "rlfi-right", "rlfd-left", "rlfd-right", "cfd-left",
                           "cfd-right", "combined-cfd", "combined-rlfd"}) {
    const OperatorSpec spec{parse_operator_kind(name), FracOrder(0.3), FracOrder(0.6), 0.35};
    const auto of = apply(spec, f);
    const auto oh = apply(spec, h);
    const auto om = apply(spec, m);
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (std::isnan(om[k])) continue;
      EXPECT_NEAR(om[k], c1 * of[k] + c2 * oh[k], 1e-12 * (1 + std::abs(om[k]))) << name << k;
    }
  }
}

TEST(Operators, RightSideIsReflectedLeftSide) {
  const Grid g(-1, 2, 301);
  std::mt19937 rng(3);
  const auto f = random_function(g, rng);
  const FracOrder q(0.45);
  const auto rev = f.reversed();
  EXPECT_LE(max_abs_diff(rlfi(Side::right, q, f), rlfi(Side::left, q, rev).reversed()), 1e-12);
  EXPECT_LE(max_abs_diff(cfd(Side::right, q, f), cfd(Side::left, q, rev).reversed()), 1e-12);
  EXPECT_LE(max_abs_diff(rlfd(Side::right, q, f), rlfd(Side::left, q, rev).reversed(), 0, 1),
            1e-12);
}

TEST(Rlfi, SemigroupSpotCheck) {
  const Grid g(0, 1, 2001);
  const auto f = sample(g, [](double x) { return std::cos(2 * x) + x; });
  const auto twice = rlfi(Side::left, FracOrder(0.3), rlfi(Side::left, FracOrder(0.4), f));
  const auto once = rlfi(Side::left, FracOrder(0.7), f);
  EXPECT_LE(max_abs_diff(twice, once), 1e-3);
}

TEST(Matrix, ReproducesOperatorAndTranspose) {
  const Grid g(0, 1, 41);
  std::mt19937 rng(5);
  const auto f = random_function(g, rng);
  const auto v = random_function(g, rng);
  const FracOrder a(0.3);
  const FracOrder b(0.7);
  const auto m = combined_cfd_matrix(a, b, 0.6, g);
  const auto c = combined_cfd(a, b, 0.6, f);
  const auto t = combined_cfd_transpose(a, b, 0.6, g, v.values());
  const std::size_t n = g.size();
  for (std::size_t k = 0; k < n; ++k) {
    double row = 0.0;
    double col = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      row += m[k * n + j] * f[j];
      col += m[j * n + k] * v[j];
    }
    EXPECT_NEAR(row, c[k], 1e-12);
    EXPECT_NEAR(col, t[k], 1e-12);
  }
}

TEST(OperatorKind, NamesRoundTrip) {
  for (const char* name : {"rlfi-left", "rlfi-right", "rlfd-left", "rlfd-right", "cfd-left",
                           "cfd-right", "combined-cfd", "combined-rlfd"}) {
    EXPECT_EQ(to_string(parse_operator_kind(name)), name);
  }
  EXPECT_THROW(parse_operator_kind("cfd"), PreconditionError);
}
