#include <gtest/gtest.h>

#include <cfloat>
#include <sstream>

#include "gtest_util.hpp"
#include "sklc/centroid.hpp"
#include "support.hpp"

namespace sklc {
namespace {

using testing::class_of;
using testing::code_of;
using V = std::vector<double>;

double linf(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

TEST(MeanCentroid, PoolsCountsThenSmooths) {
  ClassCorpus one;
  one.raw_counts = {CountVector{{{0, 2}}, 2}};
  one.docs = {smooth_normalize(one.raw_counts[0], 2, {})};
  EXPECT_EQ(mean_centroid(one, {}).values(), (V{0.75, 0.25}));

  ClassCorpus two;
  two.raw_counts = {CountVector{{{0, 1}}, 1}, CountVector{{{1, 1}}, 1}};
  for (const auto& c : two.raw_counts) two.docs.push_back(smooth_normalize(c, 2, {}));
  EXPECT_EQ(mean_centroid(two, {}).values(), (V{0.5, 0.5}));

  ClassCorpus rejected;
  rejected.raw_counts = {CountVector{{{0, 3}, {1, 1}}, 4}, CountVector{{{0, 1}, {1, 3}}, 4}};
  rejected.docs = {Distribution(V{0.5, 0.5})};
  EXPECT_EQ(code_of([&] { mean_centroid(rejected, {0.0}); }), ErrorCode::InvalidConfig);
}

TEST(SklEnergy, Values) {
  const auto one = class_of({{0.3, 0.7}});
  EXPECT_EQ(skl_energy(V{0.3, 0.7}, one), 0.0);
  const auto pair = class_of({{0.3, 0.7}, {0.7, 0.3}});
  EXPECT_NEAR(skl_energy(V{0.5, 0.5}, pair), 0.338919144154881, 1e-12);
  EXPECT_EQ(code_of([] { skl_energy(V{0.5, 0.5}, ClassCorpus{}); }), ErrorCode::InsufficientData);
  EXPECT_EQ(code_of([&] { skl_energy(V{1.0, 0.0}, pair); }), ErrorCode::NonPositiveEntry);
}

TEST(SklObjective, MatchesDirectEnergyAndGradient) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 30;
    const auto c = testing::random_class(rng, n, 1 + rng() % 10);
    const SklObjective obj(c);
    const V rho = testing::random_interior(rng, n, 1e-3);
    const double direct = skl_energy(rho, c);
    EXPECT_NEAR(obj.energy(rho), direct, 1e-11 * std::max(1.0, direct));
    V g(n);
    obj.gradient(rho, g);
    const V direct_g = skl_energy_gradient(rho, c);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(g[i], direct_g[i], 1e-9 * std::max(1.0, std::abs(direct_g[i])));
  }
}

TEST(SklObjective, EnergyChangeMatchesDifferenceOfEnergies) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 30;
    const auto c = testing::random_class(rng, n, 1 + rng() % 10);
    const SklObjective obj(c);
    const V a = testing::random_interior(rng, n, 1e-3);
    const V b = testing::random_interior(rng, n, 1e-3);
    V g(n);
    obj.gradient(a, g);
    const double expected = testing::energy_oracle(c, b) - testing::energy_oracle(c, a);
    EXPECT_NEAR(obj.energy_change(a, g, b), expected, 1e-10 * std::max(1.0, std::abs(expected)));
  }
}

TEST(Gradient, Values) {
  const auto one = class_of({{0.25, 0.75}});
  const V at_doc = skl_energy_gradient(V{0.25, 0.75}, one);
  EXPECT_NEAR(at_doc[0], 0.0, 1e-15);
  EXPECT_NEAR(at_doc[1], 0.0, 1e-15);
  const V g = skl_energy_gradient(V{0.5, 0.5}, one);
  EXPECT_NEAR(g[0], 1.193147180559945, 1e-12);
  EXPECT_NEAR(g[1], -0.905465108108164, 1e-12);
}

TEST(Gradient, MatchesCentralDifferences) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 20;
    const auto c = testing::random_class(rng, n, 1 + rng() % 8);
    const V rho = testing::random_interior(rng, n, 1e-3);
    const V g = skl_energy_gradient(rho, c);
    for (std::size_t i = 0; i < n; ++i) {
      const double fd = testing::central_difference(c, rho, i, 1e-6);
      ASSERT_LE(std::abs(g[i] - fd), 1e-5 * std::max(std::abs(fd), 1.0)) << "i=" << i;
    }
  }
}

TEST(HessianDiag, ValuesAndPositivity) {
  const auto one = class_of({{0.5, 0.5}});
  const V h = hessian_diag(V{0.5, 0.5}, one);
  EXPECT_DOUBLE_EQ(h[0], 4.0);
  EXPECT_DOUBLE_EQ(h[1], 4.0);

  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng() % 20;
    const auto c = testing::random_class(rng, n, 1 + rng() % 5);
    for (double v : hessian_diag(testing::random_simplex(rng, n), c)) ASSERT_GT(v, 0.0);
  }
}

TEST(HessianDiag, MatchesSecondDifferences) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng() % 10;
    const auto c = testing::random_class(rng, n, 1 + rng() % 5);
    const V rho = testing::random_interior(rng, n, 1e-2);
    const V h = hessian_diag(rho, c);
    for (std::size_t i = 0; i < n; ++i) {
      const double fd = testing::second_difference(c, rho, i, 1e-4);
      ASSERT_LE(std::abs(h[i] - fd), 1e-4 * std::abs(fd)) << "i=" << i;
    }
  }
}

TEST(LineGraph, PathNeighbors) {
  const LineGraph g(4);
  EXPECT_EQ(g.neighbors(0), (std::vector<std::size_t>{1}));
  EXPECT_EQ(g.neighbors(2), (std::vector<std::size_t>{1, 3}));
  EXPECT_EQ(g.neighbors(3), (std::vector<std::size_t>{2}));
  EXPECT_EQ(g.edge_count(), 3u);
  EXPECT_TRUE(LineGraph(1).neighbors(0).empty());
}

TEST(FlowRhs, UpwindValue) {
  const auto one = class_of({{0.25, 0.75}});
  const V rhs = flow_rhs(V{0.5, 0.5}, one, LineGraph(2));
  // F = (1.193147, -0.905465), orientation 0 -> 1, weight rho_0 = 0.5.
  EXPECT_NEAR(rhs[0], -1.049306144334055, 1e-12);
  EXPECT_NEAR(rhs[1], 1.049306144334055, 1e-12);
  const V zero = flow_rhs(V{0.25, 0.75}, one, LineGraph(2));
  EXPECT_NEAR(zero[0], 0.0, 1e-15);
  EXPECT_NEAR(zero[1], 0.0, 1e-15);
}

TEST(FlowRhs, UpwindUsesHigherGradientEndpoint) {
  // Reversing the document reverses the orientation; the weight follows.
  const auto one = class_of({{0.75, 0.25}});
  const V rhs = flow_rhs(V{0.5, 0.5}, one, LineGraph(2));
  EXPECT_NEAR(rhs[0], 1.049306144334055, 1e-12);

  const auto three = class_of({{0.2, 0.5, 0.3}});
  const V rho{0.5, 0.2, 0.3};
  const V g = skl_energy_gradient(rho, three);
  const V r = flow_rhs(rho, three, LineGraph(3));
  const double f01 = (g[0] > g[1] ? rho[0] : rho[1]) * (g[0] - g[1]);
  const double f12 = (g[1] > g[2] ? rho[1] : rho[2]) * (g[1] - g[2]);
  EXPECT_DOUBLE_EQ(r[0], -f01);
  EXPECT_DOUBLE_EQ(r[1], f01 - f12);
  EXPECT_DOUBLE_EQ(r[2], f12);
}

TEST(FlowRhs, ConservesMass) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + rng() % 49;
    const auto c = testing::random_class(rng, n, 1 + rng() % 20);
    const V rho = testing::random_interior(rng, n, 1e-3);
    const V rhs = flow_rhs(rho, c, LineGraph(n));
    ASSERT_LE(std::abs(static_cast<double>(testing::exact_sum(rhs))), 1e-14);
  }
}

TEST(SolveFlow, OneDocumentIsItsOwnCentroid) {
  const auto one = class_of({{0.1, 0.2, 0.7}});
  const auto r = solve_flow(one);
  EXPECT_TRUE(r.trace.converged);
  EXPECT_LE(linf(r.centroid, one.docs[0]), 1e-9);
  EXPECT_LE(r.trace.final_energy, 1e-12);
}

TEST(SolveFlow, SymmetricPair) {
  const auto r = solve_flow(class_of({{0.3, 0.7}, {0.7, 0.3}}));
  EXPECT_NEAR(r.centroid[0], 0.5, 1e-6);
  EXPECT_NEAR(r.centroid[1], 0.5, 1e-6);
}

TEST(SolveFlow, TwoDocCentroidDiffersFromMean) {
  // Oracle: 30-digit root of the projected gradient, 0.294936270433917.
  const auto r = solve_flow(class_of({{0.2, 0.8}, {0.4, 0.6}}));
  EXPECT_NEAR(r.centroid[0], 0.294936270433917, 1e-6);
  EXPECT_NEAR(r.centroid[1], 0.705063729566083, 1e-6);
  EXPECT_GT(std::abs(r.centroid[0] - 0.3), 1e-3);
}

TEST(SolveFlow, TraceInvariants) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng() % 40;
    const auto c = testing::random_class(rng, n, 1 + rng() % 10);
    FlowConfig cfg;
    cfg.record_history = true;
    const auto r = solve_flow(c, LineGraph(n), cfg);
    ASSERT_TRUE(r.trace.converged);
    ASSERT_EQ(r.trace.history.size(), r.trace.iterations);
    double prev = r.trace.initial_energy;
    for (const auto& s : r.trace.history) {
      ASSERT_LE(s.energy, prev);
      ASSERT_LE(s.mass_drift, s.step * 1e-14 + static_cast<double>(n) * DBL_EPSILON);
      prev = s.energy;
    }
    EXPECT_NEAR(static_cast<double>(testing::exact_sum(r.centroid.values())), 1.0, 1e-12);
    EXPECT_NEAR(r.trace.final_energy, skl_energy(r.centroid, c), 1e-9);
  }
}

TEST(SolveFlow, Errors) {
  const auto c = class_of({{0.2, 0.8}, {0.4, 0.6}});
  FlowConfig tight;
  tight.max_iters = 1;
  tight.tol_energy = 1e-300;
  EXPECT_EQ(code_of([&] { solve_flow(c, tight); }), ErrorCode::MaxIters);
  FlowConfig bad;
  bad.pos_floor = 0.6;
  EXPECT_EQ(code_of([&] { solve_flow(c, bad); }), ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of([&] { solve_flow(c, LineGraph(3)); }), ErrorCode::DimensionMismatch);
  EXPECT_EQ(code_of([] { solve_flow(ClassCorpus{}); }), ErrorCode::InsufficientData);
}

TEST(SolveFlow, TraceCsv) {
  FlowConfig cfg;
  cfg.record_history = true;
  const auto r = solve_flow(class_of({{0.2, 0.8}, {0.4, 0.6}}), cfg);
  std::ostringstream out;
  write_trace_csv(out, r.trace);
  const std::string s = out.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), "iter,energy,max_rhs,step");
  EXPECT_EQ(static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')), r.trace.iterations + 1);
}

TEST(SolveDual, Examples) {
  const auto one = class_of({{0.1, 0.2, 0.7}});
  EXPECT_LE(linf(solve_dual(one).centroid, one.docs[0]), 1e-12);
  const auto sym = solve_dual(class_of({{0.3, 0.7}, {0.7, 0.3}}));
  EXPECT_NEAR(sym.centroid[0], 0.5, 1e-12);
  const auto two = solve_dual(class_of({{0.2, 0.8}, {0.4, 0.6}}));
  EXPECT_NEAR(two.centroid[0], 0.294936270433917, 1e-12);
  EXPECT_LE(two.dual.max_residual, 1e-12);
  EXPECT_LE(two.dual.mass_error, 1e-12);
}

TEST(SolveDual, StationaryAndAgreesWithFlow) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + rng() % 49;
    const auto c = testing::random_class(rng, n, 1 + rng() % 20);
    const auto dual = solve_dual(c);
    V g = skl_energy_gradient(dual.centroid, c);
    double mean = 0.0;
    for (double v : g) mean += v;
    mean /= static_cast<double>(n);
    for (double v : g) ASSERT_LE(std::abs(v - mean), 1e-8);
    ASSERT_LE(linf(solve_flow(c).centroid, dual.centroid), 1e-6);
  }
}

TEST(OneDocDegeneracy, AllEstimatorsAgree) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng() % 30;
    const auto c = testing::random_class(rng, n, 1, 6);
    const Distribution& doc = c.docs[0];
    EXPECT_LE(linf(mean_centroid(c, {}), doc), 1e-9);
    EXPECT_LE(linf(solve_flow(c).centroid, doc), 1e-9);
    EXPECT_LE(linf(solve_dual(c).centroid, doc), 1e-9);
  }
}

}  // namespace
}  // namespace sklc
