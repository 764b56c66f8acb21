#include <gtest/gtest.h>

#include <cmath>

#include "expect_error.hpp"
#include "latentdyn/dynamics.hpp"
#include "latentdyn/operator_spec.hpp"
#include "latentdyn/rng.hpp"

using namespace latentdyn;

namespace {

// F(a) = a - 0.5 tanh(a) + b; fixed point atanh(2b) per coordinate.
UpdateOperator soft_residual(std::size_t d, double b) {
  return UpdateOperator::residual_mlp(Matrix::identity(d), [&] {
    Matrix w2(d, d);
    for (std::size_t i = 0; i < d; ++i) w2(i, i) = -0.5;
    return w2;
  }(), std::vector<double>(d, b));
}

Matrix random_matrix(Rng& rng, std::size_t r, std::size_t c, double scale) {
  Matrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = scale * rng.normal();
  return m;
}

}  // namespace

TEST(Iterate, AffineReachesCenter) {
  const auto op = UpdateOperator::affine({3.0, -1.0}, 0.5);
  const std::vector<double> a0 = {0.0, 0.0};
  const auto r = iterate(op, a0, 1000, 1e-10);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.final_step_norm, 1e-10);
  EXPECT_LE(distance(r.point, std::vector<double>{3.0, -1.0}), 1e-9);
  EXPECT_EQ(r.lipschitz_estimate, 0.5);
  EXPECT_FALSE(r.non_contractive);
}

TEST(Iterate, GeometricDecay) {
  const std::vector<double> c = {1.0, 2.0, -3.0, 0.5};
  const std::vector<double> a0 = {-4.0, 7.0, 2.0, 1.0};
  for (double lambda : {0.1, 0.5, 0.9}) {
    const auto r = iterate(UpdateOperator::affine(c, lambda), a0, 60, 1e-300, true);
    const double d0 = distance(a0, c);
    ASSERT_EQ(r.orbit.steps(), r.iterations + 1);
    for (std::size_t n = 0; n < r.orbit.steps(); ++n)
      EXPECT_NEAR(distance(r.orbit.row(n), c), std::pow(lambda, static_cast<double>(n)) * d0, 1e-9);
  }
}

TEST(Iterate, IdentityFlaggedNonContractive) {
  const auto op = UpdateOperator::affine({1.0, 1.0}, 1.0);
  const auto away = iterate(op, std::vector<double>{0.0, 5.0}, 50, 1e-10);
  EXPECT_TRUE(away.non_contractive);
  EXPECT_EQ(away.final_step_norm, 0.0);
  const auto at = iterate(op, std::vector<double>{1.0, 1.0}, 50, 1e-10);
  EXPECT_TRUE(at.non_contractive);
}

TEST(Iterate, ExpandingMapDiverges) {
  const auto op = UpdateOperator::affine({0.0}, 3.0);
  EXPECT_ERROR_CODE(iterate(op, std::vector<double>{1.0}, 1000, 1e-10), ErrorCode::Divergence);
}

TEST(Iterate, Preconditions) {
  const auto noisy = UpdateOperator::affine({0.0}, 0.5, 0.1);
  EXPECT_ERROR_CODE(iterate(noisy, std::vector<double>{1.0}, 10, 1e-10), ErrorCode::Precondition);
  const auto op = UpdateOperator::affine({0.0}, 0.5);
  EXPECT_ERROR_CODE(iterate(op, std::vector<double>{1.0}, 10, 0.0), ErrorCode::Precondition);
  EXPECT_ERROR_CODE(iterate(op, std::vector<double>{1.0, 2.0}, 10, 1e-3), ErrorCode::DimensionMismatch);
}

TEST(Iterate, ResidualMlpRestartsAgree) {
  const std::size_t d = 4;
  const double b = 0.1;
  const auto op = soft_residual(d, b);
  const double expected = std::atanh(2.0 * b);
  Rng rng(77);
  for (int k = 0; k < 100; ++k) {
    const auto dir = rng.unit_vector(d);
    const double r = rng.uniform();
    std::vector<double> a0(d);
    for (std::size_t j = 0; j < d; ++j) a0[j] = r * dir[j];
    const auto res = iterate(op, a0, 10000, 1e-12);
    ASSERT_TRUE(res.converged);
    for (double v : res.point) EXPECT_NEAR(v, expected, 1e-6);
    EXPECT_LT(res.lipschitz_estimate, 1.0);
  }
  EXPECT_LT(estimate_lipschitz(op, std::vector<double>(d, 0.0), 1.0, 64, 5), 1.0);
}

TEST(Lipschitz, AffineAndIdentity) {
  const std::vector<double> c = {0.5, -0.5, 2.0};
  const double half = estimate_lipschitz(UpdateOperator::affine(c, 0.5), c, 2.0, 32, 1);
  EXPECT_GE(half, 0.45);
  EXPECT_LE(half, 0.5 + 1e-9);
  const double one = estimate_lipschitz(UpdateOperator::affine({9.0, 9.0, 9.0}, 1.0), c, 1.0, 32, 2);
  EXPECT_GE(one, 0.95);
  EXPECT_LE(one, 1.0 + 1e-9);
}

TEST(Lipschitz, DeterministicPerSeed) {
  Rng rng(5);
  const auto op = UpdateOperator::residual_mlp(random_matrix(rng, 6, 3, 0.8), random_matrix(rng, 3, 6, 0.8),
                                               {0.1, 0.2, 0.3});
  const std::vector<double> c = {0.0, 0.0, 0.0};
  EXPECT_EQ(estimate_lipschitz(op, c, 1.0, 40, 9), estimate_lipschitz(op, c, 1.0, 40, 9));
  EXPECT_ERROR_CODE(estimate_lipschitz(op, c, 1.0, 1, 9), ErrorCode::Precondition);
  EXPECT_ERROR_CODE(estimate_lipschitz(op, c, 0.0, 8, 9), ErrorCode::Precondition);
}

TEST(Lipschitz, SubmultiplicativeOnMatchedRegions) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    Rng rng(seed);
    const std::size_t d = 2 + rng.below(4);
    const auto f = UpdateOperator::residual_mlp(random_matrix(rng, 5, d, 1.0), random_matrix(rng, d, 5, 1.0),
                                                rng.normal_vector(d));
    std::vector<double> gc = rng.normal_vector(d);
    const double rate = rng.uniform(0.2, 1.5);
    const auto g = UpdateOperator::affine(gc, rate);
    const auto c = rng.normal_vector(d);
    const double radius = rng.uniform(0.5, 2.0);
    const VectorMap fg = [&](std::span<const double> x) { return f(g(x)); };
    const double lhs = estimate_lipschitz(fg, c, radius, 24, seed);
    const double lg = estimate_lipschitz(g, c, radius, 24, seed);
    const auto gcenter = g(c);
    const double lf = estimate_lipschitz(f, gcenter, rate * radius, 24, seed);
    EXPECT_LE(lhs, lf * lg + 1e-6) << "seed " << seed;
  }
}

TEST(Simulate, NoiseFreeMatchesIterateOrbit) {
  const auto op = UpdateOperator::affine({1.0, -1.0, 0.0}, 0.8);
  const std::vector<double> a0 = {5.0, 5.0, 5.0};
  const auto sim = simulate_noisy(op, a0, 30, 123);
  const auto orbit = iterate(op, a0, 30, 1e-300, true).orbit;
  ASSERT_EQ(sim.steps(), 30u);
  for (std::size_t n = 0; n < 30; ++n)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(sim(n, j), orbit(n + 1, j));
}

TEST(Simulate, DeterministicPerSeed) {
  const auto op = UpdateOperator::affine(std::vector<double>(8, 0.0), 0.9, 0.05);
  const std::vector<double> a0(8, 0.0);
  EXPECT_EQ(simulate_noisy(op, a0, 500, 7), simulate_noisy(op, a0, 500, 7));
  EXPECT_NE(simulate_noisy(op, a0, 500, 7), simulate_noisy(op, a0, 500, 8));
  EXPECT_ERROR_CODE(simulate_noisy(op, a0, 1, 7), ErrorCode::Precondition);
}

TEST(Simulate, ConcentratesAroundCenter) {
  const double lambda = 0.9, sigma = 0.05;
  const std::vector<double> c(8, 2.0);
  const auto op = UpdateOperator::affine(c, lambda, sigma);
  for (std::uint64_t seed : {1u, 2u, 3u, 7u}) {
    const auto t = simulate_noisy(op, std::vector<double>(8, 0.0), 4096, seed);
    for (std::size_t n = 200; n < t.steps(); ++n) EXPECT_LE(distance(t.row(n), c), sigma * 10.0 / (1.0 - lambda));
  }
}

TEST(Simulate, ZeroRateIsIidAroundCenter) {
  const std::vector<double> c = {3.0, 3.0};
  const auto t = simulate_noisy(UpdateOperator::affine(c, 0.0, 0.5), std::vector<double>{100.0, 100.0}, 20000, 4);
  double m0 = 0.0, lag = 0.0, var = 0.0;
  for (std::size_t n = 0; n < t.steps(); ++n) m0 += t(n, 0);
  m0 /= static_cast<double>(t.steps());
  for (std::size_t n = 0; n < t.steps(); ++n) var += (t(n, 0) - m0) * (t(n, 0) - m0);
  for (std::size_t n = 1; n < t.steps(); ++n) lag += (t(n, 0) - m0) * (t(n - 1, 0) - m0);
  EXPECT_NEAR(m0, 3.0, 0.02);
  EXPECT_NEAR(lag / var, 0.0, 0.03);
}

TEST(CustomTable, InterpolatesAffineExactly) {
  // An affine map is multilinear, so interpolation reproduces it inside the grid.
  const std::vector<std::vector<double>> axes = {{-1.0, 0.0, 2.0}, {-2.0, 1.0}};
  std::vector<double> values;
  const std::vector<double> c = {0.5, -0.5};
  for (double x : axes[0])
    for (double y : axes[1]) {
      values.push_back(c[0] + 0.3 * (x - c[0]));
      values.push_back(c[1] + 0.3 * (y - c[1]));
    }
  const auto table = UpdateOperator::custom_table(axes, values);
  const auto affine = UpdateOperator::affine(c, 0.3);
  Rng rng(8);
  for (int i = 0; i < 50; ++i) {
    const std::vector<double> p = {rng.uniform(-1.0, 2.0), rng.uniform(-2.0, 1.0)};
    const auto a = table(p), b = affine(p);
    EXPECT_NEAR(a[0], b[0], 1e-12);
    EXPECT_NEAR(a[1], b[1], 1e-12);
  }
  // clamped outside
  const auto out = table(std::vector<double>{10.0, -10.0});
  const auto edge = table(std::vector<double>{2.0, -2.0});
  EXPECT_EQ(out, edge);
}

TEST(OperatorSpec, JsonRoundtripAllKinds) {
  Rng rng(3);
  const auto affine = UpdateOperator::affine({1.0, 2.0}, 0.9, 0.05);
  const auto mlp = UpdateOperator::residual_mlp(random_matrix(rng, 3, 2, 1.0), random_matrix(rng, 2, 3, 1.0),
                                                {0.1, -0.1}, 0.01);
  const auto table = UpdateOperator::custom_table({{0.0, 1.0}, {0.0, 1.0}}, {0, 0, 0, 1, 1, 0, 1, 1});
  for (const auto& op : {affine, mlp, table}) {
    SimulationSpec spec{op, {0.25, -0.25}, 100, 42};
    const auto j = to_json(spec);
    const auto back = simulation_spec_from_json(j);
    EXPECT_EQ(to_json(back), j);
    EXPECT_EQ(simulate_noisy(back.op, back.initial_state, 20, 1), simulate_noisy(op, spec.initial_state, 20, 1));
  }
}

TEST(OperatorSpec, RejectsBadInput) {
  using nlohmann::json;
  EXPECT_ERROR_CODE(simulation_spec_from_json(json{{"kind", "quadratic"}}), ErrorCode::ParseFailure);
  EXPECT_ERROR_CODE(simulation_spec_from_json(json{{"kind", "affine_contraction"}, {"rate", 0.5}}),
                    ErrorCode::ParseFailure);
  EXPECT_ERROR_CODE(simulation_spec_from_json(json{{"kind", "affine_contraction"},
                                                   {"rate", 0.5},
                                                   {"center", {0.0, 0.0}},
                                                   {"initial_state", {0.0}}}),
                    ErrorCode::DimensionMismatch);
  EXPECT_ERROR_CODE(simulation_spec_from_json(
                        json{{"kind", "affine_contraction"}, {"rate", 0.5}, {"center", {0.0}}, {"steps", -3}}),
                    ErrorCode::ParseFailure);
}
