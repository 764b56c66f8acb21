#include <gtest/gtest.h>

#include <cmath>

#include "latentdyn/rng.hpp"

using latentdyn::Rng;

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    EXPECT_EQ(x, b.next());
    EXPECT_NE(x, c.next());
  }
}

TEST(Rng, KnownFirstOutputs) {
  // splitmix64 from 0 gives this first word
  std::uint64_t s = 0;
  EXPECT_EQ(latentdyn::splitmix64(s), 0xE220A8397B1DCDAFull);
}

TEST(Rng, UniformMomentsAndRange) {
  Rng r(1);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sq += u * u;
  }
  EXPECT_NEAR(sum / n, 0.5, 0.005);
  EXPECT_NEAR(sq / n - (sum / n) * (sum / n), 1.0 / 12.0, 0.002);
}

TEST(Rng, NormalMoments) {
  Rng r(2);
  double sum = 0.0, sq = 0.0, quad = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    sum += z;
    sq += z * z;
    quad += z * z * z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.01);
  EXPECT_NEAR(quad / n, 3.0, 0.06);
}

TEST(Rng, BelowIsUnbiasedAndBounded) {
  Rng r(3);
  std::vector<int> hist(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const auto k = r.below(7);
    ASSERT_LT(k, 7u);
    ++hist[k];
  }
  for (int h : hist) EXPECT_NEAR(h, 10000, 400);
}

TEST(Rng, SplitStreamsAreDistinctAndStable) {
  const Rng parent(9);
  auto a = parent.split(1), b = parent.split(2), a2 = parent.split(1);
  EXPECT_EQ(a.next(), a2.next());
  EXPECT_NE(a.next(), b.next());
}

TEST(Rng, UnitVector) {
  Rng r(4);
  for (std::size_t n : {1u, 2u, 8u, 64u}) {
    const auto v = r.unit_vector(n);
    double s = 0.0;
    for (double x : v) s += x * x;
    EXPECT_NEAR(std::sqrt(s), 1.0, 1e-12);
  }
}
