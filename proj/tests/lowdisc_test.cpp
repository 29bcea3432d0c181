#include <algorithm>
#include <bit>
#include <cmath>
#include <set>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "sqmc/errors.hpp"
#include "sqmc/lowdisc.hpp"

namespace {

using sqmc::ScrambleState;
using sqmc::sobol_block;
using sqmc::SobolSpec;

// Radical inverse by explicit digit loop.
double radical_inverse(std::uint64_t n) {
  double x = 0.0, f = 0.5;
  while (n) {
    x += f * static_cast<double>(n & 1);
    n >>= 1;
    f *= 0.5;
  }
  return x;
}

// Sobol by direct definition: x_n = XOR over set bits k of n of v_k.
std::vector<double> sobol_direct(const sqmc::SobolTable& table, std::size_t dim, std::uint64_t n) {
  std::vector<double> out;
  for (std::size_t j = 0; j < dim; ++j) {
    std::uint32_t acc = 0;
    for (int k = 0; k < 32; ++k)
      if ((n >> k) & 1) acc ^= table.directions(j)[k];
    out.push_back(acc * 0x1p-32);
  }
  return out;
}

bool one_per_dyadic_interval(const sqmc::PointSet& pts, std::size_t col, int m) {
  const std::size_t cells = std::size_t{1} << m;
  std::vector<int> count(cells, 0);
  for (std::size_t i = 0; i < cells; ++i) ++count[static_cast<std::size_t>(pts(i, col) * cells)];
  return std::all_of(count.begin(), count.end(), [](int c) { return c == 1; });
}

TEST(VanDerCorput, FirstValues) {
  EXPECT_EQ(sqmc::van_der_corput(1), 0.5);
  EXPECT_EQ(sqmc::van_der_corput(2), 0.25);
  EXPECT_EQ(sqmc::van_der_corput(3), 0.75);
  EXPECT_THROW(sqmc::van_der_corput(0), std::invalid_argument);
}

TEST(VanDerCorput, MatchesRadicalInverse) {
  for (std::uint64_t n = 1; n < 5000; ++n) EXPECT_EQ(sqmc::van_der_corput(n), radical_inverse(n));
}

TEST(SobolBlock, FirstDimensionIsVanDerCorput) {
  const auto pts = sobol_block(SobolSpec{1}, std::nullopt, 3, 1);
  std::multiset<double> got{pts(0, 0), pts(1, 0), pts(2, 0)};
  EXPECT_EQ(got, (std::multiset<double>{0.5, 0.25, 0.75}));
  const auto many = sobol_block(SobolSpec{1}, std::nullopt, 1024);
  EXPECT_EQ(many(0, 0), 0.0);
  for (std::size_t n = 1; n < 1024; ++n) EXPECT_EQ(many(n, 0), radical_inverse(n));
}

TEST(SobolBlock, MatchesDirectDefinition) {
  const auto table = sqmc::SobolTable::bundled();
  const auto pts = sobol_block(SobolSpec{12}, std::nullopt, 300, 17);
  for (std::size_t i = 0; i < 300; ++i) {
    const auto ref = sobol_direct(*table, 12, 17 + i);
    for (std::size_t j = 0; j < 12; ++j) ASSERT_EQ(pts(i, j), ref[j]) << i << "," << j;
  }
}

TEST(SobolBlock, KnownSecondDimension) {
  // Dimension 2 has every direction integer equal to 1: points 0, 1/2, 3/4, 1/4, ...
  const auto pts = sobol_block(SobolSpec{2}, std::nullopt, 4);
  EXPECT_EQ(pts(1, 1), 0.5);
  EXPECT_EQ(pts(2, 1), 0.75);
  EXPECT_EQ(pts(3, 1), 0.25);
}

TEST(SobolBlock, UnscrambledStratification) {
  const auto pts = sobol_block(SobolSpec{40}, std::nullopt, 256);
  for (int m = 0; m <= 8; ++m)
    for (std::size_t j = 0; j < 40; ++j) EXPECT_TRUE(one_per_dyadic_interval(pts, j, m)) << j << " m=" << m;
}

TEST(SobolBlock, ScrambledStratification) {
  for (std::uint64_t seed : {1ULL, 2ULL, 99ULL}) {
    const auto pts = sobol_block(SobolSpec{30}, ScrambleState{seed}, 256);
    for (int m = 0; m <= 8; ++m)
      for (std::size_t j = 0; j < 30; ++j)
        EXPECT_TRUE(one_per_dyadic_interval(pts, j, m)) << "seed " << seed << " j " << j << " m " << m;
  }
}

TEST(SobolBlock, ScrambledTwoDimensionalNetProperty) {
  // Dimensions 1 and 2 form a (0,2)-sequence: every 2^a x 2^b box with a+b = m
  // holds exactly one of the first 2^m points, scrambled or not.
  const auto pts = sobol_block(SobolSpec{2}, ScrambleState{5}, 256);
  for (int a = 0; a <= 8; ++a) {
    const int b = 8 - a;
    std::vector<int> count(256, 0);
    for (std::size_t i = 0; i < 256; ++i) {
      const auto x = static_cast<std::size_t>(pts(i, 0) * (1 << a));
      const auto y = static_cast<std::size_t>(pts(i, 1) * (1 << b));
      ++count[(x << b) | y];
    }
    EXPECT_TRUE(std::all_of(count.begin(), count.end(), [](int c) { return c == 1; })) << a;
  }
}

TEST(SobolBlock, ScrambledMarginalUniformity) {
  const std::size_t n = 1 << 13;
  const auto pts = sobol_block(SobolSpec{8}, ScrambleState{123}, n);
  for (std::size_t j = 0; j < 8; ++j) {
    auto col = pts.column(j);
    std::sort(col.begin(), col.end());
    double sup = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      sup = std::max({sup, std::abs(col[i] - double(i) / n), std::abs(col[i] - double(i + 1) / n)});
    EXPECT_LT(sup, 0.02) << j;
  }
}

TEST(SobolBlock, ScrambledPointsInUnitInterval) {
  const auto pts = sobol_block(SobolSpec{5}, ScrambleState{7}, 4096);
  for (const double x : pts.data()) {
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
  }
}

TEST(SobolBlock, Reproducible) {
  const auto a = sobol_block(SobolSpec{6}, ScrambleState{42}, 500, 3);
  const auto b = sobol_block(SobolSpec{6}, ScrambleState{42}, 500, 3);
  EXPECT_EQ(a, b);
  const auto c = sobol_block(SobolSpec{6}, ScrambleState{43}, 500, 3);
  bool differs = false;
  for (std::size_t j = 0; j < 6; ++j) differs |= a(0, j) != c(0, j);
  EXPECT_TRUE(differs);
}

TEST(SobolBlock, SkipSelectsRows) {
  const auto whole = sobol_block(SobolSpec{3}, ScrambleState{9}, 64);
  const auto tail = sobol_block(SobolSpec{3}, ScrambleState{9}, 32, 32);
  for (std::size_t i = 0; i < 32; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(whole(32 + i, j), tail(i, j));
}

TEST(SobolBlock, StepStatesDiffer) {
  const auto s1 = ScrambleState::for_step(1, 1), s2 = ScrambleState::for_step(1, 2);
  EXPECT_NE(s1.seed, s2.seed);
  EXPECT_EQ(s1.seed, ScrambleState::for_step(1, 1).seed);
}

TEST(SobolTable, BundledCapacityAndLeadingBits) {
  const auto table = sqmc::SobolTable::bundled();
  EXPECT_GE(table->max_dimension(), 1024u);
  for (std::size_t j = 0; j < table->max_dimension(); ++j) {
    const auto& v = table->directions(j);
    for (int k = 0; k < 32; ++k) {
      // v_k = m_k / 2^(k+1) with m_k odd: bit 31-k is the leading bit.
      ASSERT_TRUE((v[k] >> (31 - k)) & 1u) << "dim " << j << " k " << k;
    }
  }
  EXPECT_THROW(table->directions(table->max_dimension()), sqmc::CapacityError);
}

TEST(SobolTable, ParseRejectsBadInput) {
  std::istringstream even("1 0 0\n2 1 0 2\n");
  EXPECT_THROW(sqmc::SobolTable::parse(even), std::invalid_argument);
  std::istringstream gap("1 0 0\n3 1 0 1\n");
  EXPECT_THROW(sqmc::SobolTable::parse(gap), std::invalid_argument);
  std::istringstream ok("# comment\n1 0 0\n2 1 0 1\n");
  EXPECT_EQ(sqmc::SobolTable::parse(ok).max_dimension(), 2u);
}

TEST(SobolSpec, Validation) {
  EXPECT_THROW((SobolSpec{0}.validate()), std::invalid_argument);
  EXPECT_THROW((SobolSpec{5000}.validate()), sqmc::CapacityError);
  EXPECT_THROW(sobol_block(SobolSpec{5000}, std::nullopt, 4), sqmc::CapacityError);
  SobolSpec bad{2};
  bad.bits = 33;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

}  // namespace
