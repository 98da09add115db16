#include <gtest/gtest.h>

#include <cmath>
#include <deque>
#include <random>

#include "molab/error.hpp"
#include "molab/rational.hpp"

using namespace molab;

namespace {

struct Frac {
  long long p, q;
};

// Breadth-first Calkin-Wilf tree; the rationals below 1 are the left
// children, visited in index order.
std::vector<Frac> brute_unit_rationals(std::size_t count) {
  std::vector<Frac> out;
  std::deque<Frac> queue{{1, 1}};
  while (out.size() < count) {
    Frac f = queue.front();
    queue.pop_front();
    Frac left{f.p, f.p + f.q}, right{f.p + f.q, f.q};
    out.push_back(left);
    queue.push_back(left);
    queue.push_back(right);
  }
  return out;
}

}  // namespace

TEST(UnitRational, FirstTerms) {
  const std::vector<std::pair<int, int>> expected{{1, 2}, {1, 3}, {2, 3}, {1, 4}, {3, 5}, {2, 5}, {3, 4}};
  for (std::size_t i = 0; i < expected.size(); ++i) {
    Rational r = unit_rational(i + 1);
    EXPECT_EQ(r.num, expected[i].first);
    EXPECT_EQ(r.den, expected[i].second);
  }
}

TEST(UnitRational, MatchesBreadthFirstTree) {
  auto brute = brute_unit_rationals(5000);
  for (std::size_t i = 0; i < brute.size(); ++i) {
    Rational r = unit_rational(i + 1);
    ASSERT_EQ(r.num, brute[i].p) << "index " << i + 1;
    ASSERT_EQ(r.den, brute[i].q) << "index " << i + 1;
  }
}

TEST(UnitRational, MatchesSuccessorEnumeration) {
  UnitRationalSequence seq;
  for (int n = 1; n <= 5000; ++n) ASSERT_EQ(seq.next(), unit_rational(n)) << "index " << n;
}

TEST(UnitRational, InverseRoundTrip) {
  for (int n = 1; n <= 3000; ++n) ASSERT_EQ(unit_rational_index(unit_rational(n)), BigInt(n));
  BigInt big = (BigInt(1) << 200) + 12345;
  EXPECT_EQ(unit_rational_index(unit_rational(big)), big);
}

TEST(UnitRational, InverseRejectsInvalid) {
  EXPECT_THROW(unit_rational_index(Rational{2, 4}), PreconditionError);
  EXPECT_THROW(unit_rational_index(Rational{3, 2}), PreconditionError);
  EXPECT_THROW(unit_rational_index(Rational{0, 1}), PreconditionError);
  EXPECT_THROW(unit_rational(0), PreconditionError);
}

TEST(Rational, DirectedRounding) {
  for (int n = 1; n <= 500; ++n) {
    Rational r = unit_rational(n);
    double lo = r.round_down(), hi = r.round_up();
    EXPECT_LE(lo, hi);
    if (lo != hi) {
      EXPECT_EQ(std::nextafter(lo, 1.0), hi);
    }
  }
  EXPECT_EQ(Rational({1, 4}).round_down(), 0.25);
  EXPECT_EQ(Rational({1, 4}).round_up(), 0.25);
  EXPECT_LT(Rational({1, 3}).round_down(), Rational({1, 3}).round_up());
  EXPECT_EQ(Rational({1, 3}).str(), "1/3");
}

TEST(LeastIndexRational, KnownIntervals) {
  EXPECT_EQ(least_index_rational(0.45, 0.55), (Rational{1, 2}));
  EXPECT_EQ(least_index_rational(0.29, 0.31), (Rational{3, 10}));
  // double(0.01) lies just above 1/100.
  EXPECT_EQ(least_index_rational(0.0, 0.01), (Rational{1, 100}));
  EXPECT_EQ(least_index_rational(0.99, 1.0), (Rational{99, 100}));
  EXPECT_THROW(least_index_rational(0.5, 0.5), PreconditionError);
  EXPECT_THROW(least_index_rational(-0.1, 0.5), PreconditionError);
}

TEST(LeastIndexRational, MatchesBruteForceScan) {
  auto brute = brute_unit_rationals(1 << 16);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> pos(0.0, 1.0), width(0.002, 0.2);
  int checked = 0;
  for (int trial = 0; trial < 400; ++trial) {
    double a = pos(rng), b = std::min(1.0, a + width(rng));
    if (!(b > a)) continue;
    for (const Frac& f : brute) {
      // Random endpoints never sit within rounding distance of p/q.
      long double p = f.p, q = f.q;
      if (p > static_cast<long double>(a) * q && p < static_cast<long double>(b) * q) {
        Rational r = least_index_rational(a, b);
        EXPECT_EQ(r.num, f.p) << a << " " << b;
        EXPECT_EQ(r.den, f.q) << a << " " << b;
        ++checked;
        break;
      }
    }
  }
  EXPECT_GT(checked, 300);
}
