#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "molab/io.hpp"
#include "molab/luxemburg.hpp"

using namespace molab;

namespace {

PiecewiseFunction chi(double a, double b, double v = 1.0) {
  return PiecewiseFunction::indicator(BoxSet::interval(a, b, true), v);
}

MOFunction square() { return make_orlicz_power(2.0, 1.0, default_example_domain()); }

}  // namespace

TEST(Norm, ClosedForms) {
  NormResult a = luxemburg_norm(make_phi1(), chi(1, 2));
  EXPECT_NEAR(a.value, std::log(2.0), 1e-6);
  EXPECT_LE(a.lo, std::log(2.0) + 1e-9);
  EXPECT_GE(a.hi, std::log(2.0) - 1e-9);
  EXPECT_EQ(a.membership, Membership::InE);
  EXPECT_TRUE(a.monotone);

  NormResult b = luxemburg_norm(square(), chi(0, 4));
  EXPECT_NEAR(b.value, 2.0, 1e-6);

  // t^p / p with p = 2: I(c chi / lambda) = |A| c^2 / (2 lambda^2).
  NormResult c = luxemburg_norm(make_variable_exponent(Descriptor::constant(2.0), default_example_domain()),
                                chi(0, 2, 3.0));
  EXPECT_NEAR(c.value, 3.0, 1e-6);
}

TEST(Norm, ZeroHasZeroBracket) {
  NormResult r = luxemburg_norm(make_phi2(8), PiecewiseFunction(1));
  EXPECT_EQ(r.value, 0.0);
  EXPECT_EQ(r.lo, 0.0);
  EXPECT_EQ(r.hi, 0.0);
  EXPECT_EQ(r.membership, Membership::InE);
}

TEST(Norm, HomogeneityAndTriangle) {
  MOFunction phi = make_phi1();
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> pos(0.2, 8.0), len(0.1, 1.0), val(-3.0, 3.0), scale(-4.0, 4.0);
  NormOptions opt;
  opt.probe_membership = false;
  for (int trial = 0; trial < 10; ++trial) {
    auto draw = [&] {
      double a = pos(rng), b = pos(rng);
      return chi(a, a + len(rng), val(rng)) + chi(-b - len(rng), -b, val(rng));
    };
    PiecewiseFunction f = draw(), g = draw();
    double c = scale(rng);
    double nf = luxemburg_norm(phi, f, opt).value, ng = luxemburg_norm(phi, g, opt).value;
    EXPECT_NEAR(luxemburg_norm(phi, f.scaled(c), opt).value, std::abs(c) * nf, 2e-6);
    EXPECT_LE(luxemburg_norm(phi, f + g, opt).value, nf + ng + 2e-6);
  }
}

TEST(Membership, Classes) {
  EXPECT_EQ(membership_probe(make_phi1(), chi(1, 2)), Membership::InE);
  EXPECT_EQ(membership_probe(make_phi1(), chi(-1, 1)), Membership::NotInL);
  // (e^t - 1) with f = 1.5 ln(1/x) on (0, 1): I(lambda f) is finite iff lambda < 2/3.
  PiecewiseFunction f = function_from_json(
      Json::parse(R"({"kind": "log_singular", "scale": 1.5, "point": 0.0,
                      "support": {"dim": 1, "closed": false, "boxes": [[0.0, 1.0]]}})"));
  EXPECT_EQ(membership_probe(make_orlicz_exp(default_example_domain()), f), Membership::InLOnly);
}

TEST(Norm, Phi2BumpIsNotInL) {
  SmoothTerm term{1.0, {Bump{Box::interval(0.45, 0.55), point1(0.05)}}};
  NormResult r = luxemburg_norm(make_phi2(8), PiecewiseFunction::smooth(1, {term}));
  EXPECT_TRUE(std::isinf(r.value));
  EXPECT_EQ(r.membership, Membership::NotInL);
}

TEST(Convergence, ScaledIndicators) {
  MOFunction phi = square();
  PiecewiseFunction f = chi(0, 1);
  std::vector<PiecewiseFunction> seq;
  for (int n = 1; n <= 64; n *= 2) seq.push_back(chi(0, 1, 1.0 - 1.0 / n));
  ConvergenceReport r = norm_modular_convergence_check(phi, f, seq, {0.5, 1.0, 2.0, 10.0}, 3e-2);
  ASSERT_EQ(r.rows.size(), seq.size());
  // ||chi / n|| = 1 / n for t^2 on a unit interval.
  EXPECT_NEAR(r.rows.back().norm, 1.0 / 64, 1e-6);
  EXPECT_TRUE(r.norms_vanish);
  EXPECT_TRUE(r.modulars_vanish);
  EXPECT_FALSE(r.violation);
}

TEST(Convergence, ShrinkingSupportsUnderPhi1) {
  MOFunction phi = make_phi1();
  std::vector<PiecewiseFunction> seq;
  for (int n = 1; n <= 1024; n *= 4) seq.push_back(chi(1, 1 + 1.0 / n));
  ConvergenceReport r = norm_modular_convergence_check(phi, PiecewiseFunction(1), seq, {0.5, 1.0, 2.0, 10.0}, 2e-2);
  EXPECT_TRUE(r.norms_vanish);
  EXPECT_TRUE(r.modulars_vanish);
  EXPECT_FALSE(r.violation);
  for (std::size_t i = 1; i < r.rows.size(); ++i) EXPECT_LT(r.rows[i].norm, r.rows[i - 1].norm);
}

TEST(Convergence, ConstantSequenceHasZeroRows) {
  MOFunction phi = make_phi1();
  PiecewiseFunction f = chi(1, 2);
  std::vector<PiecewiseFunction> seq(3, f);
  ConvergenceReport r = norm_modular_convergence_check(phi, f, seq);
  for (const ConvergenceRow& row : r.rows) {
    EXPECT_EQ(row.norm, 0.0);
    for (double m : row.modulars) EXPECT_EQ(m, 0.0);
  }
}
