#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "molab/density.hpp"
#include "molab/error.hpp"

using namespace molab;

namespace {

constexpr double kPi = 3.14159265358979323846;

PiecewiseFunction chi(double a, double b, double v = 1.0) {
  return PiecewiseFunction::indicator(BoxSet::interval(a, b, true), v);
}

PiecewiseFunction bump(double lo, double hi, double ramp, double height = 1.0) {
  return PiecewiseFunction::smooth(1, {SmoothTerm{height, {Bump{Box::interval(lo, hi), point1(ramp)}}}});
}

SingularSetEstimate singular(const MOFunction& phi, const BoxSet& omega) {
  return estimate_singular_set(phi, omega, 1e-2);
}

void expect_trace_properties(const ApproximationTrace& tr, int n_limit) {
  ASSERT_FALSE(tr.steps.empty());
  EXPECT_TRUE(tr.converged) << tr.status;
  EXPECT_LE(tr.steps.back().dist.value, tr.tol);
  EXPECT_LE(static_cast<int>(tr.steps.size()), n_limit);
  for (std::size_t i = 0; i < tr.steps.size(); ++i) {
    const TraceStep& s = tr.steps[i];
    EXPECT_TRUE(s.containments_ok) << "n=" << s.n << " " << s.containment_note;
    EXPECT_TRUE(s.f_n.is_smooth());
    if (s.n > 2 && i > 0) {
      EXPECT_LE(s.dist.lo, tr.steps[i - 1].dist.hi) << "n=" << s.n;
    }
  }
}

}  // namespace

TEST(Urysohn, Profile) {
  PiecewiseFunction f = smooth_urysohn(BoxSet::interval(1, 2, true), BoxSet::interval(0.5, 2.5, false));
  EXPECT_EQ(f(point1(1.5)), 1.0);
  EXPECT_EQ(f(point1(1.0)), 1.0);
  double v = f(point1(0.75));
  EXPECT_GT(v, 0.0);
  EXPECT_LT(v, 1.0);
  EXPECT_EQ(f(point1(0.4)), 0.0);
  EXPECT_EQ(f(point1(2.6)), 0.0);
  EXPECT_TRUE(is_subset(f.support(), BoxSet::interval(0.5, 2.5, false)));
}

TEST(Urysohn, TwoPlateaus) {
  BoxSet k(1, true, {Box::interval(0, 1), Box::interval(3, 4)});
  PiecewiseFunction f = smooth_urysohn(k, BoxSet::interval(-1, 5, false));
  EXPECT_EQ(f(point1(0.5)), 1.0);
  EXPECT_EQ(f(point1(3.5)), 1.0);
  for (double x = -2.0; x <= 6.0; x += 0.01) {
    EXPECT_GE(f(point1(x)), 0.0);
    EXPECT_LE(f(point1(x)), 1.0);
  }
}

TEST(Urysohn, RequiresContainment) {
  EXPECT_THROW(smooth_urysohn(BoxSet::interval(1, 3, true), BoxSet::interval(0, 2, false)), PreconditionError);
}

TEST(Approximation, Phi1Indicator) {
  MOFunction phi = make_phi1();
  const BoxSet omega = BoxSet::interval(-10, 10, false);
  ApproximationTrace tr = approximate_indicator(phi, BoxSet::interval(1, 2, true), omega, singular(phi, omega));
  expect_trace_properties(tr, 32);
  for (const TraceStep& s : tr.steps) {
    EXPECT_TRUE(is_subset(s.k_n, BoxSet::interval(1, 2, true)));
    EXPECT_GE(s.m_n, 1);
    EXPECT_LE(s.shell_volume, std::ldexp(1.0, 1 - s.m_n) + 1e-12);
  }
}

TEST(Approximation, IndicatorNotInLIsRefused) {
  MOFunction phi = make_phi1();
  const BoxSet omega = BoxSet::interval(-10, 10, false);
  try {
    approximate_indicator(phi, BoxSet::interval(-1, 1, true), omega, singular(phi, omega));
    FAIL() << "expected a precondition error";
  } catch (const PreconditionError& e) {
    EXPECT_NE(std::string(e.what()).find("not_in_L"), std::string::npos) << e.what();
  }
}

TEST(Approximation, Phi2IsRefused) {
  MOFunction phi = make_phi2(8);
  const BoxSet omega = BoxSet::interval(-2, 2, false);
  EXPECT_THROW(approximate_indicator(phi, BoxSet::interval(1.25, 1.5, true), omega, singular(phi, omega)),
               PreconditionError);
}

TEST(Approximation, SquareExponentTightTolerance) {
  MOFunction phi = make_variable_exponent(Descriptor::constant(2.0), default_example_domain());
  const BoxSet omega = BoxSet::interval(-10, 10, false);
  ApproximationOptions opt;
  opt.tol = 0.01;
  opt.n_max = 256;
  ApproximationTrace tr = approximate_indicator(phi, BoxSet::interval(0, 1, true), omega, singular(phi, omega), opt);
  expect_trace_properties(tr, 256);
}

TEST(Approximation, VariableExponent) {
  MOFunction phi = make_variable_exponent(Descriptor::sine(2.0, 1.0, 1.0, 0.0), BoxSet::interval(0, kPi, false));
  const BoxSet omega = BoxSet::interval(0, kPi, false);
  ApproximationTrace tr = approximate_indicator(phi, BoxSet::interval(1, 2, true), omega, singular(phi, omega));
  expect_trace_properties(tr, 32);
}

TEST(Approximation, SimpleFunctionInE) {
  MOFunction phi = make_variable_exponent(Descriptor::constant(2.0), default_example_domain());
  const BoxSet omega = BoxSet::interval(-10, 10, false);
  PiecewiseFunction f = chi(0, 1, 2.0) + chi(3, 4, -1.0);
  // The shell volume halves only as often as m_n grows, so the weighted
  // combination needs more steps than a single indicator.
  ApproximationOptions opt;
  opt.n_max = 256;
  ApproximationTrace tr = approximate_in_E(phi, f, omega, singular(phi, omega), opt);
  EXPECT_TRUE(tr.converged) << tr.status;
  EXPECT_EQ(tr.components.size(), 2u);
  EXPECT_LE(tr.steps.back().dist.value, tr.tol);
}

TEST(Approximation, ZeroFunction) {
  MOFunction phi = make_phi1();
  const BoxSet omega = BoxSet::interval(-10, 10, false);
  ApproximationTrace tr = approximate_in_E(phi, PiecewiseFunction(1), omega, singular(phi, omega));
  EXPECT_TRUE(tr.converged);
  for (const TraceStep& s : tr.steps) EXPECT_EQ(s.dist.value, 0.0);
}

TEST(Approximation, ComponentErrorNamesTheComponent) {
  MOFunction phi = make_phi1();
  const BoxSet omega = BoxSet::interval(-10, 10, false);
  PiecewiseFunction f = chi(2, 3, 1.0) + chi(-0.5, 0.5, 2.0);
  try {
    approximate_in_E(phi, f, omega, singular(phi, omega));
    FAIL() << "expected a precondition error";
  } catch (const PreconditionError& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("component"), std::string::npos) << msg;
    EXPECT_NE(msg.find("value 2"), std::string::npos) << msg;
  }
}

TEST(Witness, BumpOverRationalIsExcluded) {
  MOFunction phi = make_phi2(8);
  NondensityWitness w = witness_nondensity(phi, bump(0.45, 0.55, 0.05), BoxSet::interval(0.25, 0.5, true));
  ASSERT_EQ(w.kind, NondensityWitness::Kind::Excluded);
  ASSERT_TRUE(w.pole.exact.has_value());
  EXPECT_EQ(*w.pole.exact, (Rational{1, 2}));
  EXPECT_GE(w.min_on_ball, 0.25);
  EXPECT_TRUE(check_certificate(w.certificate));
}

TEST(Witness, SmallCandidateGetsDistanceBound) {
  MOFunction phi = make_phi2(8);
  NondensityWitness w = witness_nondensity(phi, PiecewiseFunction(1), BoxSet::interval(0.25, 0.5, true));
  ASSERT_EQ(w.kind, NondensityWitness::Kind::DistanceBound);
  EXPECT_GE(w.norm_lower_bound, 0.25);
  EXPECT_EQ(w.gap, 1.0);
}

TEST(Witness, PointSingularity) {
  MOFunction phi = make_phi1();
  NondensityWitness hit = witness_nondensity(phi, bump(-0.1, 0.1, 0.05), 0.0, 0.0, BoxSet(1, true));
  EXPECT_EQ(hit.kind, NondensityWitness::Kind::Excluded);
  EXPECT_TRUE(check_certificate(hit.certificate));
  NondensityWitness miss = witness_nondensity(phi, bump(3.0, 4.0, 0.1), 0.0, 0.0, BoxSet(1, true));
  EXPECT_EQ(miss.kind, NondensityWitness::Kind::NoneFound);
}

TEST(Witness, DistanceChainSeparatesCandidateFromIndicator) {
  // ||chi_K - f|| >= ||(3/4) chi_K|| when |f| < 1/4 on K.
  MOFunction phi = make_phi2(8);
  PiecewiseFunction f = bump(0.3, 0.4, 0.02, 0.2);
  NondensityWitness w = witness_nondensity(phi, f, BoxSet::interval(1.25, 1.5, true));
  ASSERT_EQ(w.kind, NondensityWitness::Kind::DistanceBound);
  NormOptions opt;
  opt.probe_membership = false;
  double direct = luxemburg_norm(phi, chi(1.25, 1.5) - f, opt).value;
  EXPECT_GE(direct + 1e-6, w.norm_lower_bound);
  EXPECT_NEAR(w.norm_lower_bound, 0.75 * 0.25, 1e-6);
}

TEST(MeasureConvergence, ShrinkingIndicators) {
  std::vector<PiecewiseFunction> seq;
  for (int n = 1; n <= 8; ++n) seq.push_back(chi(0, 1.0 / n));
  MeasureConvergenceReport r = measure_convergence_check(seq, PiecewiseFunction(1), BoxSet::interval(-1, 2, false), 0.5);
  ASSERT_EQ(r.volumes.size(), 8u);
  for (int n = 1; n <= 8; ++n) EXPECT_NEAR(r.volumes[n - 1], 1.0 / n, 2e-4) << n;
}
