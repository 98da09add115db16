#include <gtest/gtest.h>

#include <cmath>

#include "molab/error.hpp"
#include "molab/family.hpp"

using namespace molab;

namespace {

constexpr double kPi = 3.14159265358979323846;

BoxSet half_period() { return BoxSet::interval(0.0, kPi, false); }

}  // namespace

TEST(Phi1, Values) {
  MOFunction phi = make_phi1();
  EXPECT_DOUBLE_EQ(phi(point1(2.0), 3.0), 1.5);
  EXPECT_DOUBLE_EQ(phi(point1(-0.5), 1.0), 2.0);
  for (double x : {-3.0, 0.1, 7.0}) EXPECT_EQ(phi(point1(x), 0.0), 0.0);
  ASSERT_EQ(phi.poles().size(), 1u);
  EXPECT_EQ(phi.poles()[0].location, 0.0);
}

TEST(Phi2, Values) {
  MOFunction one = make_phi2(1);
  // w_1(x) = (1/4) / |x - 1/2| right of the pole.
  EXPECT_DOUBLE_EQ(one(point1(0.75), 1.0), 1.0);
  MOFunction phi = make_phi2(8);
  EXPECT_DOUBLE_EQ(phi(point1(2.0), 1.7), 1.7);
  EXPECT_DOUBLE_EQ(phi(point1(-3.0), 0.4), 0.4);
  ASSERT_EQ(phi.poles().size(), 8u);
  EXPECT_EQ(*phi.poles()[1].exact, (Rational{1, 3}));
  ASSERT_TRUE(phi.dense_singular_interval().has_value());
  EXPECT_THROW(make_phi2(0), PreconditionError);
  EXPECT_THROW(make_phi2(4, "farey"), PreconditionError);
}

TEST(Phi2, SeriesPoleCoefficientIsSymbolic) {
  PoleInfo p = series_pole(BigInt(1) << 4000);
  EXPECT_TRUE(p.coefficient.positive());
  EXPECT_EQ(p.coefficient.approx(), 0.0);
}

TEST(VariableExponent, Values) {
  MOFunction phi = make_variable_exponent(Descriptor::sine(2.0, 1.0, 1.0, 0.0), half_period());
  EXPECT_NEAR(phi(point1(kPi / 2), 2.0), 8.0 / 3.0, 1e-12);
  ASSERT_TRUE(phi.delta2().has_value());
  EXPECT_NEAR(phi.delta2()->C, 8.0, 1e-12);
  MOFunction two = make_variable_exponent(Descriptor::constant(2.0), half_period());
  EXPECT_DOUBLE_EQ(two(point1(1.0), 3.0), 4.5);
  EXPECT_THROW(make_variable_exponent(Descriptor::constant(0.5), half_period()), PreconditionError);
}

TEST(DoublePhase, Values) {
  MOFunction phi = make_double_phase(Descriptor::constant(2.0), Descriptor::constant(3.0), Descriptor::constant(1.0),
                                     half_period());
  EXPECT_DOUBLE_EQ(phi(point1(1.0), 2.0), 12.0);
  EXPECT_EQ(phi(point1(1.0), 0.0), 0.0);
  EXPECT_THROW(make_double_phase(Descriptor::constant(3.0), Descriptor::constant(2.0), Descriptor::constant(1.0),
                                 half_period()),
               PreconditionError);
  EXPECT_THROW(make_double_phase(Descriptor::constant(2.0), Descriptor::constant(3.0), Descriptor::constant(-1.0),
                                 half_period()),
               PreconditionError);
}

TEST(DoublePhase, ClauseOne) {
  auto v = check_double_phase_delta2(Descriptor::constant(2.0), Descriptor::constant(3.0), Descriptor::constant(1.0),
                                     half_period());
  ASSERT_TRUE(v.certificate.has_value());
  EXPECT_EQ(v.clause, "(i)");
  EXPECT_DOUBLE_EQ(v.certificate->C, 8.0);
  auto same = check_double_phase_delta2(Descriptor::constant(2.0), Descriptor::constant(2.0),
                                        Descriptor::constant(1.0), half_period());
  EXPECT_EQ(same.clause, "(i)");
}

TEST(DoublePhase, ClauseTwo) {
  // r blows up at 0 but a vanishes left of 1/2, where r stays bounded.
  const BoxSet unit = BoxSet::interval(0.0, 1.0, false);
  Descriptor a = Descriptor::piecewise({Box::interval(0.5, 1.0)}, {Descriptor::constant(1.0)}, Descriptor::constant(0.0));
  auto v = check_double_phase_delta2(Descriptor::constant(2.0), Descriptor::reciprocal(3.0, 1.0, 0.0), a, unit);
  ASSERT_TRUE(v.certificate.has_value());
  EXPECT_EQ(v.clause, "(ii)");
  EXPECT_TRUE(v.violations.empty());
}

TEST(DoublePhase, RejectionNamesBothClauses) {
  const BoxSet unit = BoxSet::interval(0.0, 1.0, false);
  auto v = check_double_phase_delta2(Descriptor::constant(2.0), Descriptor::reciprocal(3.0, 1.0, 0.0),
                                     Descriptor::constant(1.0), unit);
  EXPECT_FALSE(v.certificate.has_value());
  ASSERT_EQ(v.violations.size(), 2u);
  EXPECT_EQ(v.violations[0].rfind("(i)", 0), 0u);
  EXPECT_EQ(v.violations[1].rfind("(ii)", 0), 0u);
}

TEST(Delta2, VerifiesAnalyticCertificates) {
  for (const MOFunction& phi :
       {make_phi1(), make_phi2(8), make_variable_exponent(Descriptor::sine(2.0, 1.0, 1.0, 0.0), half_period()),
        make_double_phase(Descriptor::constant(2.0), Descriptor::constant(3.0), Descriptor::constant(1.0),
                          half_period()),
        make_orlicz_power(3.0, 1.0, default_example_domain())}) {
    ASSERT_TRUE(phi.delta2().has_value()) << phi.name();
    Delta2Report r = verify_delta2(phi, *phi.delta2());
    EXPECT_TRUE(r.pass) << phi.name() << " excess " << r.worst_excess;
    EXPECT_GT(r.samples, 1000u);
  }
}

TEST(Delta2, ConstantTooSmallFails) {
  MOFunction phi = make_variable_exponent(Descriptor::constant(2.0), half_period());
  Delta2Certificate c{4.0, {}, 0.0, Delta2Certificate::Provenance::Analytic, "test"};
  EXPECT_TRUE(verify_delta2(phi, c).pass);
  c.C = 3.9;
  Delta2Report r = verify_delta2(phi, c);
  EXPECT_FALSE(r.pass);
  EXPECT_GT(r.worst_excess, 0.0);
}

TEST(Delta2, ExponentialHasNoCertificate) {
  MOFunction phi = make_orlicz_exp(default_example_domain());
  EXPECT_FALSE(phi.delta2().has_value());
  Delta2Certificate c{1e6, {}, 0.0, Delta2Certificate::Provenance::Sampled, "test"};
  EXPECT_FALSE(verify_delta2(phi, c).pass);
}

TEST(Axioms, BuiltinFamiliesValidate) {
  for (const MOFunction& phi :
       {make_phi1(), make_phi2(8), make_variable_exponent(Descriptor::sine(2.0, 1.0, 1.0, 0.0), half_period()),
        make_double_phase(Descriptor::constant(2.0), Descriptor::constant(3.0), Descriptor::constant(1.0),
                          half_period()),
        make_orlicz_exp(default_example_domain())}) {
    AxiomReport r = validate_axioms(phi, 2000, 9);
    EXPECT_TRUE(r.ok()) << phi.name() << " zero " << r.zero_failures << " convex " << r.convexity_failures
                        << " mono " << r.monotonicity_failures << " pos " << r.positivity_failures << " pole "
                        << r.pole_bound_failures;
  }
}

TEST(LevelSets, Phi1OnOneTwo) {
  MOFunction phi = make_phi1();
  auto d = level_set_decomposition(phi, BoxSet::interval(1.0, 2.0, false), 5, 1e-2);
  ASSERT_GE(d.levels.size(), 1u);
  EXPECT_NEAR(d.levels[0].volume(), 1.0, 1e-9);
  for (std::size_t i = 1; i < d.levels.size(); ++i) EXPECT_TRUE(d.levels[i].empty());
}

TEST(LevelSets, Phi1NearPole) {
  MOFunction phi = make_phi1();
  auto d = level_set_decomposition(phi, BoxSet::interval(0.1, 10.0, true), 10, 1e-3);
  // w = 1/x lies in [n - 1, n) on (1/n, 1/(n - 1)].
  ASSERT_EQ(d.levels.size(), 10u);
  EXPECT_GT(d.levels[0].volume(), 8.9);
  for (int n = 2; n <= 10; ++n) EXPECT_GT(d.levels[n - 1].volume() + d.flagged.volume(), 0.0) << n;
  EXPECT_TRUE(d.remainder.empty());
  auto empty = level_set_decomposition(phi, BoxSet(1, true), 3, 1e-2);
  for (const BoxSet& l : empty.levels) EXPECT_TRUE(l.empty());
}
