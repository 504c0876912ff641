#include "harm/utility.hpp"

#include <sstream>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "harm/bounds.hpp"
#include "harm/error.hpp"
#include "harm/simulate.hpp"

namespace harm {
namespace {

constexpr double kTol = 1e-12;

TEST(GainEquality, Examples) {
  EXPECT_TRUE(gain_equality_holds(from_gains(Strata(-2, 2, 0, 0))));
  EXPECT_FALSE(gain_equality_holds(from_gains(Strata(-4, 1, 0, 1))));
  for (double c : {-3.0, 0.0, 0.5, 7.0}) EXPECT_TRUE(gain_equality_holds(from_gains(Strata::Constant(c))));
}

TEST(GainEquality, NeedsGamma) {
  const UtilitySpec mu_only = UtilitySpec::survival();
  EXPECT_FALSE(mu_only.gamma);
  EXPECT_THROW(gain_equality_holds(mu_only), ValidationError);
  EXPECT_THROW(expected_cf_utility_diff(mu_only, Strata(0.25, 0.25, 0.25, 0.25)), ValidationError);
}

TEST(GainEquality, InducedUtilitiesAlwaysSatisfyIt) {
  Eigen::Matrix2d mu;
  mu << 3.0, -1.0, 0.5, 2.0;
  const auto spec = make_utility(mu, UtilitySpec::induced_by(mu).gamma());
  EXPECT_TRUE(gain_equality_holds(spec));
}

TEST(HarmAsymmetric, Classification) {
  EXPECT_TRUE(harm_asymmetric(from_gains(Strata(-4, 1, 0, 1))));
  EXPECT_FALSE(harm_asymmetric(from_gains(Strata(-2, 2, 0, 0))));
  EXPECT_FALSE(harm_asymmetric(make_utility(UtilitySpec::survival().mu, UtilitySpec::induced_by(UtilitySpec::survival().mu).gamma())));
}

TEST(ExpectedCfUtilityDiff, Examples) {
  const Strata fixture(0.1, 0.3, 0.2, 0.4);
  EXPECT_NEAR(expected_cf_utility_diff(from_gains(Strata(-2, 2, 0, 0)), fixture), 0.4, kTol);
  EXPECT_EQ(expected_cf_utility_diff(from_gains(Strata::Zero()), fixture), 0.0);
  EXPECT_NEAR(expected_cf_utility_diff(from_gains(Strata::Ones()), fixture), 1.0, kTol);
  EXPECT_THROW(expected_cf_utility_diff(from_gains(Strata::Ones()), Strata(0.5, 0.5, 0.5, 0.5)), ValidationError);
  EXPECT_THROW(expected_cf_utility_diff(from_gains(Strata::Ones()), Strata(1.2, -0.2, 0, 0)), ValidationError);
}

TEST(GainEqualityDiff, Examples) {
  EXPECT_NEAR(gain_equality_diff(from_gains(Strata(-2, 2, 0, 0)), 0.3, 0.5), 0.4, kTol);
  EXPECT_NEAR(gain_equality_diff(from_gains(Strata::Constant(2.5)), 0.9, 0.1), 2.5, kTol);
  EXPECT_THROW(gain_equality_diff(from_gains(Strata(-4, 1, 0, 1)), 0.3, 0.5), IdentificationError);
}

TEST(ExpectedIntUtility, Examples) {
  const auto survival = UtilitySpec::survival();
  EXPECT_NEAR(expected_int_utility(survival, Action::kTreat, 0.3), 0.7, kTol);
  EXPECT_NEAR(expected_int_utility(survival, Action::kWithhold, 0.5), 0.5, kTol);
  EXPECT_EQ(expected_int_utility(make_utility(Eigen::Matrix2d::Zero()), Action::kTreat, 0.4), 0.0);
}

TEST(UtilityProperties, FastPathMatchesSumOn1000Cases) {
  Rng rng(2024);
  for (int t = 0; t < 1000; ++t) {
    // Gain-equal: choose three gains freely, solve for the fourth.
    Strata d;
    d(0) = rng.uniform(-5, 5);
    d(1) = rng.uniform(-5, 5);
    d(2) = rng.uniform(-5, 5);
    d(3) = d(0) + d(1) - d(2);
    const auto spec = from_gains(d);
    ASSERT_TRUE(gain_equality_holds(spec, 1e-12 * (1 + d.cwiseAbs().maxCoeff())));
    Strata s;
    for (int k = 0; k < 4; ++k) s(k) = rng.exponential();
    s /= s.sum();
    const auto m = stratum_margins(s);
    EXPECT_NEAR(gain_equality_diff(spec, m.p_y1, m.p_y0), expected_cf_utility_diff(spec, s), 1e-12) << "case " << t;
  }
}

TEST(UtilityProperties, SlopeAlongFamilyIsGainImbalance) {
  const auto spec = from_gains(Strata(-4, 1, 0, 1));
  EXPECT_NEAR(spec.counterfactual().gain_imbalance(), -4.0, kTol);
  const StrataBounds b{"l0", 0.3, 0.5, {0.0, 0.3}, BoundsSource::kExperimental};
  const double slope = (expected_cf_utility_diff(spec, b.at(0.3)) - expected_cf_utility_diff(spec, b.at(0.0))) / 0.3;
  EXPECT_NEAR(slope, -4.0, 1e-12);
}

UtilitySpec parse(const std::string& text) {
  std::istringstream in(text);
  return parse_utility(in, "u.util");
}

std::string parse_error(const std::string& text) {
  try {
    parse(text);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

TEST(UtilityFile, Parses) {
  const auto spec = parse("# survival\nMU 0 0 1\nMU 0 1 1\nMU 1 0 0\nMU 1 1 0\n");
  EXPECT_EQ(spec.mu, UtilitySpec::survival().mu);
  EXPECT_FALSE(spec.gamma);

  const auto pen = read_utility_file(testing::data_path("surv_pen3.util"));
  ASSERT_TRUE(pen.gamma);
  EXPECT_EQ(pen.counterfactual().delta(), Strata(-4, 1, 0, 0));
  EXPECT_TRUE(harm_asymmetric(pen));
}

TEST(UtilityFile, Errors) {
  EXPECT_EQ(parse_error("MU 0 0 1\n"), "u.util: all four MU entries are required");
  EXPECT_EQ(parse_error("MU 0 0 1\nMU 0 0 1\n"), "u.util:2: duplicate MU 0 0");
  EXPECT_EQ(parse_error("MU 0 0 1\nMU 0 1 1\nMU 1 0 0\nMU 1 1 0\nGAMMA 1 0 1\n"),
            "u.util: GAMMA needs all eight (s, a) entries once any is given");
  EXPECT_EQ(parse_error("MU 2 0 1\n"), "u.util:1: y must be an integer in [0, 1], got '2'");
  EXPECT_EQ(parse_error("NU 0 0 1\n"), "u.util:1: unknown record kind 'NU'");
  EXPECT_EQ(parse_error("MU 0 0 x\n"), "u.util:1: 'x' is not a number");
}

}  // namespace
}  // namespace harm
