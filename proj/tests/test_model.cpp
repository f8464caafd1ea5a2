#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "support.hpp"
#include "udleak/model.hpp"

using namespace udleak;
using udleak::testing::uniform;

namespace {

bool has_field(const ConfigError& e, const std::string& f) {
  return std::find(e.fields().begin(), e.fields().end(), f) != e.fields().end();
}

}  // namespace

TEST(Model, BellScenarioIsNormalized) {
  const auto s = validate_config({1.0, 0.1, 0.1, 1.0}, {0.0}, InitialState::bell(),
                                 SwitchingSpec::eternal());
  EXPECT_NEAR(s.state().alpha * s.state().alpha + s.state().gamma * s.state().gamma, 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(s.state().abs_alpha_gamma(), 0.5);
  EXPECT_EQ(s.c(), 1.0);
  EXPECT_TRUE(s.channel_open());
  EXPECT_DOUBLE_EQ(s.on_shell_root(), 1.0);
}

TEST(Model, GammaSignIsPreserved) {
  const auto s = validate_config({1.0, 0.1, 0.1, 1.0}, {0.0}, InitialState::from_alpha(0.6, -1),
                                 SwitchingSpec::eternal());
  EXPECT_DOUBLE_EQ(s.state().alpha, 0.6);
  EXPECT_DOUBLE_EQ(s.state().gamma, -0.8);
}

TEST(Model, NegativeAlphaIsAGlobalPhase) {
  const auto s = validate_config({1.0, 0.1, 0.1, 1.0}, {0.0}, {-0.6, 0.8},
                                 SwitchingSpec::eternal());
  EXPECT_DOUBLE_EQ(s.state().alpha, 0.6);
  EXPECT_DOUBLE_EQ(s.state().gamma, -0.8);
}

TEST(Model, ConfigErrorNamesEveryBadField) {
  try {
    (void)validate_config({-1.0, -0.1, 0.1, -2.0}, {-1.0}, {0.9, 0.9},
                          SwitchingSpec::gaussian(0.0), {0.0});
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    for (const char* f : {"c", "delta_e", "coupling_a", "distance", "mass", "alpha", "sigma"})
      EXPECT_TRUE(has_field(e, f)) << f;
    EXPECT_FALSE(has_field(e, "coupling_b"));
    EXPECT_NE(std::string(e.what()).find("sigma"), std::string::npos);
  }
}

TEST(Model, GaussianNeedsPositiveSigma) {
  EXPECT_THROW((void)validate_config({1.0, 0.1, 0.1, 1.0}, {0.0}, InitialState::bell(),
                                     SwitchingSpec::gaussian(-1.0)),
               ConfigError);
  EXPECT_NO_THROW((void)validate_config({1.0, 0.1, 0.1, 1.0}, {0.0}, InitialState::bell(),
                                        SwitchingSpec::gaussian(0.5)));
}

TEST(Model, ThresholdCountsAsClosed) {
  auto at = [](double de, double m, double c) {
    return validate_config({de, 0.1, 0.1, 0.0}, {m}, InitialState::bell(),
                           SwitchingSpec::eternal(), {c});
  };
  EXPECT_FALSE(at(1.0, 1.0, 1.0).channel_open());
  EXPECT_EQ(at(1.0, 1.0, 1.0).on_shell_root(), 0.0);
  EXPECT_TRUE(at(1.0, 0.999, 1.0).channel_open());
  EXPECT_FALSE(at(1.0, 0.5, 2.0).channel_open());
  EXPECT_DOUBLE_EQ(at(2.0, 1.0, 1.0).on_shell_root(), std::sqrt(3.0));
  EXPECT_DOUBLE_EQ(at(2.0, 0.25, 2.0).resonant_momentum(), std::sqrt(3.0) / 2.0);
}

TEST(Model, ThresholdSurvivesRoundingOfTheMass) {
  // m = delta_e / c^2 rarely round-trips exactly through m c^2.
  for (int i = 0; i < 500; ++i) {
    const double de = uniform(0.1, 5.0), c = uniform(0.3, 3.0);
    const auto s = validate_config({de, 0.1, 0.1, 0.0}, {de / (c * c)}, InitialState::bell(),
                                   SwitchingSpec::eternal(), {c});
    EXPECT_FALSE(s.channel_open()) << de << ' ' << c;
    EXPECT_EQ(s.on_shell_root(), 0.0);
  }
  const auto open = validate_config({1.0, 0.1, 0.1, 0.0}, {1.0 - 1e-12}, InitialState::bell(),
                                    SwitchingSpec::eternal());
  EXPECT_TRUE(open.channel_open());
}

TEST(Model, GaussianEffectiveDuration) {
  const auto g = SwitchingSpec::gaussian(2.0);
  EXPECT_DOUBLE_EQ(g.effective_duration(), 2.0 * std::sqrt(M_PI));
  EXPECT_DOUBLE_EQ(g.profile(0.0), 1.0);
  EXPECT_DOUBLE_EQ(g.profile(2.0), std::exp(-0.5));
  EXPECT_TRUE(std::isinf(SwitchingSpec::eternal().effective_duration()));
}

TEST(ModelProperties, RandomScenariosKeepInvariants) {
  for (int i = 0; i < 300; ++i) {
    const double alpha = uniform(-1.0, 1.0);
    const int sign = uniform(0.0, 1.0) < 0.5 ? -1 : +1;
    const double de = uniform(0.1, 3.0);
    const double m = uniform(0.0, 3.0);
    const double c = uniform(0.5, 2.0);
    const auto in = InitialState::from_alpha(alpha, sign);
    const auto s = validate_config({de, uniform(0, 0.2), uniform(0, 0.2), uniform(0, 5)}, {m}, in,
                                   SwitchingSpec::eternal(), {c});
    const auto& st = s.state();
    EXPECT_NEAR(st.alpha * st.alpha + st.gamma * st.gamma, 1.0, 1e-12);
    EXPECT_GE(st.alpha, 0.0);
    // The relative sign of the amplitudes is physical and survives validation.
    EXPECT_EQ(std::signbit(st.alpha * st.gamma), std::signbit(in.alpha * in.gamma));
    EXPECT_EQ(s.channel_open(), de > m * c * c);
  }
}
