#include <gtest/gtest.h>

#include <cmath>

#include "udleak/density.hpp"

using namespace udleak;

namespace {

ValidatedScenario bell_eternal(double c_a = 0.1, double c_b = 0.1) {
  return validate_config({1.0, c_a, c_b, 1.0}, {0.0}, InitialState::bell(),
                         SwitchingSpec::eternal());
}

}  // namespace

TEST(Initial, BellCorners) {
  const ComplexMatrix4 m = initial_density(InitialState::bell()).matrix();
  for (auto [r, c] : {std::pair{0, 0}, {0, 3}, {3, 0}, {3, 3}})
    EXPECT_NEAR(m(r, c).real(), 0.5, 1e-15);
  EXPECT_TRUE(is_x_shaped(m));
  EXPECT_EQ(m(1, 1), cplx(0.0));
  EXPECT_EQ(m(2, 2), cplx(0.0));
}

TEST(Initial, AmplitudeLayout) {
  const InitialState st = InitialState::from_alpha(0.6, -1);
  const ComplexMatrix4 m = initial_density(st).matrix();
  EXPECT_DOUBLE_EQ(m(0, 0).real(), 0.64);  // gamma^2 on |ee>
  EXPECT_DOUBLE_EQ(m(3, 3).real(), 0.36);  // alpha^2 on |gg>
  EXPECT_DOUBLE_EQ(m(0, 3).real(), -0.48);
  EXPECT_DOUBLE_EQ(m(3, 0).real(), -0.48);
  const DensityMatrix4 rho = initial_density(st);
  EXPECT_EQ(rho.delta0_power(), 0);
  EXPECT_NEAR(rho.diagnostics().trace_residual, 0.0, 1e-15);
}

TEST(Evolved, EternalBellCoefficients) {
  const auto s = bell_eternal();
  const DensityMatrix4 rho = evolved_density(s, eternal_integral_set(s));
  EXPECT_EQ(rho.delta0_power(), 1);
  const XElements c = XElements::from(rho.correction());
  EXPECT_NEAR(c.b1.real(), 0.0025, 1e-15);
  EXPECT_NEAR(c.c2.real(), 0.0025, 1e-15);
  EXPECT_NEAR(c.a1.real(), -0.005, 1e-15);
  EXPECT_NEAR(c.d2.real(), 0.0, 1e-15);
  // Coherence loses |alpha gamma| (C_A^2 + C_B^2) Re M.
  EXPECT_NEAR(c.a2.real(), -0.5 * 0.02 * 0.25, 1e-15);
  // Cross-excitation C_A C_B gamma^2 X.
  EXPECT_NEAR(c.b2.real(), 0.01 * 0.5 * 0.5 * std::sin(1.0), 1e-15);
  EXPECT_NEAR(std::abs(rho.matrix().trace() - 1.0), 0.0, 1e-15);
}

TEST(Evolved, EternalStrippedMatrixIsExactlyHermitianAndTraceOne) {
  const auto s = validate_config({1.4, 0.2, 0.05, 0.3}, {0.6}, InitialState::from_alpha(0.3, -1),
                                 SwitchingSpec::eternal());
  const DensityMatrix4 rho = evolved_density(s, eternal_integral_set(s));
  EXPECT_EQ(rho.diagnostics().hermiticity_residual, 0.0);
  EXPECT_NEAR(rho.diagnostics().trace_residual, 0.0, 1e-16);
  EXPECT_TRUE(is_x_shaped(rho.matrix()));
}

TEST(Evolved, ZeroCouplingReproducesInitialState) {
  const auto s = bell_eternal(0.0, 0.0);
  const DensityMatrix4 rho = evolved_density(s, eternal_integral_set(s));
  EXPECT_EQ(rho.matrix(), initial_density(s.state()).matrix());
}

TEST(Evolved, GaussianIsHermitianWithUnitTrace) {
  const auto s = validate_config({1.0, 0.1, 0.1, 1.0}, {0.0}, InitialState::bell(),
                                 SwitchingSpec::gaussian(1.0));
  const DensityMatrix4 rho = evolved_density(s, gaussian_integral_set(s));
  EXPECT_EQ(rho.delta0_power(), 0);
  EXPECT_LE(rho.diagnostics().hermiticity_residual, 1e-10);
  EXPECT_LE(rho.diagnostics().trace_residual, 1e-10);
  EXPECT_TRUE(is_x_shaped(rho.matrix()));
  EXPECT_TRUE(rho.diagnostics().perturbative_ok());
  const double ind = rho.diagnostics().perturbative_indicator;
  EXPECT_GE(rho.diagnostics().min_eigenvalue, -5.0 * ind * ind);
}

TEST(Evolved, PerturbativeIndicatorIsRateNormalizedForEternal) {
  const auto s = bell_eternal(0.1, 0.1);
  const DensityMatrix4 rho = evolved_density(s, eternal_integral_set(s));
  // Largest stripped coefficient: C^2 P'' = 0.005.
  EXPECT_NEAR(rho.diagnostics().raw_perturbative_indicator, 0.005, 1e-15);
  EXPECT_NEAR(rho.diagnostics().perturbative_indicator, 0.005 / (2 * M_PI), 1e-15);
}

TEST(Evolved, StrongCouplingTripsTheIndicator) {
  const auto s = bell_eternal(5.0, 5.0);
  const DensityMatrix4 rho = evolved_density(s, eternal_integral_set(s));
  EXPECT_FALSE(rho.diagnostics().perturbative_ok());
  EXPECT_GT(rho.diagnostics().perturbative_indicator, kPerturbativeFail);
}

TEST(Evolved, AtDelta0ScalesTheCorrection) {
  const auto s = bell_eternal();
  const DensityMatrix4 rho = evolved_density(s, eternal_integral_set(s));
  const DensityMatrix4 half = rho.at_delta0(0.5);
  EXPECT_EQ(half.delta0_power(), 0);
  EXPECT_NEAR(std::abs(half.matrix()(1, 1) - cplx(0.00125)), 0.0, 1e-16);
  EXPECT_NEAR(half.diagnostics().perturbative_indicator, 0.0025, 1e-15);
  EXPECT_EQ(rho.at_delta0(0.0).matrix(), initial_density(s.state()).matrix());
}

TEST(Evolved, ModeMismatchOnWrongDelta0Power) {
  const auto s = bell_eternal();
  IntegralSet I = eternal_integral_set(s);
  I.p_dd_a.delta0_power = 0;
  EXPECT_THROW((void)evolved_density(s.state(), s.pair(), I), ModeMismatch);
}

TEST(Evolved, ModeMismatchAgainstScenario) {
  const auto e = bell_eternal();
  const auto g = validate_config({1.0, 0.1, 0.1, 1.0}, {0.0}, InitialState::bell(),
                                 SwitchingSpec::gaussian(1.0));
  EXPECT_THROW((void)evolved_density(g, eternal_integral_set(e)), ModeMismatch);
}

TEST(Evolved, ProductStateStaysUnentangledInCoherences) {
  // alpha = 1: no gamma terms, and no coherence is generated at O(C^2) for eternal switching.
  const auto s = validate_config({1.0, 0.1, 0.1, 1.0}, {0.0}, InitialState::from_alpha(1.0),
                                 SwitchingSpec::eternal());
  const DensityMatrix4 rho = evolved_density(s, eternal_integral_set(s));
  const XElements x = rho.elements();
  EXPECT_EQ(x.a2, cplx(0.0));
  EXPECT_EQ(x.b2, cplx(0.0));
  EXPECT_EQ(x.d2, cplx(1.0));
}
