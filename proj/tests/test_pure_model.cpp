#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "teleamp/errors.hpp"
#include "teleamp/fock.hpp"
#include "teleamp/pure_model.hpp"
#include "teleamp/quadrature.hpp"

using namespace teleamp;
using namespace teleamp::pure;

namespace {

Metrics fock_reference(double lambda, double g, Complex alpha, Complex target) {
  const fock::FockVec out = fock::amplifier_G(fock::coherent_state(lambda * alpha, 40), g, 0).normalized();
  return fock::metrics_fock({{{1.0, out}}}, alpha, target);
}

}  // namespace

TEST(ClosedForms, GoldenValues) {
  EXPECT_NEAR(gain_alpha(0.5, 4.0, 1.0), 0.99411764705882352941, 1e-14);
  EXPECT_NEAR(fidelity_alpha(0.5, 3.0, 1.0), 0.70746046379123523384, 1e-14);
}

TEST(ClosedForms, UnitGainIsLossyChannel) {
  for (double alpha : {0.0, 0.3, 1.7}) {
    EXPECT_NEAR(gain_alpha(0.5, 1.0, alpha), 0.5, 1e-15);
    EXPECT_NEAR(fidelity_alpha(0.5, 1.0, alpha), 1.0, 1e-15);
  }
}

TEST(ClosedForms, SmallAmplitudeLimit) {
  // Near α = 0 the output is a near-perfect |gλα⟩.
  EXPECT_NEAR(gain_alpha(0.5, 4.0, 1e-6), 2.0, 1e-10);
  EXPECT_NEAR(fidelity_alpha(0.5, 4.0, 1e-6), 1.0, 1e-10);
  // For large α the gain collapses back towards λ.
  EXPECT_LT(gain_alpha(0.5, 4.0, 20.0), 0.6);
}

TEST(ClosedForms, MetricsAgreeWithFockEvaluation) {
  for (double g : {1.5, 3.0, 4.0}) {
    for (const Complex alpha : {Complex(0.2), Complex(0.7, 0.4), Complex(-1.3, 0.2)}) {
      const Complex target = g * 0.5 * alpha;
      const Metrics closed = metrics_pure(0.5, g, alpha, target);
      const Metrics fock = fock_reference(0.5, g, alpha, target);
      EXPECT_NEAR(closed.gain, fock.gain, 1e-10);
      EXPECT_NEAR(closed.fidelity, fock.fidelity, 1e-10);
      EXPECT_NEAR(closed.vx, fock.vx, 1e-10);
      EXPECT_NEAR(closed.vp, fock.vp, 1e-10);
      EXPECT_NEAR(closed.mean_re, fock.mean_re, 1e-10);
      EXPECT_NEAR(closed.mean_im, fock.mean_im, 1e-10);
    }
  }
}

TEST(ClosedForms, DefaultFidelityTargetMatchesFidelityAlpha) {
  EXPECT_NEAR(metrics_pure(0.5, 3.0, 0.8).fidelity, fidelity_alpha(0.5, 3.0, 0.8), 1e-14);
  EXPECT_NEAR(metrics_pure(0.5, 3.0, 0.8).gain, gain_alpha(0.5, 3.0, 0.8), 1e-14);
}

TEST(ClosedForms, ZeroAmplitudeUsesLimitingGain) {
  const Metrics m = metrics_pure(0.5, 3.0, 0.0);
  EXPECT_DOUBLE_EQ(m.gain, 1.5);
  EXPECT_NEAR(m.fidelity, 1.0, 1e-15);
  // Ĝ acts on |0⟩ trivially: the output is vacuum.
  EXPECT_NEAR(m.vx, 0.5, 1e-15);
  EXPECT_NEAR(m.uncertainty_product, 0.25, 1e-15);
}

TEST(ClosedForms, PhaseCovariance) {
  const Metrics a = metrics_pure(0.5, 3.0, 0.9);
  const Metrics b = metrics_pure(0.5, 3.0, std::polar(0.9, 1.1));
  EXPECT_NEAR(a.gain, b.gain, 1e-14);
  EXPECT_NEAR(a.fidelity, b.fidelity, 1e-14);
  EXPECT_NEAR(a.vx + a.vp, b.vx + b.vp, 1e-14);
}

TEST(ClosedForms, RejectsUnphysicalSqueezing) {
  EXPECT_THROW(gain_alpha(1.0, 2.0, 0.5), DomainError);
  EXPECT_THROW(metrics_pure(-1.2, 2.0, 0.5), DomainError);
}

TEST(ResourceEngineering, GoldenValues) {
  const ResourceEngineering r = resource_engineering(0.5, -0.015, 0.95);
  EXPECT_NEAR(r.lambda_eff, 0.95 * 0.5 - 0.05 * 0.015, 1e-16);
  EXPECT_NEAR(r.p_s, 5.8519202837274941466e-4, 1e-17);
  EXPECT_NEAR(r.g_eff, 1.6461744186046511628, 1e-14);
  EXPECT_NEAR(r.g, 3.4711110566255164213, 1e-13);
}

TEST(ResourceEngineering, PlainSubtractionDoublesTheGain) {
  for (double T : {0.5, 0.9, 0.99}) {
    const ResourceEngineering r = resource_engineering(0.4, 0.0, T);
    EXPECT_EQ(r.g, 2.0);
    EXPECT_DOUBLE_EQ(r.g_eff, 2.0 * T * 0.4);
  }
}

TEST(ResourceEngineering, CoefficientsAreNormalized) {
  const ResourceEngineering r = resource_engineering(0.5, -0.015, 0.95);
  double s = 0.0;
  for (double c : r.coefficients(200)) s += c * c;
  EXPECT_NEAR(s, 1.0, 1e-14);
  // Coefficient ratio c_n/c_0 = (1 + (g-1)n) λ_effⁿ.
  for (int n = 1; n < 6; ++n) {
    EXPECT_NEAR(r.coefficient(n) / r.coefficient(0), (1.0 + (r.g - 1.0) * n) * std::pow(r.lambda_eff, n), 1e-12);
  }
}

TEST(ResourceEngineering, SuccessProbabilityMatchesFockOracle) {
  for (const auto& [lambda, mu, T] : {std::array{0.5, -0.0197, 0.95}, std::array{0.4, 0.1, 0.7}, std::array{0.45, -0.3, 0.8}}) {
    const fock::PreparedResource oracle =
        fock::prepare_resource_fock(lambda, mu, T, 30, fock::Detector::kPnr, gauss::TapConvention::kMatched);
    const ResourceEngineering r = resource_engineering(lambda, mu, T);
    EXPECT_NEAR(r.p_s, oracle.p_ab, 1e-8);
    EXPECT_NEAR(r.p_s / oracle.p_ab, 1.0, 1e-9);
  }
}

TEST(ResourceEngineering, PoleAndDomainErrors) {
  // Rλ + Tμ = 0.
  EXPECT_THROW(resource_engineering(0.5, -0.5 * 0.1 / 0.9, 0.9), PoleError);
  EXPECT_THROW(resource_engineering(0.5, 0.0, 1.2), DomainError);
  EXPECT_THROW(resource_engineering(0.5, 1.0, 0.5), DomainError);
}

TEST(GainSensitivity, DerivativeMatchesFiniteDifference) {
  const double h = 1e-6;
  for (const double mu : {-0.01, -0.015, -0.0197, 0.01}) {
    const double fd = (resource_engineering(0.5, mu + h, 0.95).g_eff - resource_engineering(0.5, mu - h, 0.95).g_eff) / (2 * h);
    const GainSensitivity s = geff_sensitivity(0.5, mu, 0.95);
    EXPECT_NEAR(s.dgeff_dmu, s.dgeff_dmu_from_gain, 1e-9 * std::abs(s.dgeff_dmu));
    EXPECT_NEAR(s.dgeff_dmu / fd, 1.0, 1e-6) << mu;
  }
  EXPECT_NEAR(geff_sensitivity(0.5, -0.01, 0.95).dgeff_dmu, -51.929136316337148803, 1e-10);
}

TEST(GainSensitivity, ApproximationErrorShrinksWithTap) {
  // At fixed μ/R the relative approximation error falls linearly with R.
  double previous = 0.0;
  for (double R : {0.04, 0.02, 0.01, 0.005}) {
    const double mu = -0.2 * R;
    const ResourceEngineering r = resource_engineering(0.5, mu, 1.0 - R);
    const double err = std::abs(geff_sensitivity(0.5, mu, 1.0 - R).g_eff_approx - r.g_eff) / r.g_eff;
    if (previous > 0.0) EXPECT_NEAR(previous / err, 2.0, 0.1) << R;
    previous = err;
  }
  EXPECT_LT(previous, 1e-2);
}

TEST(GainSensitivity, ApproximationErrorBoundAtFivePercentTap) {
  double worst = 0.0, worst_mu = 0.0;
  for (int i = 0; i <= 40; ++i) {
    const double mu = -0.02 + 0.001 * i;
    const double err = std::abs(geff_sensitivity(0.5, mu, 0.95).g_eff_approx - resource_engineering(0.5, mu, 0.95).g_eff);
    if (err > worst) {
      worst = err;
      worst_mu = mu;
    }
  }
  EXPECT_LT(worst, 0.01) << "at mu = " << worst_mu;
}

TEST(GainSensitivity, RegimeFlag) {
  EXPECT_TRUE(geff_sensitivity(0.5, -0.015, 0.95).approximation_regime);
  EXPECT_FALSE(geff_sensitivity(0.5, -0.015, 0.8).approximation_regime);
  EXPECT_FALSE(geff_sensitivity(0.5, 0.2, 0.95).approximation_regime);
}

TEST(TruncatedAmplifier, NormalizationGoldenValue) {
  EXPECT_NEAR(gn_model(0.5, 3.0, 8).p_n, 2.4400124156124748735e-5, 1e-18);
}

TEST(TruncatedAmplifier, CoefficientsAreNormalized) {
  for (const double g : {1.5, 2.0, 3.0}) {
    double s = 0.0;
    for (double c : gn_model(0.5, g, 8).coefficients) s += c * c;
    EXPECT_NEAR(s, 1.0, 1e-14) << g;
  }
}

TEST(TruncatedAmplifier, CriticalGainIsContinuous) {
  // gλ = 1 switches to the limiting geometric sum.
  const double at = gn_model(0.5, 2.0, 6).p_n;
  const double below = gn_model(0.5, 2.0 - 1e-7, 6).p_n;
  const double above = gn_model(0.5, 2.0 + 1e-7, 6).p_n;
  EXPECT_NEAR(below / at, 1.0, 1e-5);
  EXPECT_NEAR(above / at, 1.0, 1e-5);
}

TEST(TruncatedAmplifier, ThresholdAmplitude) {
  const GnModel m = gn_model(0.5, 3.0, 8);
  EXPECT_NEAR(m.alpha_th, (std::sqrt(10.25) - 1.5) / 1.5, 1e-15);
  EXPECT_THROW(gn_model(0.5, 0.0, 3), DomainError);
  EXPECT_THROW(gn_model(0.5, 2.0, -1), DomainError);
}

TEST(TruncatedAmplifier, MatchesFockConstruction) {
  const GnModel m = gn_model(0.5, 3.0, 8);
  const fock::FockVec psi = fock::gn_resource(0.5, 3.0, 8, 40).members.front().state;
  for (int n = 0; n < 20; ++n) EXPECT_NEAR(std::abs(psi[psi.index({n, n})]), m.coefficients[n], 1e-12) << n;
}

TEST(OutcomeDensity, ExactDensitiesIntegrateToOne) {
  const Complex alpha(0.3, -0.1);
  double s_g = 0.0, s_t = 0.0;
  for (const auto& p : PolarGrid{7.5, 48, 90}.points(1.0)) {
    const Complex beta = p.beta - alpha;
    s_g += p.weight * beta_density_g(0.5, 3.0, alpha, beta);
    s_t += p.weight * beta_density_tmsv(0.5, alpha, beta);
  }
  EXPECT_NEAR(s_t, 1.0, 1e-10);
  EXPECT_NEAR(s_g, 1.0, 1e-10);
}

TEST(OutcomeDensity, TruncatedDensityIsExactInsideThreshold) {
  // Inside α_th the Ψ_N density equals the Fock teleportation weight up to the Poisson tail.
  const double lambda = 0.5, g = 3.0;
  const int N = 8;
  const fock::FockMix res = fock::gn_resource(lambda, g, N, 40);
  for (const Complex beta : {Complex(0.0), Complex(0.1, -0.05), Complex(-0.15, 0.1)}) {
    const fock::Teleported t = fock::teleport_fock(res, 0.2, beta, 0.0);
    EXPECT_NEAR(beta_density_gn(lambda, g, N, 0.2, beta) / t.weight, 1.0, 1e-6);
  }
}

TEST(WindowProbability, GoldenValueAndFlags) {
  const WindowProbability w = ptele_window(0.5, 3.0, 8, std::sqrt(0.08), 0.3);
  EXPECT_NEAR(w.p_tele, 7.192227884440630275e-5, 1e-18);
  EXPECT_TRUE(w.valid());
  EXPECT_FALSE(ptele_window(0.5, 3.0, 8, 1.0, 0.3).converges);
  EXPECT_FALSE(ptele_window(0.5, 3.0, 8, std::sqrt(0.08), 2.0).within_support);
  EXPECT_THROW(ptele_window(0.5, 3.0, 8, -0.1, 0.3), DomainError);
}

TEST(WindowProbability, NarrowWindowLimit) {
  // P_tele → πσ² P(β = 0) as σ → 0.
  const double sigma = 1e-4;
  const WindowProbability w = ptele_window(0.5, 3.0, 8, sigma, 0.3);
  EXPECT_NEAR(w.p_tele / (std::numbers::pi * sigma * sigma * beta_density_gn(0.5, 3.0, 8, 0.3, 0.0)), 1.0, 1e-7);
}
