#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "teleamp/errors.hpp"
#include "teleamp/gaussian.hpp"
#include "teleamp/quadrature.hpp"

using namespace teleamp;
using namespace teleamp::gauss;

namespace {

constexpr std::array<int, 2> kBoth{0, 1};

// Random physical two-mode covariance: S (ν-thermal) Sᵀ with S a product of
// squeezers, a beam splitter and a phase rotation.
CovMatrix random_covariance(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix thermal = Matrix::Identity(4, 4);
  thermal.block(0, 0, 2, 2) *= 1.0 + u(rng);
  thermal.block(2, 2, 2, 2) *= 1.0 + u(rng);
  Matrix sq = Matrix::Identity(4, 4);
  const double r1 = 0.8 * (u(rng) - 0.5), r2 = 0.8 * (u(rng) - 0.5);
  sq(0, 0) = std::exp(r1);
  sq(1, 1) = std::exp(-r1);
  sq(2, 2) = std::exp(r2);
  sq(3, 3) = std::exp(-r2);
  const double th = 2.0 * std::numbers::pi * u(rng);
  Matrix rot = Matrix::Identity(4, 4);
  rot.block(0, 0, 2, 2) << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  const Matrix S = beamsplitter(u(rng), 2, 0, 1).S * rot * sq;
  Matrix g = S * thermal * S.transpose();
  return CovMatrix(0.5 * (g + g.transpose()));
}

double integrate_2d(const std::function<double(double, double)>& f, double cx, double cy, double half, int n) {
  const QuadratureRule gx = gauss_legendre(n, cx - half, cx + half);
  const QuadratureRule gy = gauss_legendre(n, cy - half, cy + half);
  double s = 0.0;
  for (std::size_t i = 0; i < gx.nodes.size(); ++i) {
    for (std::size_t j = 0; j < gy.nodes.size(); ++j) s += gx.weights[i] * gy.weights[j] * f(gx.nodes[i], gy.nodes[j]);
  }
  return s;
}

}  // namespace

TEST(TmsvCovariance, ZeroSqueezingIsVacuum) {
  EXPECT_TRUE(tmsv_covariance(0.0).matrix().isApprox(Matrix::Identity(4, 4), 0.0));
}

TEST(TmsvCovariance, HalfSqueezingEntries) {
  const CovMatrix g = tmsv_covariance(0.5);
  EXPECT_NEAR(g(0, 0), 5.0 / 3.0, 1e-15);
  EXPECT_NEAR(g(3, 3), 5.0 / 3.0, 1e-15);
  EXPECT_NEAR(g(0, 2), 4.0 / 3.0, 1e-15);
  EXPECT_NEAR(g(1, 3), -4.0 / 3.0, 1e-15);
  EXPECT_EQ(g(0, 1), 0.0);
}

TEST(TmsvCovariance, PureForAnyLambda) {
  for (double l : {-0.9, -0.3, 0.0, 0.2, 0.5, 0.95}) {
    const Vector nu = tmsv_covariance(l).symplectic_eigenvalues();
    EXPECT_NEAR(nu(0), 1.0, 1e-10) << "lambda=" << l;
    EXPECT_NEAR(nu(1), 1.0, 1e-10) << "lambda=" << l;
  }
}

TEST(TmsvCovariance, RejectsUnitLambda) {
  EXPECT_THROW(tmsv_covariance(1.0), DomainError);
  EXPECT_THROW(tmsv_covariance(-1.2), DomainError);
}

TEST(CovMatrix, RejectsAsymmetricInput) {
  Matrix m = Matrix::Identity(2, 2);
  m(0, 1) = 1e-6;
  EXPECT_THROW(CovMatrix{m}, DomainError);
  EXPECT_THROW(CovMatrix{Matrix::Identity(3, 3)}, DomainError);
}

TEST(CovMatrix, DetectsUnphysicalState) {
  EXPECT_FALSE(CovMatrix(0.5 * Matrix::Identity(2, 2)).is_physical());
  EXPECT_TRUE(CovMatrix::vacuum(3).is_physical());
}

TEST(LossyMix, IdentityAndFullLoss) {
  const CovMatrix g = tmsv_covariance(0.5);
  EXPECT_TRUE(lossy_mix(g, 1.0, kBoth).matrix().isApprox(g.matrix(), 1e-15));
  EXPECT_TRUE(lossy_mix(g, 0.0, kBoth).matrix().isApprox(Matrix::Identity(4, 4), 1e-15));
}

TEST(LossyMix, MatchesDirectArithmeticAndStaysPhysical) {
  const CovMatrix g = tmsv_covariance(0.5);
  const CovMatrix m = lossy_mix(g, 0.9, kBoth);
  const Matrix expected = 0.9 * g.matrix() + 0.1 * Matrix::Identity(4, 4);
  EXPECT_LT((m.matrix() - expected).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_GE(m.symplectic_eigenvalues().minCoeff(), 1.0 - 1e-9);
  // Only the listed mode is touched.
  const std::array<int, 1> a{0};
  const CovMatrix one = lossy_mix(g, 0.9, a);
  EXPECT_EQ(one(3, 3), g(3, 3));
  EXPECT_NEAR(one(0, 2), std::sqrt(0.9) * g(0, 2), 1e-15);
}

TEST(LossyMix, RejectsEfficiencyOutsideUnitInterval) {
  EXPECT_THROW(lossy_mix(tmsv_covariance(0.5), 1.1, kBoth), DomainError);
  EXPECT_THROW(lossy_mix(tmsv_covariance(0.5), -0.1, kBoth), DomainError);
}

TEST(Beamsplitter, UnitTransmittanceIsIdentity) {
  const SymplecticTransform bs = beamsplitter(1.0, 2, 0, 1);
  EXPECT_TRUE(bs.S.isApprox(Matrix::Identity(4, 4), 0.0));
  EXPECT_TRUE(bs.G.isZero());
}

TEST(Beamsplitter, IsSymplecticAndPreservesPhotonNumber) {
  std::mt19937 rng(7);
  for (double T : {0.0, 0.1, 0.5, 0.95}) {
    for (auto sign : {ReflectionSign::kPositive, ReflectionSign::kNegative}) {
      const SymplecticTransform bs = beamsplitter(T, 2, 0, 1, sign);
      EXPECT_TRUE(bs.is_symplectic(1e-10));
      const CovMatrix g = random_covariance(rng);
      EXPECT_NEAR(bs.apply(g).matrix().trace(), g.matrix().trace(), 1e-10);
    }
  }
}

TEST(Beamsplitter, BalancedTwiceWithFlippedSignLeavesVacuum) {
  const SymplecticTransform t =
      beamsplitter(0.5, 2, 0, 1).then(beamsplitter(0.5, 2, 0, 1, ReflectionSign::kNegative));
  EXPECT_TRUE(t.apply(CovMatrix::vacuum(2)).matrix().isApprox(Matrix::Identity(4, 4), 1e-14));
  // The composition is the identity up to a phase; applied twice with the same sign it swaps modes.
  const SymplecticTransform swap = beamsplitter(0.5, 2, 0, 1).then(beamsplitter(0.5, 2, 0, 1));
  EXPECT_NEAR(std::abs(swap.S(0, 2)), 1.0, 1e-15);
}

TEST(Beamsplitter, RejectsTransmittanceOutsideUnitInterval) {
  EXPECT_THROW(beamsplitter(1.5, 2, 0, 1), DomainError);
}

TEST(EffectiveCovariance, UncoupledLosslessIsDirectSum) {
  AmplifierParams p;
  p.lambda = 0.5;
  p.mu = -0.2;
  p.T = 1.0;
  const Matrix expected = direct_sum(tmsv_covariance(0.5), tmsv_covariance(-0.2)).matrix();
  EXPECT_LT((build_effective_cov(p).matrix() - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(EffectiveCovariance, PhysicalAtFigureParametersAndDeadDetectors) {
  AmplifierParams p;
  p.lambda = 0.5;
  p.mu = -0.015;
  p.T = 0.95;
  p.eta_ab = p.eta_cd = 0.9;
  p.eta_apd = 0.85;
  EXPECT_EQ(build_effective_cov(p).matrix().rows(), 8);
  EXPECT_TRUE(build_effective_cov(p).is_physical());
  p.eta_apd = 0.0;
  const CovMatrix dead = build_effective_cov(p);
  EXPECT_TRUE(dead.is_physical());
  EXPECT_TRUE(dead.matrix().block(4, 4, 4, 4).isApprox(Matrix::Identity(4, 4), 1e-15));
  EXPECT_TRUE(dead.matrix().block(0, 4, 4, 4).isZero(1e-15));
}

TEST(EffectiveCovariance, TapCorrelationCarriesLambdaEff) {
  // With lossless inputs ⟨x_A x_B⟩ = T sinh 2r + R sinh 2s, which is the
  // covariance image of λ_eff = Tλ + Rμ; the mirrored convention gives T sinh 2r - R sinh 2s.
  AmplifierParams p;
  p.lambda = 0.5;
  p.mu = -0.1;
  p.T = 0.9;
  const auto sh = [](double l) { return 2.0 * l / (1.0 - l * l); };
  EXPECT_NEAR(build_effective_cov(p)(0, 2), 0.9 * sh(0.5) + 0.1 * sh(-0.1), 1e-14);
  EXPECT_NEAR(build_effective_cov(p, TapConvention::kMirrored)(0, 2), 0.9 * sh(0.5) - 0.1 * sh(-0.1), 1e-14);
}

TEST(QExponent, RoundTripWithCovariance) {
  std::mt19937 rng(11);
  for (int i = 0; i < 20; ++i) {
    const CovMatrix g = random_covariance(rng);
    const QExponent q = QExponent::from_covariance(g);
    const Matrix back = 2.0 * (q.to_covariance().matrix() + Matrix::Identity(4, 4)).inverse();
    EXPECT_LT((back - q.matrix()).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((q.to_covariance().matrix() - g.matrix()).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(QExponent, RefusesNonPositiveDefinite) {
  Matrix m = Matrix::Identity(2, 2);
  m(1, 1) = -1.0;
  EXPECT_THROW(QExponent{m}, ConditioningError);
}

TEST(SpdFactor, ReportsConditionNumber) {
  Matrix m = Matrix::Identity(2, 2);
  m(1, 1) = 1e-14;
  try {
    SpdFactor f(m, "test");
    FAIL() << "expected ConditioningError";
  } catch (const ConditioningError& e) {
    EXPECT_NEAR(e.condition_number(), 1e14, 1e2);
  }
}

TEST(QExponent, SingleModeTermsIntegrateToOne) {
  std::mt19937 rng(3);
  for (int i = 0; i < 20; ++i) {
    const CovMatrix g = random_covariance(rng).submatrix(std::array<int, 1>{0});
    const QExponent q = QExponent::from_covariance(g);
    Vector mean(2);
    mean << 0.3 * i / 20.0, -0.2;
    const double integral = integrate_2d(
        [&](double x, double y) {
          Vector r(2);
          r << x, y;
          return q.density(r, mean);
        },
        mean(0), mean(1), 10.0, 100);
    EXPECT_NEAR(integral, 1.0, 1e-8) << "instance " << i;
  }
}

TEST(GaussCondition, ProductStateAtOrigin) {
  Matrix g = Matrix::Zero(4, 4);
  g.block(0, 0, 2, 2) = Eigen::Vector2d(0.7, 0.9).asDiagonal();
  g.block(2, 2, 2, 2) = Eigen::Vector2d(1.2, 0.5).asDiagonal();
  const Conditioned c = gauss_condition(QExponent(g), 0, 0.0);
  EXPECT_TRUE(c.displacement.isZero());
  // (1/π) √det Γ_A is the mode-A Gaussian at the origin times π.
  EXPECT_NEAR(c.weight(), std::sqrt(0.7 * 0.9) / std::numbers::pi, 1e-15);
}

TEST(GaussCondition, TmsvActsAsLossyChannel) {
  const double lambda = 0.5;
  const QExponent q = QExponent::from_covariance(tmsv_covariance(lambda));
  const Complex alpha(0.4, -0.3);
  const Conditioned c = gauss_condition(q, 0, alpha);
  EXPECT_NEAR(c.mean(0), lambda * alpha.real(), 1e-14);
  EXPECT_NEAR(c.mean(1), lambda * alpha.imag(), 1e-14);
  // Output is the coherent state |λα⟩: Q exponent of the vacuum.
  EXPECT_TRUE(c.gamma_b.isApprox(Matrix2::Identity(), 1e-14));
  // Outcome density (1 - λ²) exp(-(1 - λ²)|α|²) / π.
  const double l = 1.0 - lambda * lambda;
  EXPECT_NEAR(c.weight(), l / std::numbers::pi * std::exp(-l * std::norm(alpha)), 1e-15);
}

TEST(GaussCondition, WeightMatchesQuadratureOfCoherentProjection) {
  // The weight is the mode-A marginal of Q at α*, integrated over mode B numerically.
  std::mt19937 rng(5);
  for (int i = 0; i < 20; ++i) {
    const QExponent q = QExponent::from_covariance(random_covariance(rng));
    const Complex alpha(0.3, 0.2);
    const Conditioned c = gauss_condition(q, 0, alpha);
    const double marginal = integrate_2d(
        [&](double x, double y) {
          Vector r(4);
          r << alpha.real(), -alpha.imag(), x, y;
          return q.density(r);
        },
        0.0, 0.0, 12.0, 120);
    EXPECT_NEAR(c.weight(), marginal, 1e-8) << "instance " << i;
    // The output Q function is the conditional slice.
    Vector r(4);
    r << alpha.real(), -alpha.imag(), 0.2, -0.1;
    Vector rb(2);
    rb << 0.2, -0.1;
    const double out = c.weight() * QExponent(c.gamma_b).density(rb, c.mean);
    EXPECT_NEAR(out, q.density(r), 1e-12) << "instance " << i;
  }
}

TEST(GaussWindowCondition, RequiresPositiveWidth) {
  const QExponent q = QExponent::from_covariance(tmsv_covariance(0.5));
  EXPECT_NO_THROW(gauss_window_condition(q, 0.2, 1.0, 0.0));
  EXPECT_THROW(gauss_window_condition(q, 0.2, 0.0, 0.0), DomainError);
}

TEST(GaussWindowCondition, NarrowWindowRecoversPointConditioning) {
  const QExponent q = QExponent::from_covariance(tmsv_covariance(0.5));
  const double sigma = 1e-3;
  const Conditioned point = gauss_condition(q, 0, 0.3);
  const Conditioned win = gauss_window_condition(q, 0.3, sigma, 1.0);
  // The window integral of the outcome density is ≈ π σ² · P(β = 0).
  EXPECT_NEAR(win.weight() / (std::numbers::pi * sigma * sigma), point.weight(), 1e-6);
  EXPECT_LT((win.mean - point.mean).norm(), 1e-5);
}

TEST(GaussWindowCondition, LossyChannelCorrectionKEqualsLambda) {
  // For a TMSV resource with k = λ every outcome gives |λα⟩ after correction.
  const double lambda = 0.5;
  const QExponent q = QExponent::from_covariance(tmsv_covariance(lambda));
  const Conditioned w = gauss_window_condition(q, Complex(0.7, 0.2), 0.6, lambda);
  EXPECT_NEAR(w.mean(0), lambda * 0.7, 1e-14);
  EXPECT_NEAR(w.mean(1), lambda * 0.2, 1e-14);
  EXPECT_TRUE(w.gamma_b.isApprox(Matrix2::Identity(), 1e-13));
}

TEST(Quadrature, GaussLegendreIntegratesPolynomialsExactly) {
  const QuadratureRule r = gauss_legendre(10, -1.0, 2.0);
  double s = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], 19);
  EXPECT_NEAR(s, (std::pow(2.0, 20) - 1.0) / 20.0, 1e-8);
}

TEST(Quadrature, PolarGridIntegratesWindowGaussian) {
  const double sigma = 0.3;
  double s = 0.0;
  for (const auto& p : PolarGrid{}.points(sigma)) s += p.weight * std::exp(-std::norm(p.beta) / (sigma * sigma));
  // Exact integral over the disc of radius 5σ.
  EXPECT_NEAR(s, std::numbers::pi * sigma * sigma * (1.0 - std::exp(-25.0)), 1e-14);
  EXPECT_EQ(PolarGrid{}.points(0.0).size(), 1u);
  EXPECT_THROW((PolarGrid{5.0, 48, 20}.points(sigma)), DomainError);
}
