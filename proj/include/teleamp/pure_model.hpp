#pragma once

// Closed-form pure-state teleamplifier: ideal resource Ĝ|Ψ(λ)⟩ with β = 0
// conditioning, resource preparation by generalized photon subtraction, and
// the truncated amplifier Ĝ_N with a Gaussian acceptance window.

#include <complex>
#include <vector>

#include "teleamp/params.hpp"

namespace teleamp::pure {

using Complex = std::complex<double>;

/// ⟨a⟩/α of the normalized output Ĝ|λα⟩.
double gain_alpha(double lambda, double g, double alpha);
/// |⟨gλα|φ⟩|² for the normalized output φ ∝ Ĝ|λα⟩.
double fidelity_alpha(double lambda, double g, double alpha);

/// First and second moments of the normalized output Ĝ|λα⟩.
struct OutputMoments {
  Complex mean;   ///< ⟨a⟩
  Complex a2;     ///< ⟨a²⟩
  double nbar;    ///< ⟨a†a⟩
  double norm2;   ///< ⟨ψ|Ĝ²|ψ⟩ for |ψ⟩ = |λα⟩
};
OutputMoments output_moments(double lambda, double g, Complex alpha);

/// Overlap of the normalized output with the coherent state |target⟩.
double fidelity_with(double lambda, double g, Complex alpha, Complex target);

/// Gain, variances and fidelity (default target: |gλα⟩, matching fidelity_alpha).
/// Probabilities are left at zero. At α = 0 the gain is the limit λg.
Metrics metrics_pure(double lambda, double g, Complex alpha);
Metrics metrics_pure(double lambda, double g, Complex alpha, Complex fidelity_target);

/// Resource prepared by joint photon subtraction with auxiliary squeezing μ
/// and photon-number-resolving detection on |1,1⟩.
struct ResourceEngineering {
  double lambda = 0.0;
  double mu = 0.0;
  double T = 1.0;
  double lambda_eff = 0.0;  ///< Tλ + Rμ
  double g = 1.0;           ///< nominal gain
  double g_eff = 0.0;       ///< λ_eff · g
  double p_s = 0.0;         ///< success probability of the |1,1⟩ heralding

  /// Normalized Schmidt coefficient of |n,n⟩.
  double coefficient(int n) const;
  std::vector<double> coefficients(int count) const;
};

/// Throws PoleError when (Rλ + Tμ)(Rμ + Tλ) vanishes, DomainError for |λ_eff| ≥ 1.
ResourceEngineering resource_engineering(double lambda, double mu, double T);

struct GainSensitivity {
  double g_eff_approx = 0.0;  ///< Tλ(1 + Rλ/(Rλ + Tμ))
  double dgeff_dmu = 0.0;     ///< 2R - Rλ²/(Rλ + Tμ)²
  double dgeff_dmu_from_gain = 0.0;  ///< 2R - λ²(g_eff - λ_eff)²/(RT²(λ-μ)⁴)
  /// False when R or |μ|/|λ| are not small (> 0.1) and the approximation is unreliable.
  bool approximation_regime = true;
};

GainSensitivity geff_sensitivity(double lambda, double mu, double T);

/// Truncated amplifier Ĝ_N applied to Ψ(λ).
struct GnModel {
  double lambda = 0.0;
  double g = 1.0;
  int N = 0;
  double p_n = 1.0;      ///< normalization P_N
  double alpha_th = 0.0; ///< threshold amplitude
  /// Normalized Schmidt coefficients up to the point where the tail is below 1e-20.
  std::vector<double> coefficients;
};

GnModel gn_model(double lambda, double g, int N);

/// Probability density of the outcome β for the Ψ_N resource (valid inside
/// |α+β| < α_th only).
double beta_density_gn(double lambda, double g, int N, Complex alpha, Complex beta);
/// Probability density of the outcome β for the ideal Ĝ|Ψ(λ)⟩ resource.
double beta_density_g(double lambda, double g, Complex alpha, Complex beta);
/// Probability density of the outcome β for the bare TMSV resource.
double beta_density_tmsv(double lambda, Complex alpha, Complex beta);

struct WindowProbability {
  double p_tele = 0.0;
  bool converges = false;       ///< σ² < 1/(λ²g² - 1)
  bool within_support = false;  ///< three-standard-deviation support inequality
  bool valid() const { return converges && within_support; }
};

/// Closed-form acceptance probability for the Ψ_N resource with Gaussian window σ.
/// Results with valid() == false are returned for diagnostics only.
WindowProbability ptele_window(double lambda, double g, int N, double sigma, double alpha);

}  // namespace teleamp::pure
