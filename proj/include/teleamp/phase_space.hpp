#pragma once

// Realistic teleamplifier in the Husimi representation. The conditionally
// prepared resource and every teleported output are signed sums of Gaussian
// terms; each stage keeps the unnormalized term weights so that their sum is
// the success probability (or density) of that stage.

#include <optional>
#include <vector>

#include "teleamp/gaussian.hpp"
#include "teleamp/params.hpp"

namespace teleamp::phase {

using gauss::Complex;
using gauss::Matrix;
using gauss::Matrix2;
using gauss::QExponent;
using gauss::Vector;
using gauss::Vector2;

/// coeff · exp(log_k) · √det Γ / π^N · exp(-(r - mean)ᵀ Γ (r - mean)),
/// where mean = map · d_α for teleported outputs and zero for the resource.
struct GaussTerm {
  int coeff = 1;
  double log_k = 0.0;
  QExponent gamma;
  Vector mean;
  Matrix map;
};

class GaussMixQ {
 public:
  explicit GaussMixQ(std::vector<GaussTerm> terms);

  /// A single normalized Gaussian with zero mean.
  static GaussMixQ gaussian(const QExponent& gamma);

  const std::vector<GaussTerm>& terms() const { return terms_; }
  int n_modes() const { return terms_.front().gamma.n_modes(); }

  /// Σ C_j K_j, assembled from log-magnitudes.
  double total() const { return total_; }

  /// Normalized Q(r).
  double evaluate(const Vector& r) const;

  /// Normalized mixture of the marginal on one mode.
  GaussMixQ marginal(int mode) const;

 private:
  std::vector<GaussTerm> terms_;
  double total_ = 0.0;
};

/// Signed sum Σ coeff_i exp(log_i) evaluated with a common shift.
double signed_log_sum(const std::vector<int>& coeffs, const std::vector<double>& logs);

/// Resource prepared by on-off clicks on C and D. total() is P_AB.
/// Throws ProbabilityError when P_AB ≤ 0.
GaussMixQ resource_q(const AmplifierParams& params,
                     gauss::TapConvention convention = gauss::TapConvention::kMatched);

/// Output mode B for teleportation outcome β = 0 and input |α⟩.
/// total() is the unnormalized outcome density P_0 (divide by P_AB for the conditional density).
GaussMixQ teleamp_beta0(const GaussMixQ& resource, Complex alpha);

struct Windowed {
  GaussMixQ state;
  double p_tot = 0.0;   ///< Σ C_j K̃_j
  double p_tele = 0.0;  ///< P_tot / P_AB
};

/// Output averaged over accepted outcomes with window exp(-|β|²/σ²) and
/// corrective displacement kβ. Requires σ > 0.
Windowed teleamp_windowed(const GaussMixQ& resource, Complex alpha, double sigma, double k);

struct OutputAnalysis {
  Metrics metrics;
  Vector2 mean;        ///< d̄ = [Re⟨a⟩, Im⟨a⟩]
  Matrix2 covariance;  ///< γ of the output, vacuum = I
  bool covariance_physical = true;  ///< symplectic eigenvalue ≥ 1 - 1e-9
};

/// Gain, covariance and fidelity with |g_report·α⟩ (default g_report = g(α)).
/// At α = 0 the gain is the small-amplitude limit read off the displacement maps.
OutputAnalysis analyze_q(const GaussMixQ& state, Complex alpha,
                         std::optional<double> g_report = std::nullopt);
Metrics metrics_q(const GaussMixQ& state, Complex alpha, std::optional<double> g_report = std::nullopt);

}  // namespace teleamp::phase
