#pragma once

// Brute-force truncated Fock-space model of the teleamplifier. Every state is
// an explicit amplitude vector; nothing here reuses the closed forms of the
// pure or phase-space models, so it serves as their oracle.

#include <array>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "teleamp/gaussian.hpp"
#include "teleamp/params.hpp"
#include "teleamp/quadrature.hpp"

namespace teleamp::fock {

using Complex = std::complex<double>;
using Amplitudes = Eigen::VectorXcd;

/// Default per-mode truncation, adequate for |α| ≤ 1.2.
inline constexpr int kDefaultDim = 30;
/// Probability allowed on the top Fock level of any mode in an accepted result.
inline constexpr double kTopLevelTolerance = 1e-8;

/// Pure (possibly unnormalized) state of n modes, each truncated to `dim`
/// levels. Mode 0 is the most significant index digit.
class FockVec {
 public:
  FockVec(int n_modes, int dim);
  FockVec(int n_modes, int dim, Amplitudes amplitudes);

  static FockVec basis(int dim, std::span<const int> occupation);

  int n_modes() const { return n_modes_; }
  int dim() const { return dim_; }
  std::size_t size() const { return static_cast<std::size_t>(amps_.size()); }
  std::size_t stride(int mode) const;
  std::size_t index(std::span<const int> occupation) const;
  std::size_t index(std::initializer_list<int> occupation) const {
    return index(std::span<const int>(occupation.begin(), occupation.size()));
  }

  const Amplitudes& amplitudes() const { return amps_; }
  Amplitudes& amplitudes() { return amps_; }
  Complex operator[](std::size_t i) const { return amps_(static_cast<Eigen::Index>(i)); }
  Complex& operator[](std::size_t i) { return amps_(static_cast<Eigen::Index>(i)); }

  double norm() const { return amps_.norm(); }
  double norm_squared() const { return amps_.squaredNorm(); }
  FockVec normalized() const;
  /// ⟨this|other⟩.
  Complex inner(const FockVec& other) const;

  /// Photon-number distribution of one mode (unnormalized squares).
  Eigen::VectorXd occupation(int mode) const;
  /// Largest relative probability found on the top level of any mode.
  double top_level_weight() const;

 private:
  int n_modes_;
  int dim_;
  Amplitudes amps_;
};

/// Incoherent mixture Σ w_i |ψ_i⟩⟨ψ_i| with normalized members; the total
/// weight is the probability (or probability density) of the heralding event.
struct FockMix {
  struct Member {
    double weight;
    FockVec state;
  };
  std::vector<Member> members;

  double total_weight() const;
};

enum class Ladder { kAnnihilate, kCreate };
enum class Detector { kPnr, kOnOff };

/// e^{-|α|²/2} αⁿ/√n!. Throws TruncationError if |α|² + 5|α| + 10 ≥ dim or the
/// truncated vector loses more than 1e-10 of its norm.
FockVec coherent_state(Complex alpha, int dim);

/// √(1-λ²) Σ λⁿ|n,n⟩. Throws TruncationError unless |λ|^dim < 1e-8.
FockVec tmsv_state(double lambda, int dim);

FockVec apply_ladder(const FockVec& state, int mode, Ladder kind);
/// Multiplies |…n…⟩ by f(n) on one mode.
FockVec apply_diagonal(const FockVec& state, int mode, const std::vector<Complex>& factors);
/// Dense single-mode operator acting on one mode.
FockVec apply_single_mode(const FockVec& state, int mode, const Eigen::MatrixXcd& op);

/// Ĝ = ââ† + (g-2)â†â, diagonal (g-1)n + 1.
FockVec amplifier_G(const FockVec& state, double g, int mode);
/// Ĝ_N = g^{n-N} for n ≤ N, 1 above.
FockVec amplifier_GN(const FockVec& state, double g, int N, int mode);

/// Beam splitter exp[θ(a†b - ab†)], cos θ = √T, acting on two modes. Exact
/// within each total-photon-number block that fits the truncation; throws
/// TruncationError if amplitude sits in blocks that do not.
FockVec beam_splitter(const FockVec& state, double T, int mode_a, int mode_b,
                      gauss::ReflectionSign sign = gauss::ReflectionSign::kPositive);

/// Matrix of the displacement D(z) on `dim` levels (computed on a padded space).
Eigen::MatrixXcd displacement_matrix(Complex z, int dim);

/// Removes `mode` by contracting it with the coefficients c: out = Σ_n c_n ψ(…n…).
FockVec contract_mode(const FockVec& state, int mode, const Amplitudes& coefficients);

struct PreparedResource {
  FockMix state;  ///< modes (A, B)
  double p_ab = 0.0;
  double omitted_weight = 0.0;  ///< on-off branches dropped from the mixture
  /// Outcome probabilities of the two detectors: {click,click}, {click,none},
  /// {none,click}, {none,none}.
  std::array<double, 4> outcome_probabilities{};
};

/// TMSV(λ)_AB ⊗ TMSV(μ)_CD, tapping beam splitters (A,C) and (B,D), then
/// conditioning on C,D: |1,1⟩ for PNR, a double click for on-off detectors.
PreparedResource prepare_resource_fock(double lambda, double mu, double T, int dim, Detector detector,
                                       gauss::TapConvention convention = gauss::TapConvention::kMatched);

/// Resource Ĝ|Ψ(λ)⟩ (normalized), the target of the preparation.
FockMix ideal_resource(double lambda, double g, int dim);
/// Truncated-amplifier resource Ψ_N(λ).
FockMix gn_resource(double lambda, double g, int N, int dim);

struct Teleported {
  FockMix output;  ///< mode B; total weight = outcome probability (density)
  double weight = 0.0;
};

/// Teleports an arbitrary single-mode input through `resource` for the outcome
/// β: mode A is contracted with (1/√π) Σ ψ_in(n) after D(β) acts on the input,
/// then D(-kβ) is applied to mode B. Weights are normalized by the resource weight.
Teleported teleport_input_fock(const FockMix& resource, const FockVec& input, Complex beta, double k);
Teleported teleport_fock(const FockMix& resource, Complex alpha, Complex beta, double k);

struct WindowTeleported {
  FockMix output;
  double p_tele = 0.0;
};

/// Quadrature over β of teleport_fock weighted by exp(-|β|²/σ²).
WindowTeleported windowed_teleport_fock(const FockMix& resource, Complex alpha, double sigma, double k,
                                        const PolarGrid& grid = {});

/// Teleportation through â|Ψ(λ)⟩ at β = 0; returns the normalized output.
/// `dim` is the resource truncation and must exceed input.dim().
FockVec photon_addition_teleport_demo(double lambda, const FockVec& input, int dim);

/// Gain ⟨a⟩/α, quadrature variances and fidelity against |target⟩ (default:
/// the output mean, i.e. |g(α)α⟩). Throws ProbabilityError on zero weight.
Metrics metrics_fock(const FockMix& state, Complex alpha, std::optional<Complex> fidelity_target = std::nullopt);

/// Husimi function |⟨ω|ψ⟩|²/π^n, with one ω per mode.
double husimi_q(const FockVec& state, std::span<const Complex> omega);
/// Weighted Husimi function of a mixture, normalized by the total weight.
double husimi_q(const FockMix& state, std::span<const Complex> omega);

}  // namespace teleamp::fock
