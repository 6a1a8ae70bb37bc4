#pragma once

// Real-matrix algebra for Gaussian states in the (x1, p1, ..., xN, pN)
// quadrature ordering with x = (a + a†)/√2, so the vacuum covariance is I.
// Husimi Q-functions are written over r = [Re ω1, Im ω1, ...] as
//   Q(r) = √det Γ / π^N · exp(-rᵀ Γ r),   Γ = 2 (γ + I)⁻¹.

#include <complex>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "teleamp/params.hpp"

namespace teleamp::gauss {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Matrix2 = Eigen::Matrix2d;
using Vector2 = Eigen::Vector2d;
using Complex = std::complex<double>;

/// Inversions are refused above this 2-norm condition number.
inline constexpr double kMaxConditionNumber = 1e12;

/// Cholesky factorization of a symmetric positive-definite matrix with a
/// condition-number guard. Throws ConditioningError on failure.
class SpdFactor {
 public:
  SpdFactor(const Matrix& m, std::string_view what);

  double log_det() const { return log_det_; }
  double condition_number() const { return condition_; }
  Matrix solve(const Matrix& rhs) const { return llt_.solve(rhs); }
  Matrix inverse() const;

 private:
  Eigen::LLT<Matrix> llt_;
  double log_det_ = 0.0;
  double condition_ = 1.0;
  Eigen::Index dim_ = 0;
};

/// Standard symplectic form ⊕ [[0, 1], [-1, 0]].
Matrix symplectic_form(int n_modes);

/// Conjugation matrix Υ = diag(1, -1): maps [Re z, Im z] to [Re z*, Im z*].
inline Matrix2 conjugation() { return Eigen::Vector2d(1.0, -1.0).asDiagonal(); }

/// [Re z, Im z].
inline Vector2 phase_vector(Complex z) { return {z.real(), z.imag()}; }
inline Complex to_complex(const Vector2& v) { return {v(0), v(1)}; }

/// Quadrature indices (x, p) of the listed modes, in order.
std::vector<Eigen::Index> quadrature_indices(std::span<const int> modes);

class CovMatrix {
 public:
  /// Throws DomainError unless `data` is square, even-sized and symmetric to 1e-12 (relative).
  explicit CovMatrix(Matrix data);

  static CovMatrix vacuum(int n_modes) { return CovMatrix(Matrix::Identity(2 * n_modes, 2 * n_modes)); }

  int n_modes() const { return static_cast<int>(data_.rows() / 2); }
  const Matrix& matrix() const { return data_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return data_(i, j); }

  /// Ascending, one value per mode.
  Vector symplectic_eigenvalues() const;
  bool is_physical(double tol = 1e-9) const;

  /// Marginal covariance of the listed modes.
  CovMatrix submatrix(std::span<const int> modes) const;

 private:
  Matrix data_;
};

CovMatrix direct_sum(const CovMatrix& a, const CovMatrix& b);

/// Exponent matrix Γ of a Gaussian Husimi function.
class QExponent {
 public:
  /// Throws DomainError unless symmetric, ConditioningError unless positive definite.
  explicit QExponent(Matrix data);

  static QExponent from_covariance(const CovMatrix& gamma);
  CovMatrix to_covariance() const;

  int n_modes() const { return static_cast<int>(data_.rows() / 2); }
  const Matrix& matrix() const { return data_; }
  double log_det() const { return log_det_; }

  QExponent submatrix(std::span<const int> modes) const;

  /// Normalized Gaussian √det Γ / π^N · exp(-(r - mean)ᵀ Γ (r - mean)).
  double density(const Vector& r, const Vector& mean) const;
  double density(const Vector& r) const { return density(r, Vector::Zero(r.size())); }

 private:
  Matrix data_;
  double log_det_ = 0.0;
};

/// γ → S γ Sᵀ + G.
struct SymplecticTransform {
  Matrix S;
  Matrix G;

  static SymplecticTransform identity(int n_modes);

  CovMatrix apply(const CovMatrix& gamma) const;
  /// The transform that applies `*this` first and then `next`.
  SymplecticTransform then(const SymplecticTransform& next) const;
  /// SᵀΩS = Ω within `tol` (max-abs).
  bool is_symplectic(double tol = 1e-10) const;
};

/// Covariance of Σ λⁿ|n,n⟩ (normalized), λ = tanh r. Throws DomainError for |λ| ≥ 1.
CovMatrix tmsv_covariance(double lambda);

/// Pure-loss channel of transmittance eta on the listed modes: ηγ + (1-η)I there.
SymplecticTransform loss_channel(double eta, int n_modes, std::span<const int> modes);
CovMatrix lossy_mix(const CovMatrix& gamma, double eta, std::span<const int> modes);

enum class ReflectionSign {
  kPositive,  ///< x_a → √T x_a + √R x_b,  x_b → -√R x_a + √T x_b
  kNegative,  ///< mirrored reflection sign
};

/// Beam splitter of intensity transmittance T coupling two modes of an n-mode system.
SymplecticTransform beamsplitter(double T, int n_modes, int mode_a, int mode_b,
                                 ReflectionSign sign = ReflectionSign::kPositive);

/// Sign layout of the two tapping beam splitters (A,C) and (B,D).
enum class TapConvention {
  kMatched,   ///< both pairs use ReflectionSign::kPositive
  kMirrored,  ///< (B,D) uses the opposite sign; exists to exercise the λ_eff lock check
};

/// Four-mode covariance (A, B, C, D) just before the on-off detectors on C and D.
CovMatrix build_effective_cov(const AmplifierParams& params,
                              TapConvention convention = TapConvention::kMatched);

/// Result of projecting one mode of a two-mode Gaussian Q-function onto a
/// re-normalized coherent state. The unnormalized output Q-function of the
/// remaining mode is  weight · √det Γ_B / π · exp(-(r - mean)ᵀ Γ_B (r - mean)).
struct Conditioned {
  Matrix2 gamma_b;        ///< output exponent
  Matrix2 displacement;   ///< D, with mean = D d
  Matrix2 gamma_a_tilde;  ///< quadratic form of the weight
  Vector2 mean;
  double log_prefactor = 0.0;  ///< log K at d = 0
  double log_weight = 0.0;     ///< log K(d)

  double weight() const;
};

/// Projects `project_mode` (0 or 1) of the two-mode Q-function
/// √det Γ / π² exp(-rᵀΓr) onto (1/√π)|α*⟩, i.e. the teleportation outcome β = 0
/// for input |α⟩; the conjugation is carried by Υ. `log_det_norm` replaces
/// log det Γ in the prefactor for terms whose normalization differs from Γ's.
Conditioned gauss_condition(const QExponent& joint, int project_mode, Complex alpha,
                            std::optional<double> log_det_norm = std::nullopt);

/// Integrates the conditional output over outcomes β with acceptance
/// exp(-|β|²/σ²) after the corrective shift ω → ω + kβ. Mode 0 is the
/// measured mode. Throws WindowDivergenceError when the β-integral diverges.
Conditioned gauss_window_condition(const QExponent& joint, Complex alpha, double sigma, double k,
                                   std::optional<double> log_det_norm = std::nullopt);

}  // namespace teleamp::gauss
