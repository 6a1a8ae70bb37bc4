#include "teleamp/gaussian.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "teleamp/errors.hpp"

namespace teleamp::gauss {

namespace {

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

void require_symmetric(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw DomainError(fmt::format("{}: matrix is {}x{}, not square", what, m.rows(), m.cols()));
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale) {
    throw DomainError(fmt::format("{}: asymmetry {:.3e} exceeds tolerance", what, asym));
  }
}

Matrix block_select(const Matrix& m, const std::vector<Eigen::Index>& idx) {
  Matrix out(idx.size(), idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    for (std::size_t j = 0; j < idx.size(); ++j) out(i, j) = m(idx[i], idx[j]);
  }
  return out;
}

void require_mode(int mode, int n_modes) {
  if (mode < 0 || mode >= n_modes) {
    throw DomainError(fmt::format("mode {} out of range for {} modes", mode, n_modes));
  }
}

struct Blocks {
  Matrix2 gamma_a;
  Matrix2 m;  // upper-right A|B block
  Matrix2 gamma_b;
};

Blocks split(const QExponent& joint, int project_mode) {
  if (joint.n_modes() != 2) {
    throw DomainError(fmt::format("conditioning needs a two-mode exponent, got {} modes", joint.n_modes()));
  }
  require_mode(project_mode, 2);
  const Matrix& g = joint.matrix();
  const Eigen::Index a = 2 * project_mode;
  const Eigen::Index b = 2 * (1 - project_mode);
  return {g.block<2, 2>(a, a), g.block<2, 2>(a, b), g.block<2, 2>(b, b)};
}

}  // namespace

SpdFactor::SpdFactor(const Matrix& m, std::string_view what) : llt_(m), dim_(m.rows()) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().cwiseAbs().maxCoeff();
  condition_ = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (llt_.info() != Eigen::Success || lo <= 0.0) {
    throw ConditioningError(fmt::format("{}: matrix is not positive definite (min eigenvalue {:.3e})", what, lo),
                            condition_);
  }
  if (condition_ > kMaxConditionNumber) {
    throw ConditioningError(fmt::format("{}: condition number {:.3e} exceeds {:.0e}", what, condition_,
                                        kMaxConditionNumber),
                            condition_);
  }
  log_det_ = 2.0 * llt_.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

Matrix SpdFactor::inverse() const { return symmetrized(llt_.solve(Matrix::Identity(dim_, dim_))); }

Matrix symplectic_form(int n_modes) {
  Matrix omega = Matrix::Zero(2 * n_modes, 2 * n_modes);
  for (int j = 0; j < n_modes; ++j) {
    omega(2 * j, 2 * j + 1) = 1.0;
    omega(2 * j + 1, 2 * j) = -1.0;
  }
  return omega;
}

std::vector<Eigen::Index> quadrature_indices(std::span<const int> modes) {
  std::vector<Eigen::Index> idx;
  idx.reserve(2 * modes.size());
  for (int m : modes) {
    idx.push_back(2 * m);
    idx.push_back(2 * m + 1);
  }
  return idx;
}

// ---------------------------------------------------------------------------
// CovMatrix

CovMatrix::CovMatrix(Matrix data) : data_(std::move(data)) {
  require_symmetric(data_, "covariance matrix");
  if (data_.rows() == 0 || data_.rows() % 2 != 0) {
    throw DomainError(fmt::format("covariance matrix dimension {} is not a positive even number", data_.rows()));
  }
}

Vector CovMatrix::symplectic_eigenvalues() const {
  // Eigenvalues of Ωγ come in pairs ±iν.
  const Matrix omega_gamma = symplectic_form(n_modes()) * data_;
  Eigen::EigenSolver<Matrix> eig(omega_gamma, false);
  std::vector<double> nu;
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) nu.push_back(std::abs(eig.eigenvalues()(i).imag()));
  std::sort(nu.begin(), nu.end());
  Vector out(n_modes());
  for (int j = 0; j < n_modes(); ++j) out(j) = 0.5 * (nu[2 * j] + nu[2 * j + 1]);
  return out;
}

bool CovMatrix::is_physical(double tol) const {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(data_, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() <= 0.0) return false;
  return symplectic_eigenvalues().minCoeff() >= 1.0 - tol;
}

CovMatrix CovMatrix::submatrix(std::span<const int> modes) const {
  for (int m : modes) require_mode(m, n_modes());
  return CovMatrix(block_select(data_, quadrature_indices(modes)));
}

CovMatrix direct_sum(const CovMatrix& a, const CovMatrix& b) {
  const Eigen::Index na = a.matrix().rows();
  const Eigen::Index nb = b.matrix().rows();
  Matrix out = Matrix::Zero(na + nb, na + nb);
  out.topLeftCorner(na, na) = a.matrix();
  out.bottomRightCorner(nb, nb) = b.matrix();
  return CovMatrix(std::move(out));
}

// ---------------------------------------------------------------------------
// QExponent

QExponent::QExponent(Matrix data) : data_(std::move(data)) {
  require_symmetric(data_, "Q exponent");
  data_ = symmetrized(data_);
  log_det_ = SpdFactor(data_, "Q exponent").log_det();
}

QExponent QExponent::from_covariance(const CovMatrix& gamma) {
  const Eigen::Index n = gamma.matrix().rows();
  SpdFactor f(gamma.matrix() + Matrix::Identity(n, n), "gamma + I");
  return QExponent(2.0 * f.inverse());
}

CovMatrix QExponent::to_covariance() const {
  const Eigen::Index n = data_.rows();
  SpdFactor f(data_, "Q exponent");
  return CovMatrix(2.0 * f.inverse() - Matrix::Identity(n, n));
}

QExponent QExponent::submatrix(std::span<const int> modes) const {
  for (int m : modes) require_mode(m, n_modes());
  return QExponent(block_select(data_, quadrature_indices(modes)));
}

double QExponent::density(const Vector& r, const Vector& mean) const {
  const Vector d = r - mean;
  const double quad = d.dot(data_ * d);
  return std::exp(0.5 * log_det_ - quad) / std::pow(std::numbers::pi, n_modes());
}

// ---------------------------------------------------------------------------
// Transforms

SymplecticTransform SymplecticTransform::identity(int n_modes) {
  return {Matrix::Identity(2 * n_modes, 2 * n_modes), Matrix::Zero(2 * n_modes, 2 * n_modes)};
}

CovMatrix SymplecticTransform::apply(const CovMatrix& gamma) const {
  if (gamma.matrix().rows() != S.rows()) {
    throw DomainError(fmt::format("transform of size {} applied to {}x{} covariance", S.rows(),
                                  gamma.matrix().rows(), gamma.matrix().cols()));
  }
  return CovMatrix(symmetrized(S * gamma.matrix() * S.transpose() + G));
}

SymplecticTransform SymplecticTransform::then(const SymplecticTransform& next) const {
  return {next.S * S, symmetrized(next.S * G * next.S.transpose() + next.G)};
}

bool SymplecticTransform::is_symplectic(double tol) const {
  const Matrix omega = symplectic_form(static_cast<int>(S.rows() / 2));
  return (S.transpose() * omega * S - omega).cwiseAbs().maxCoeff() <= tol;
}

CovMatrix tmsv_covariance(double lambda) {
  if (!(std::abs(lambda) < 1.0)) {
    throw DomainError(fmt::format("two-mode squeezing |lambda| = {} must be < 1", std::abs(lambda)));
  }
  const double l2 = lambda * lambda;
  const double c = (1.0 + l2) / (1.0 - l2);  // cosh 2r
  const double s = 2.0 * lambda / (1.0 - l2);  // sinh 2r
  Matrix m(4, 4);
  m << c, 0, s, 0,
       0, c, 0, -s,
       s, 0, c, 0,
       0, -s, 0, c;
  return CovMatrix(std::move(m));
}

SymplecticTransform loss_channel(double eta, int n_modes, std::span<const int> modes) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError(fmt::format("transmittance eta = {} is outside [0, 1]", eta));
  SymplecticTransform t = SymplecticTransform::identity(n_modes);
  for (Eigen::Index i : quadrature_indices(modes)) {
    if (i >= 2 * n_modes) throw DomainError(fmt::format("mode index out of range for {} modes", n_modes));
    t.S(i, i) = std::sqrt(eta);
    t.G(i, i) = 1.0 - eta;
  }
  return t;
}

CovMatrix lossy_mix(const CovMatrix& gamma, double eta, std::span<const int> modes) {
  return loss_channel(eta, gamma.n_modes(), modes).apply(gamma);
}

SymplecticTransform beamsplitter(double T, int n_modes, int mode_a, int mode_b, ReflectionSign sign) {
  if (!(T >= 0.0 && T <= 1.0)) throw DomainError(fmt::format("beam-splitter transmittance T = {} is outside [0, 1]", T));
  require_mode(mode_a, n_modes);
  require_mode(mode_b, n_modes);
  if (mode_a == mode_b) throw DomainError("beam splitter needs two distinct modes");
  const double t = std::sqrt(T);
  const double r = (sign == ReflectionSign::kPositive ? 1.0 : -1.0) * std::sqrt(1.0 - T);
  SymplecticTransform bs = SymplecticTransform::identity(n_modes);
  for (int q = 0; q < 2; ++q) {
    const Eigen::Index i = 2 * mode_a + q;
    const Eigen::Index j = 2 * mode_b + q;
    bs.S(i, i) = t;
    bs.S(i, j) = r;
    bs.S(j, i) = -r;
    bs.S(j, j) = t;
  }
  return bs;
}

CovMatrix build_effective_cov(const AmplifierParams& params, TapConvention convention) {
  params.validate();
  constexpr int kA = 0, kB = 1, kC = 2, kD = 3;
  const std::array<int, 2> pair{0, 1};
  const CovMatrix in_ab = lossy_mix(tmsv_covariance(params.lambda), params.eta_ab, pair);
  const CovMatrix in_cd = lossy_mix(tmsv_covariance(params.mu), params.eta_cd, pair);

  const ReflectionSign bd_sign =
      convention == TapConvention::kMatched ? ReflectionSign::kPositive : ReflectionSign::kNegative;
  const std::array<int, 2> detected{kC, kD};
  const SymplecticTransform chain = beamsplitter(params.T, 4, kA, kC)
                                        .then(beamsplitter(params.T, 4, kB, kD, bd_sign))
                                        .then(loss_channel(params.eta_apd, 4, detected));
  return chain.apply(direct_sum(in_ab, in_cd));
}

// ---------------------------------------------------------------------------
// Conditioning

double Conditioned::weight() const { return std::exp(log_weight); }

Conditioned gauss_condition(const QExponent& joint, int project_mode, Complex alpha,
                            std::optional<double> log_det_norm) {
  const Blocks blk = split(joint, project_mode);
  const Matrix2 ups = conjugation();
  SpdFactor fb(blk.gamma_b, "Gamma_B");
  const Matrix2 gb_inv = fb.inverse();

  Conditioned out;
  out.gamma_b = blk.gamma_b;
  out.gamma_a_tilde = symmetrized(ups.transpose() * blk.gamma_a * ups -
                                  ups.transpose() * blk.m * gb_inv * blk.m.transpose() * ups);
  out.displacement = -gb_inv * blk.m.transpose() * ups;

  const Vector2 d = phase_vector(alpha);
  out.mean = out.displacement * d;
  out.log_prefactor = -std::log(std::numbers::pi) + 0.5 * (log_det_norm.value_or(joint.log_det()) - fb.log_det());
  out.log_weight = out.log_prefactor - d.dot(out.gamma_a_tilde * d);
  return out;
}

Conditioned gauss_window_condition(const QExponent& joint, Complex alpha, double sigma, double k,
                                   std::optional<double> log_det_norm) {
  if (!(sigma > 0.0)) throw DomainError(fmt::format("acceptance width sigma = {} must be positive", sigma));
  const Blocks blk = split(joint, 0);
  const Matrix2 ups = conjugation();
  const Matrix2 sig = Matrix2::Identity() / (sigma * sigma);
  const Matrix2 ga_conj = ups.transpose() * blk.gamma_a * ups;

  const Matrix2 gamma_beta = symmetrized(k * k * blk.gamma_b + ga_conj + sig + k * ups.transpose() * blk.m +
                                         k * blk.m.transpose() * ups);
  const Matrix2 l_alpha = ga_conj + k * blk.m.transpose() * ups;
  const Matrix2 l_r = ups.transpose() * blk.m + k * blk.gamma_b;

  std::optional<SpdFactor> fbeta;
  try {
    fbeta.emplace(gamma_beta, "Gamma_beta");
  } catch (const ConditioningError& e) {
    throw WindowDivergenceError(fmt::format("acceptance-window integral diverges: {}", e.what()));
  }
  const Matrix2 gbeta_inv = fbeta->inverse();

  Conditioned out;
  out.gamma_b = symmetrized(blk.gamma_b - l_r.transpose() * gbeta_inv * l_r);
  SpdFactor fb(out.gamma_b, "windowed Gamma_B");
  const Matrix2 gb_inv = fb.inverse();
  const Matrix2 cross = blk.m.transpose() * ups - l_r.transpose() * gbeta_inv * l_alpha;
  out.gamma_a_tilde = symmetrized(ga_conj - l_alpha.transpose() * gbeta_inv * l_alpha -
                                  cross.transpose() * gb_inv * cross);
  out.displacement = -gb_inv * cross;

  const Vector2 d = phase_vector(alpha);
  out.mean = out.displacement * d;
  out.log_prefactor = -0.5 * fbeta->log_det() + 0.5 * (log_det_norm.value_or(joint.log_det()) - fb.log_det());
  out.log_weight = out.log_prefactor - d.dot(out.gamma_a_tilde * d);
  return out;
}

}  // namespace teleamp::gauss
