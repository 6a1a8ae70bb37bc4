#include "teleamp/phase_space.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "teleamp/errors.hpp"

namespace teleamp::phase {

namespace {

std::vector<int> coeffs_of(const std::vector<GaussTerm>& terms) {
  std::vector<int> c;
  for (const auto& t : terms) c.push_back(t.coeff);
  return c;
}

std::vector<double> logs_of(const std::vector<GaussTerm>& terms) {
  std::vector<double> l;
  for (const auto& t : terms) l.push_back(t.log_k);
  return l;
}

// Relative weights C_j K_j / total.
std::vector<double> normalized_weights(const GaussMixQ& q) {
  std::vector<double> w;
  for (const auto& t : q.terms()) w.push_back(t.coeff * std::exp(t.log_k) / q.total());
  return w;
}

}  // namespace

double signed_log_sum(const std::vector<int>& coeffs, const std::vector<double>& logs) {
  if (logs.empty()) return 0.0;
  const double shift = *std::max_element(logs.begin(), logs.end());
  double s = 0.0;
  for (std::size_t i = 0; i < logs.size(); ++i) s += coeffs[i] * std::exp(logs[i] - shift);
  return s * std::exp(shift);
}

GaussMixQ::GaussMixQ(std::vector<GaussTerm> terms) : terms_(std::move(terms)) {
  if (terms_.empty()) throw DomainError("Gaussian mixture needs at least one term");
  total_ = signed_log_sum(coeffs_of(terms_), logs_of(terms_));
}

GaussMixQ GaussMixQ::gaussian(const QExponent& gamma) {
  const auto n = gamma.matrix().rows();
  return GaussMixQ({GaussTerm{1, 0.0, gamma, Vector::Zero(n), Matrix::Zero(n, 2)}});
}

double GaussMixQ::evaluate(const Vector& r) const {
  double s = 0.0;
  for (const auto& t : terms_) s += t.coeff * std::exp(t.log_k) * t.gamma.density(r, t.mean);
  return s / total_;
}

GaussMixQ GaussMixQ::marginal(int mode) const {
  const std::array<int, 1> keep{mode};
  const auto idx = gauss::quadrature_indices(keep);
  std::vector<GaussTerm> out;
  for (const auto& t : terms_) {
    // The Q-function covariance is Γ⁻¹/2; marginalizing keeps its block.
    const Matrix cov = gauss::SpdFactor(t.gamma.matrix(), "marginal Gamma").inverse();
    const Matrix block = cov(idx, idx);
    QExponent g(gauss::SpdFactor(block, "marginal block").inverse());
    out.push_back(GaussTerm{t.coeff, t.log_k - std::log(total_), std::move(g), t.mean(idx), t.map(idx, Eigen::all)});
  }
  return GaussMixQ(std::move(out));
}

GaussMixQ resource_q(const AmplifierParams& params, gauss::TapConvention convention) {
  params.validate();
  const gauss::CovMatrix eff = gauss::build_effective_cov(params, convention);
  if (!eff.is_physical()) throw DomainError("effective four-mode covariance is not physical");

  // Inclusion-exclusion of (I - |0⟩⟨0|)_C ⊗ (I - |0⟩⟨0|)_D.
  const std::array<std::vector<int>, 4> subsets{{{0, 1}, {0, 1, 2}, {0, 1, 3}, {0, 1, 2, 3}}};
  const std::array<int, 4> coeffs{+1, -1, -1, +1};
  const std::array<int, 2> ab{0, 1};

  std::vector<GaussTerm> terms;
  for (std::size_t j = 0; j < subsets.size(); ++j) {
    const QExponent full = QExponent::from_covariance(eff.submatrix(subsets[j]));
    QExponent gamma = full.submatrix(ab);
    const double log_k = 0.5 * (full.log_det() - gamma.log_det());
    terms.push_back(GaussTerm{coeffs[j], log_k, std::move(gamma), Vector::Zero(4), Matrix::Zero(4, 2)});
  }
  GaussMixQ q(std::move(terms));
  if (!(q.total() > 0.0)) throw ProbabilityError(fmt::format("heralding probability P_AB = {} is not positive", q.total()));
  return q;
}

GaussMixQ teleamp_beta0(const GaussMixQ& resource, Complex alpha) {
  std::vector<GaussTerm> out;
  for (const auto& t : resource.terms()) {
    const gauss::Conditioned c = gauss::gauss_condition(t.gamma, 0, alpha);
    out.push_back(GaussTerm{t.coeff, t.log_k + c.log_weight, QExponent(c.gamma_b), c.mean, c.displacement});
  }
  GaussMixQ q(std::move(out));
  if (!(q.total() > 0.0)) throw ProbabilityError(fmt::format("outcome density P_0 = {} is not positive", q.total()));
  return q;
}

Windowed teleamp_windowed(const GaussMixQ& resource, Complex alpha, double sigma, double k) {
  std::vector<GaussTerm> out;
  for (const auto& t : resource.terms()) {
    const gauss::Conditioned c = gauss::gauss_window_condition(t.gamma, alpha, sigma, k);
    out.push_back(GaussTerm{t.coeff, t.log_k + c.log_weight, QExponent(c.gamma_b), c.mean, c.displacement});
  }
  GaussMixQ q(std::move(out));
  const double p_ab = resource.total();
  Windowed w{q, q.total(), q.total() / p_ab};
  if (!(w.p_tot > 0.0)) throw ProbabilityError(fmt::format("acceptance probability P_tot = {} is not positive", w.p_tot));
  if (std::abs(p_ab * w.p_tele - w.p_tot) > 1e-12 * w.p_tot) {
    throw ProbabilityError("P_tot differs from P_AB * P_tele");
  }
  return w;
}

OutputAnalysis analyze_q(const GaussMixQ& state, Complex alpha, std::optional<double> g_report) {
  if (state.n_modes() != 1) throw DomainError("output metrics need a single-mode state");
  const std::vector<double> w = normalized_weights(state);
  const auto& terms = state.terms();

  OutputAnalysis out;
  out.mean.setZero();
  Matrix2 second = Matrix2::Zero();
  double small_gain = 0.0;
  for (std::size_t j = 0; j < terms.size(); ++j) {
    const Vector2 m = terms[j].mean;
    out.mean += w[j] * m;
    const Matrix2 g_inv = gauss::SpdFactor(terms[j].gamma.matrix(), "output Gamma_B").inverse();
    second += w[j] * (2.0 * g_inv + 4.0 * m * m.transpose());
    small_gain += w[j] * terms[j].map(0, 0);
  }
  out.covariance = second - 4.0 * out.mean * out.mean.transpose() - Matrix2::Identity();
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  out.covariance_physical = gauss::CovMatrix(out.covariance).is_physical(1e-9);

  Metrics& m = out.metrics;
  m.mean_re = out.mean(0);
  m.mean_im = out.mean(1);
  m.gain = alpha == 0.0 ? small_gain : (gauss::to_complex(out.mean) / alpha).real();
  m.vx = out.covariance(0, 0) / 2.0;
  m.vp = out.covariance(1, 1) / 2.0;
  m.uncertainty_product = m.vx * m.vp;
  const Vector2 target = gauss::phase_vector(g_report.value_or(m.gain) * alpha);
  m.fidelity = std::numbers::pi * state.evaluate(target);
  return out;
}

Metrics metrics_q(const GaussMixQ& state, Complex alpha, std::optional<double> g_report) {
  return analyze_q(state, alpha, g_report).metrics;
}

}  // namespace teleamp::phase
