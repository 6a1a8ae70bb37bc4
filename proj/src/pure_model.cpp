#include "teleamp/pure_model.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "teleamp/errors.hpp"

namespace teleamp::pure {

namespace {

void require_lambda(double lambda) {
  if (!(std::abs(lambda) < 1.0)) throw DomainError(fmt::format("|lambda| = {} must be < 1", std::abs(lambda)));
}

// g^{2N} P_N.
double scaled_pn(double lambda, double g, int N) {
  const double gl2 = g * g * lambda * lambda;
  const double l2 = lambda * lambda;
  double head;
  if (std::abs(1.0 - gl2) < 1e-12) {
    head = (1.0 - l2) * (N + 1);
  } else {
    head = (1.0 - l2) / (1.0 - gl2) * (1.0 - std::pow(gl2, N + 1));
  }
  return head + std::pow(g, 2 * N) * std::pow(l2, N + 1);
}

}  // namespace

double gain_alpha(double lambda, double g, double alpha) {
  require_lambda(lambda);
  const double c = g - 1.0;
  const double x = lambda * lambda * alpha * alpha;
  const double u = 1.0 + c * x;
  return lambda + lambda * c * u / (u * u + c * c * x);
}

double fidelity_alpha(double lambda, double g, double alpha) {
  require_lambda(lambda);
  const double c = g - 1.0;
  const double x = lambda * lambda * alpha * alpha;
  const double u = 1.0 + c * x;
  const double num = 1.0 + g * c * x;
  return num * num / (u * u + c * c * x) * std::exp(-c * c * x);
}

OutputMoments output_moments(double lambda, double g, Complex alpha) {
  require_lambda(lambda);
  const double c = g - 1.0;
  const Complex b = lambda * alpha;
  const double x = std::norm(b);
  // Coherent-state moments ⟨n⟩ = x, ⟨n²⟩ = x² + x applied to polynomials in n.
  const double norm2 = 1.0 + 2.0 * c * x + c * c * (x * x + x);
  OutputMoments m;
  m.norm2 = norm2;
  m.mean = b * (1.0 + c + c * (2.0 + c) * x + c * c * (x * x + x)) / norm2;
  m.a2 = b * b * ((1.0 + 2.0 * c) + c * (2.0 + 2.0 * c) * x + c * c * (x * x + x)) / norm2;
  m.nbar = x * ((1.0 + c) * (1.0 + c) + 2.0 * c * (1.0 + c) * x + c * c * (x * x + x)) / norm2;
  return m;
}

double fidelity_with(double lambda, double g, Complex alpha, Complex target) {
  const OutputMoments m = output_moments(lambda, g, alpha);
  const Complex b = lambda * alpha;
  return std::exp(-std::norm(target - b)) * std::norm(1.0 + (g - 1.0) * std::conj(target) * b) / m.norm2;
}

Metrics metrics_pure(double lambda, double g, Complex alpha) {
  return metrics_pure(lambda, g, alpha, lambda * g * alpha);
}

Metrics metrics_pure(double lambda, double g, Complex alpha, Complex fidelity_target) {
  const OutputMoments m = output_moments(lambda, g, alpha);
  Metrics out;
  out.mean_re = m.mean.real();
  out.mean_im = m.mean.imag();
  out.gain = gain_alpha(lambda, g, std::abs(alpha));
  out.vx = m.a2.real() + m.nbar + 0.5 - 2.0 * m.mean.real() * m.mean.real();
  out.vp = -m.a2.real() + m.nbar + 0.5 - 2.0 * m.mean.imag() * m.mean.imag();
  out.uncertainty_product = out.vx * out.vp;
  out.fidelity = fidelity_with(lambda, g, alpha, fidelity_target);
  return out;
}

// ---------------------------------------------------------------------------

double ResourceEngineering::coefficient(int n) const {
  const double R = 1.0 - T;
  const double l2 = lambda * lambda;
  const double m2 = mu * mu;
  const double pref = std::sqrt((1.0 - l2) * (1.0 - m2) / p_s);
  const double x = R * T * (lambda - mu) * (lambda - mu);
  const double nu = R * lambda + T * mu;
  if (n == 0) return pref * nu;
  return pref * std::pow(lambda_eff, n - 1) * (n * x + nu * lambda_eff);
}

std::vector<double> ResourceEngineering::coefficients(int count) const {
  std::vector<double> c;
  c.reserve(count);
  for (int n = 0; n < count; ++n) c.push_back(coefficient(n));
  return c;
}

ResourceEngineering resource_engineering(double lambda, double mu, double T) {
  require_lambda(lambda);
  require_lambda(mu);
  if (!(T >= 0.0 && T <= 1.0)) throw DomainError(fmt::format("T = {} outside [0, 1]", T));
  const double R = 1.0 - T;
  ResourceEngineering r;
  r.lambda = lambda;
  r.mu = mu;
  r.T = T;
  r.lambda_eff = T * lambda + R * mu;
  require_lambda(r.lambda_eff);

  const double nu = R * lambda + T * mu;
  const double denom = nu * (R * mu + T * lambda);
  if (std::abs(denom) < 1e-14) {
    throw PoleError(fmt::format("nominal gain diverges: (R lambda + T mu)(R mu + T lambda) = {:.3e}", denom), denom);
  }
  // Factored so that μ = 0 gives exactly 1 + 1·1.
  r.g = 1.0 + (R * (lambda - mu) / nu) * (T * (lambda - mu) / (R * mu + T * lambda));
  r.g_eff = r.lambda_eff * r.g;

  const double le2 = r.lambda_eff * r.lambda_eff;
  const double x = R * T * (lambda - mu) * (lambda - mu);
  const double bracket = (1.0 - le2) * nu + r.lambda_eff * x;
  r.p_s = (1.0 - lambda * lambda) * (1.0 - mu * mu) / std::pow(1.0 - le2, 3) * (bracket * bracket + x * x);
  return r;
}

GainSensitivity geff_sensitivity(double lambda, double mu, double T) {
  const ResourceEngineering r = resource_engineering(lambda, mu, T);
  const double R = 1.0 - T;
  const double nu = R * lambda + T * mu;
  GainSensitivity s;
  s.g_eff_approx = T * lambda * (1.0 + R * lambda / nu);
  s.dgeff_dmu = 2.0 * R - R * lambda * lambda / (nu * nu);
  const double diff = r.g_eff - r.lambda_eff;
  s.dgeff_dmu_from_gain = 2.0 * R - lambda * lambda * diff * diff / (R * T * T * std::pow(lambda - mu, 4));
  s.approximation_regime = R <= 0.1 && std::abs(mu) <= 0.1 * std::abs(lambda);
  return s;
}

GnModel gn_model(double lambda, double g, int N) {
  require_lambda(lambda);
  if (!(g > 0.0)) throw DomainError(fmt::format("gain g = {} must be positive", g));
  if (N < 0) throw DomainError("cutoff N must be non-negative");
  GnModel m;
  m.lambda = lambda;
  m.g = g;
  m.N = N;
  const double scaled = scaled_pn(lambda, g, N);
  m.p_n = scaled / std::pow(g, 2 * N);
  m.alpha_th = (std::sqrt(N + 2.25) - 1.5) / (g * std::abs(lambda));

  const double pref = std::sqrt((1.0 - lambda * lambda) / m.p_n);
  for (int n = 0; n <= N; ++n) m.coefficients.push_back(pref * std::pow(g * lambda, n) / std::pow(g, N));
  if (lambda != 0.0) {
    for (int n = N + 1;; ++n) {
      const double c = pref * std::pow(lambda, n);
      if (c * c < 1e-20 * (1.0 - lambda * lambda)) break;
      m.coefficients.push_back(c);
    }
  }
  return m;
}

double beta_density_gn(double lambda, double g, int N, Complex alpha, Complex beta) {
  require_lambda(lambda);
  return (1.0 - lambda * lambda) / scaled_pn(lambda, g, N) / std::numbers::pi *
         std::exp((g * g * lambda * lambda - 1.0) * std::norm(alpha + beta));
}

double beta_density_g(double lambda, double g, Complex alpha, Complex beta) {
  require_lambda(lambda);
  const double c = g - 1.0;
  const double q = lambda * lambda;
  // P_G = (1-λ²) Σ λ^{2n} (1 + c n)².
  const double p_g = 1.0 + 2.0 * c * q / (1.0 - q) + c * c * q * (1.0 + q) / ((1.0 - q) * (1.0 - q));
  const OutputMoments m = output_moments(lambda, g, alpha + beta);
  return (1.0 - q) / (std::numbers::pi * p_g) * std::exp(-(1.0 - q) * std::norm(alpha + beta)) * m.norm2;
}

double beta_density_tmsv(double lambda, Complex alpha, Complex beta) {
  require_lambda(lambda);
  const double l = 1.0 - lambda * lambda;
  return l / std::numbers::pi * std::exp(-l * std::norm(alpha + beta));
}

WindowProbability ptele_window(double lambda, double g, int N, double sigma, double alpha) {
  require_lambda(lambda);
  if (!(sigma >= 0.0)) throw DomainError(fmt::format("sigma = {} must be non-negative", sigma));
  const double lg2 = lambda * lambda * g * g;
  const double s2 = sigma * sigma;
  const double den = 1.0 + s2 - s2 * lg2;

  WindowProbability w;
  w.converges = lg2 <= 1.0 || s2 < 1.0 / (lg2 - 1.0);
  w.p_tele = (1.0 - lambda * lambda) / scaled_pn(lambda, g, N) * s2 / den *
             std::exp((lg2 - 1.0) * alpha * alpha / den);
  if (w.converges) {
    const double lg = std::abs(lambda) * g;
    const double spread = lg * std::abs(alpha) / den + 3.0 * lg * sigma / std::sqrt(2.0 * den);
    w.within_support = spread < std::sqrt(N + 2.25) - 1.5;
  }
  return w;
}

}  // namespace teleamp::pure
