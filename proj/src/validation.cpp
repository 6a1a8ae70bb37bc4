#include "teleamp/validation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include <fmt/format.h>
#include <json.hpp>

#include "teleamp/errors.hpp"
#include "teleamp/fock.hpp"
#include "teleamp/gaussian.hpp"
#include "teleamp/phase_space.hpp"
#include "teleamp/pure_model.hpp"
#include "teleamp/quadrature.hpp"

namespace teleamp::validation {

namespace {

using Complex = std::complex<double>;
using gauss::TapConvention;

// Running maximum of a discrepancy together with where it occurred.
struct Worst {
  double value = 0.0;
  std::string where;

  void update(double v, std::string at) {
    if (!(v <= value)) {  // NaN propagates as a failure
      value = std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
      where = std::move(at);
    }
  }
};

CheckResult finish(std::string name, const Worst& w, double tolerance, bool lower_is_better = true) {
  CheckResult r;
  r.name = std::move(name);
  r.measured = w.value;
  r.tolerance = tolerance;
  r.passed = lower_is_better ? w.value <= tolerance : w.value >= tolerance;
  r.detail = w.where;
  return r;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

AmplifierParams fig5_params(double mu) {
  AmplifierParams p;
  p.lambda = 0.5;
  p.T = 0.95;
  p.mu = mu;
  p.eta_ab = p.eta_cd = 0.9;
  p.eta_apd = 0.85;
  return p;
}

AmplifierParams fig6_params() {
  AmplifierParams p = fig5_params(-0.0179);
  p.sigma = std::sqrt(0.08);
  p.k = 1.0;
  return p;
}

struct NamedState {
  std::string label;
  phase::GaussMixQ q;
};

// Single-mode states exercised by the Husimi checks.
std::vector<NamedState> probe_states(TapConvention conv) {
  std::vector<NamedState> out;
  const phase::GaussMixQ r5 = phase::resource_q(fig5_params(-0.0150), conv);
  const AmplifierParams p6 = fig6_params();
  const phase::GaussMixQ r6 = phase::resource_q(p6, conv);
  out.push_back({"fig5 resource, mode B marginal", r5.marginal(1)});
  out.push_back({"fig6 resource, mode A marginal", r6.marginal(0)});
  for (double a : {0.0, 0.5, 1.0}) {
    out.push_back({fmt::format("fig5 beta=0 output, alpha={}", a), phase::teleamp_beta0(r5, a)});
    out.push_back({fmt::format("fig6 windowed output, alpha={}", a),
                   phase::teleamp_windowed(r6, a, p6.sigma, p6.k).state});
  }
  return out;
}

// Tensor Gauss-Legendre integral of the normalized Q over a square centered at `c`.
double integrate_q(const phase::GaussMixQ& q, const gauss::Vector2& c) {
  constexpr double kHalfWidth = 9.0;
  const QuadratureRule gx = gauss_legendre(120, c(0) - kHalfWidth, c(0) + kHalfWidth);
  const QuadratureRule gy = gauss_legendre(120, c(1) - kHalfWidth, c(1) + kHalfWidth);
  double s = 0.0;
  gauss::Vector r(2);
  for (std::size_t i = 0; i < gx.nodes.size(); ++i) {
    for (std::size_t j = 0; j < gy.nodes.size(); ++j) {
      r << gx.nodes[i], gy.nodes[j];
      s += gx.weights[i] * gy.weights[j] * q.evaluate(r);
    }
  }
  return s;
}

gauss::Vector2 q_mean(const phase::GaussMixQ& q) {
  gauss::Vector2 m = gauss::Vector2::Zero();
  for (const auto& t : q.terms()) m += t.coeff * std::exp(t.log_k) / q.total() * t.mean;
  return m;
}

// ---------------------------------------------------------------------------

CheckResult lambda_eff_lock(const Options& o, TapConvention conv) {
  const double lambda = 0.5, mu = -0.1, T = 0.9, R = 1.0 - T;
  Worst w;
  const fock::PreparedResource prep = fock::prepare_resource_fock(lambda, mu, T, 30, fock::Detector::kPnr, conv);
  const fock::FockVec& psi = prep.state.members.front().state;
  const pure::ResourceEngineering closed = pure::resource_engineering(lambda, mu, T);
  for (int n = 0; n < 15; ++n) {
    const double c = std::abs(psi[psi.index({n, n})]);
    w.update(std::abs(c - std::abs(closed.coefficient(n))), fmt::format("Fock |{0},{0}> coefficient", n));
  }
  AmplifierParams p;
  p.lambda = lambda;
  p.mu = mu;
  p.T = T;
  const gauss::CovMatrix eff = gauss::build_effective_cov(p, conv);
  const auto sinh2r = [](double l) { return 2.0 * l / (1.0 - l * l); };
  const double expected = T * sinh2r(lambda) + R * sinh2r(mu);
  w.update(std::abs(eff(0, 2) - expected), "covariance <x_A x_B> vs T sinh2r + R sinh2s");
  (void)o;
  return finish("lambda_eff_lock", w, 1e-8);
}

CheckResult husimi_normalization(TapConvention conv) {
  Worst w;
  for (const auto& s : probe_states(conv)) w.update(std::abs(integrate_q(s.q, q_mean(s.q)) - 1.0), s.label);
  return finish("husimi_normalization", w, 1e-6);
}

CheckResult probe_grid_nonnegativity(TapConvention conv) {
  double lowest = std::numeric_limits<double>::infinity();
  std::string where;
  gauss::Vector r(2);
  for (const auto& s : probe_states(conv)) {
    for (int i = 0; i < 41; ++i) {
      for (int j = 0; j < 41; ++j) {
        r << -4.0 + 0.2 * i, -4.0 + 0.2 * j;
        const double v = s.q.evaluate(r);
        if (v < lowest) {
          lowest = v;
          where = fmt::format("{} at ({:.1f}, {:.1f})", s.label, r(0), r(1));
        }
      }
    }
  }
  CheckResult c;
  c.name = "probe_grid_nonnegativity";
  c.measured = lowest;
  c.tolerance = -1e-10;
  c.passed = lowest >= -1e-10;
  c.detail = "minimum Q: " + where;
  return c;
}

CheckResult symplectic_physicality(TapConvention conv) {
  Worst w;
  auto check = [&](const gauss::CovMatrix& g, const std::string& label) {
    w.update(1.0 - g.symplectic_eigenvalues().minCoeff(), label);
  };
  for (double mu : {-0.0150, -0.0197}) check(gauss::build_effective_cov(fig5_params(mu), conv), fmt::format("fig5 gamma_eff mu={}", mu));
  check(gauss::build_effective_cov(fig6_params(), conv), "fig6 gamma_eff");
  AmplifierParams dead = fig5_params(-0.0150);
  dead.eta_apd = 0.0;
  check(gauss::build_effective_cov(dead, conv), "gamma_eff with eta_APD = 0");
  const std::array<int, 2> both{0, 1};
  check(gauss::lossy_mix(gauss::tmsv_covariance(0.5), 0.9, both), "lossy TMSV eta=0.9");
  for (const auto& s : probe_states(conv)) {
    const phase::OutputAnalysis a = phase::analyze_q(s.q, 0.5);
    check(gauss::CovMatrix(a.covariance), s.label + " output covariance");
  }
  return finish("symplectic_physicality", w, 1e-9);
}

CheckResult ptot_identity(TapConvention conv) {
  const AmplifierParams p = fig6_params();
  const phase::GaussMixQ r = phase::resource_q(p, conv);
  Worst w;
  for (double a : {0.0, 0.25, 0.5, 1.0}) {
    const phase::Windowed win = phase::teleamp_windowed(r, a, p.sigma, p.k);
    w.update(rel(r.total() * win.p_tele, win.p_tot), fmt::format("alpha={}", a));
  }
  return finish("ptot_identity", w, 1e-12);
}

CheckResult phase_covariance(TapConvention conv) {
  const AmplifierParams p6 = fig6_params();
  const phase::GaussMixQ r5 = phase::resource_q(fig5_params(-0.0150), conv);
  const phase::GaussMixQ r6 = phase::resource_q(p6, conv);
  const double a0 = 0.6;
  Worst w;
  auto compare = [&](const phase::GaussMixQ& base, const phase::GaussMixQ& rot, double phi, double p_base,
                     double p_rot, const std::string& label) {
    const phase::OutputAnalysis ab = phase::analyze_q(base, a0);
    const Complex alpha = std::polar(a0, phi);
    const phase::OutputAnalysis ar = phase::analyze_q(rot, alpha, ab.metrics.gain);
    const Complex mean_b = gauss::to_complex(ab.mean) * std::polar(1.0, phi);
    w.update(std::abs(gauss::to_complex(ar.mean) - mean_b), label + " mean");
    w.update(std::abs(ar.metrics.fidelity - ab.metrics.fidelity), label + " fidelity");
    w.update(std::abs(ar.metrics.vx + ar.metrics.vp - ab.metrics.vx - ab.metrics.vp), label + " Vx+Vp");
    w.update(rel(p_rot, p_base), label + " probability");
  };
  for (double phi : {0.7, 2.1, -1.3}) {
    const phase::GaussMixQ b0 = phase::teleamp_beta0(r5, a0);
    const phase::GaussMixQ b1 = phase::teleamp_beta0(r5, std::polar(a0, phi));
    compare(b0, b1, phi, b0.total(), b1.total(), fmt::format("beta=0, phi={}", phi));
    const phase::Windowed w0 = phase::teleamp_windowed(r6, a0, p6.sigma, p6.k);
    const phase::Windowed w1 = phase::teleamp_windowed(r6, std::polar(a0, phi), p6.sigma, p6.k);
    compare(w0.state, w1.state, phi, w0.p_tot, w1.p_tot, fmt::format("windowed, phi={}", phi));
  }
  return finish("phase_covariance", w, 1e-10);
}

CheckResult fock_truncation_convergence(const Options& o) {
  Worst w;
  for (double g : {3.0, 4.0}) {
    for (double a : {0.5, 1.0}) {
      const Metrics lo = fock::metrics_fock(fock::teleport_fock(fock::ideal_resource(0.5, g, o.fock_dim), a, 0.0, 0.0).output, a);
      const Metrics hi =
          fock::metrics_fock(fock::teleport_fock(fock::ideal_resource(0.5, g, o.fock_dim + 5), a, 0.0, 0.0).output, a);
      const std::string at = fmt::format("g={} alpha={} d={}", g, a, o.fock_dim);
      w.update(std::abs(lo.gain - hi.gain), at + " gain");
      w.update(std::abs(lo.fidelity - hi.fidelity), at + " fidelity");
      w.update(std::abs(lo.vx - hi.vx), at + " Vx");
      w.update(std::abs(lo.vp - hi.vp), at + " Vp");
    }
  }
  return finish("fock_truncation_convergence", w, 1e-6);
}

CheckResult oracle_agreement(const Options& o, TapConvention conv) {
  const double lambda = 0.5;
  const int d = o.fock_dim;
  Worst w;
  for (double g : {3.0, 4.0}) {
    const fock::FockMix res = fock::ideal_resource(lambda, g, d);
    for (double a : {0.0, 0.25, 0.5, 1.0}) {
      const double aa = a == 0.0 ? 1e-6 : a;
      const Metrics m = fock::metrics_fock(fock::teleport_fock(res, aa, 0.0, 0.0).output, aa, Complex(lambda * g * aa));
      const std::string at = fmt::format("ideal g={} alpha={}", g, a);
      w.update(std::abs(m.gain - pure::gain_alpha(lambda, g, aa)), at + " gain");
      w.update(std::abs(m.fidelity - pure::fidelity_alpha(lambda, g, aa)), at + " fidelity");
    }
  }
  // Photon-subtracted resource with number-resolving detection.
  const double mu = -0.0150, T = 0.95;
  const fock::PreparedResource prep = fock::prepare_resource_fock(lambda, mu, T, d, fock::Detector::kPnr, conv);
  const pure::ResourceEngineering re = pure::resource_engineering(lambda, mu, T);
  w.update(rel(prep.p_ab, re.p_s), "P_S");
  for (double a : {0.0, 0.25, 0.5, 1.0}) {
    const double aa = a == 0.0 ? 1e-6 : a;
    const Metrics m = fock::metrics_fock(fock::teleport_fock(prep.state, aa, 0.0, 0.0).output, aa, Complex(re.g_eff * aa));
    const std::string at = fmt::format("engineered alpha={}", a);
    w.update(std::abs(m.gain - pure::gain_alpha(re.lambda_eff, re.g, aa)), at + " gain");
    w.update(std::abs(m.fidelity - pure::fidelity_alpha(re.lambda_eff, re.g, aa)), at + " fidelity");
  }
  // Outcome densities P(β).
  const fock::FockMix tmsv{{{1.0, fock::tmsv_state(lambda, d)}}};
  for (double g : {3.0, 4.0}) {
    const fock::FockMix res = fock::ideal_resource(lambda, g, d);
    for (Complex beta : {Complex(0.0), Complex(0.1, -0.2), Complex(-0.3, 0.1)}) {
      for (double a : {0.0, 0.25, 0.5, 1.0}) {
        const std::string at = fmt::format("P(beta={}{:+}i) alpha={}", beta.real(), beta.imag(), a);
        w.update(std::abs(fock::teleport_fock(tmsv, a, beta, 0.0).weight - pure::beta_density_tmsv(lambda, a, beta)),
                 "TMSV " + at);
        w.update(std::abs(fock::teleport_fock(res, a, beta, 0.0).weight - pure::beta_density_g(lambda, g, a, beta)),
                 fmt::format("G g={} ", g) + at);
      }
    }
  }
  return finish("oracle_agreement", w, 1e-6);
}

CheckResult povm_completeness(TapConvention conv) {
  Worst w;
  for (const auto& [mu, T] : {std::pair{-0.002, 0.995}, std::pair{-0.0150, 0.95}, std::pair{-0.1, 0.8}}) {
    const fock::PreparedResource prep = fock::prepare_resource_fock(0.5, mu, T, 30, fock::Detector::kOnOff, conv);
    double s = 0.0;
    for (double p : prep.outcome_probabilities) s += p;
    w.update(std::abs(s - 1.0), fmt::format("mu={} T={}", mu, T));
  }
  return finish("povm_completeness", w, 1e-10);
}

CheckResult beta_density_normalization() {
  // The density ∝ exp(-(1-λ²)|α+β|²) is below 1e-10 outside radius 5.5 around -α.
  const double lambda = 0.5;
  const fock::FockMix tmsv{{{1.0, fock::tmsv_state(lambda, 80)}}};
  Worst w;
  for (double a : {0.0, 0.5}) {
    double s = 0.0;
    for (const auto& pt : PolarGrid{}.points(1.1)) s += pt.weight * fock::teleport_fock(tmsv, a, pt.beta - a, 0.0).weight;
    w.update(std::abs(s - 1.0), fmt::format("TMSV resource, alpha={}: integral {:.12f}", a, s));
  }
  return finish("beta_density_normalization", w, 1e-8);
}

CheckResult sigma_continuity(TapConvention conv) {
  AmplifierParams p = fig6_params();
  const phase::GaussMixQ r = phase::resource_q(p, conv);
  Worst w;
  for (double a : {0.0, 0.5, 1.0}) {
    const Metrics m0 = phase::metrics_q(phase::teleamp_beta0(r, a), a);
    const Metrics ms = phase::metrics_q(phase::teleamp_windowed(r, a, std::sqrt(1e-6), p.k).state, a);
    const std::string at = fmt::format("alpha={}", a);
    w.update(std::abs(m0.gain - ms.gain), at + " gain");
    w.update(std::abs(m0.fidelity - ms.fidelity), at + " fidelity");
    w.update(std::abs(m0.vx - ms.vx), at + " Vx");
    w.update(std::abs(m0.vp - ms.vp), at + " Vp");
  }
  return finish("sigma_continuity", w, 1e-4);
}

CheckResult small_alpha_gain_consistency(TapConvention conv) {
  Worst w;
  for (double mu : {-0.0150, -0.0197}) {
    const phase::GaussMixQ r = phase::resource_q(fig5_params(mu), conv);
    const double limit = phase::metrics_q(phase::teleamp_beta0(r, 0.0), 0.0).gain;
    const double probe = phase::metrics_q(phase::teleamp_beta0(r, 1e-4), 1e-4).gain;
    w.update(std::abs(limit - probe), fmt::format("fig5 mu={}", mu));
  }
  return finish("small_alpha_gain_consistency", w, 1e-6);
}

CheckResult window_probability() {
  struct Point {
    double lambda, g;
    int N;
    double sigma2, alpha;
  };
  const std::array<Point, 6> points{{{0.5, 3.0, 8, 0.08, 0.3},
                                     {0.5, 3.0, 8, 0.05, 0.0},
                                     {0.5, 4.0, 12, 0.05, 0.2},
                                     {0.4, 2.5, 10, 0.1, 0.4},
                                     {0.3, 2.0, 6, 0.2, 0.5},
                                     {0.5, 1.5, 4, 0.3, 0.3}}};
  Worst w;
  int valid = 0;
  for (const auto& pt : points) {
    const double sigma = std::sqrt(pt.sigma2);
    const pure::WindowProbability closed = pure::ptele_window(pt.lambda, pt.g, pt.N, sigma, pt.alpha);
    if (!closed.valid()) continue;
    ++valid;
    double s = 0.0;
    for (const auto& q : PolarGrid{}.points(sigma)) {
      s += q.weight * pure::beta_density_gn(pt.lambda, pt.g, pt.N, pt.alpha, q.beta) *
           std::exp(-std::norm(q.beta) / pt.sigma2);
    }
    w.update(std::abs(s - closed.p_tele),
             fmt::format("lambda={} g={} N={} sigma2={} alpha={}", pt.lambda, pt.g, pt.N, pt.sigma2, pt.alpha));
  }
  // Fock oracle on the truncated-amplifier resource.
  const double sigma = std::sqrt(0.08);
  const fock::WindowTeleported fw =
      fock::windowed_teleport_fock(fock::gn_resource(0.5, 3.0, 8, 30), 0.3, sigma, 0.0, PolarGrid{});
  w.update(std::abs(fw.p_tele - pure::ptele_window(0.5, 3.0, 8, sigma, 0.3).p_tele), "Fock oracle, lambda=0.5 g=3 N=8");
  if (valid < 5) w.update(std::numeric_limits<double>::infinity(), "fewer than five valid parameter points");
  return finish("window_probability", w, 1e-4);
}

CheckResult fock_gaussian_resource_q(TapConvention conv) {
  AmplifierParams p;
  p.lambda = 0.5;
  p.mu = -0.002;
  p.T = 0.995;
  const phase::GaussMixQ q = phase::resource_q(p, conv);
  const fock::PreparedResource prep = fock::prepare_resource_fock(p.lambda, p.mu, p.T, 30, fock::Detector::kOnOff, conv);
  Worst w;
  w.update(rel(prep.p_ab, q.total()), "P_AB");
  const std::array<std::array<double, 4>, 5> pts{{{0.0, 0.0, 0.0, 0.0},
                                                  {0.3, 0.1, -0.2, 0.4},
                                                  {-0.5, 0.2, 0.6, -0.1},
                                                  {0.8, -0.7, 0.1, 0.9},
                                                  {1.2, 0.3, -1.0, 0.2}}};
  for (const auto& v : pts) {
    const std::array<Complex, 2> omega{Complex(v[0], v[1]), Complex(v[2], v[3])};
    gauss::Vector r(4);
    r << v[0], v[1], v[2], v[3];
    w.update(rel(fock::husimi_q(prep.state, omega), q.evaluate(r)),
             fmt::format("Q({:.1f}{:+.1f}i, {:.1f}{:+.1f}i) relative", v[0], v[1], v[2], v[3]));
  }
  return finish("fock_gaussian_resource_q", w, 1e-6);
}

using CheckFn = std::function<CheckResult(const Options&, TapConvention)>;

const std::vector<std::pair<std::string, CheckFn>>& registry() {
  static const std::vector<std::pair<std::string, CheckFn>> checks{
      {"lambda_eff_lock", [](const Options& o, TapConvention c) { return lambda_eff_lock(o, c); }},
      {"husimi_normalization", [](const Options&, TapConvention c) { return husimi_normalization(c); }},
      {"probe_grid_nonnegativity", [](const Options&, TapConvention c) { return probe_grid_nonnegativity(c); }},
      {"symplectic_physicality", [](const Options&, TapConvention c) { return symplectic_physicality(c); }},
      {"ptot_identity", [](const Options&, TapConvention c) { return ptot_identity(c); }},
      {"phase_covariance", [](const Options&, TapConvention c) { return phase_covariance(c); }},
      {"fock_truncation_convergence", [](const Options& o, TapConvention) { return fock_truncation_convergence(o); }},
      {"oracle_agreement", [](const Options& o, TapConvention c) { return oracle_agreement(o, c); }},
      {"povm_completeness", [](const Options&, TapConvention c) { return povm_completeness(c); }},
      {"beta_density_normalization", [](const Options&, TapConvention) { return beta_density_normalization(); }},
      {"sigma_continuity", [](const Options&, TapConvention c) { return sigma_continuity(c); }},
      {"small_alpha_gain_consistency", [](const Options&, TapConvention c) { return small_alpha_gain_consistency(c); }},
      {"window_probability", [](const Options&, TapConvention) { return window_probability(); }},
      {"fock_gaussian_resource_q", [](const Options&, TapConvention c) { return fock_gaussian_resource_q(c); }},
  };
  return checks;
}

}  // namespace

bool Report::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::string Report::to_json(int indent) const {
  nlohmann::json j;
  j["passed"] = all_passed();
  j["checks"] = nlohmann::json::array();
  for (const auto& c : checks) {
    nlohmann::json e{{"name", c.name}, {"passed", c.passed}, {"tolerance", c.tolerance}, {"detail", c.detail}};
    // JSON has no infinity; report it as null.
    e["measured"] = std::isfinite(c.measured) ? nlohmann::json(c.measured) : nlohmann::json(nullptr);
    j["checks"].push_back(std::move(e));
  }
  return j.dump(indent);
}

std::vector<std::string> check_names() {
  std::vector<std::string> names;
  for (const auto& [name, fn] : registry()) names.push_back(name);
  return names;
}

Report run(const Options& options) {
  const TapConvention conv = options.mutate_bs_sign ? TapConvention::kMirrored : TapConvention::kMatched;
  Report report;
  for (const auto& [name, fn] : registry()) {
    if (!options.filter.empty() && name.find(options.filter) == std::string::npos) continue;
    try {
      report.checks.push_back(fn(options, conv));
    } catch (const std::exception& e) {
      CheckResult c;
      c.name = name;
      c.passed = false;
      c.measured = std::numeric_limits<double>::infinity();
      c.detail = fmt::format("exception: {}", e.what());
      report.checks.push_back(std::move(c));
    }
  }
  return report;
}

}  // namespace teleamp::validation
