#include "teleamp/harness.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include "teleamp/errors.hpp"
#include "teleamp/pure_model.hpp"
#include "teleamp/quadrature.hpp"

namespace teleamp::harness {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "model.type",      "model.resource",  "model.detector",   "model.fidelity_target", "model.fock_dim",
      "model.bs_convention", "params.lambda", "params.mu",      "params.T",              "params.g",
      "params.N",        "params.sigma",    "params.sigma2",    "params.k",              "params.eta_ab",
      "params.eta_cd",   "params.eta_apd",  "sweep.alpha_start", "sweep.alpha_stop",     "sweep.count",
      "sweep.phase",     "solve.target",    "solve.bracket_lo", "solve.bracket_hi",      "solve.tolerance",
      "figure.id",       "figure.panels",   "figure.description"};
  return keys;
}

template <typename E>
E choose(const Config& cfg, const std::string& key, const std::map<std::string, E>& options, E fallback) {
  const auto v = cfg.get(key);
  if (!v) return fallback;
  const auto it = options.find(*v);
  if (it == options.end()) {
    std::string allowed;
    for (const auto& [name, value] : options) allowed += (allowed.empty() ? "" : ", ") + name;
    throw ConfigError(fmt::format("{} = '{}' is not one of: {}", key, *v, allowed));
  }
  return it->second;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

Metrics nan_metrics() {
  Metrics m;
  m.gain = m.fidelity = m.vx = m.vp = m.uncertainty_product = m.mean_re = m.mean_im = kNaN;
  m.p_ab = m.p_tele = m.p_tot = kNaN;
  return m;
}

}  // namespace

std::vector<double> SweepSpec::alpha_grid() const {
  std::vector<double> grid;
  for (int i = 0; i < count; ++i) grid.push_back(alpha_start + (alpha_stop - alpha_start) * i / (count - 1));
  return grid;
}

SweepSpec sweep_spec_from_config(const Config& cfg) {
  for (const auto& [key, value] : cfg.values()) {
    if (!known_keys().contains(key)) throw ConfigError(fmt::format("unknown config key '{}'", key));
  }
  SweepSpec s;
  ModelSpec& m = s.model;
  m.model = choose<Model>(cfg, "model.type", {{"pure", Model::kPure}, {"phase", Model::kPhase}, {"fock", Model::kFock}},
                          Model::kPhase);
  const Resource default_resource = m.model == Model::kPhase ? Resource::kEngineered : Resource::kIdeal;
  m.resource = choose<Resource>(
      cfg, "model.resource",
      {{"ideal", Resource::kIdeal}, {"engineered", Resource::kEngineered}, {"truncated", Resource::kTruncated}},
      default_resource);
  m.detector = choose<fock::Detector>(cfg, "model.detector",
                                      {{"pnr", fock::Detector::kPnr}, {"onoff", fock::Detector::kOnOff}},
                                      fock::Detector::kPnr);
  m.target = choose<FidelityTarget>(cfg, "model.fidelity_target",
                                    {{"gain_alpha", FidelityTarget::kGainAlpha}, {"g_eff", FidelityTarget::kGeff}},
                                    FidelityTarget::kGainAlpha);
  m.convention = choose<gauss::TapConvention>(
      cfg, "model.bs_convention",
      {{"matched", gauss::TapConvention::kMatched}, {"mirrored", gauss::TapConvention::kMirrored}},
      gauss::TapConvention::kMatched);
  m.fock_dim = cfg.integer_or("model.fock_dim", fock::kDefaultDim);

  AmplifierParams& p = s.params;
  p.lambda = cfg.number_or("params.lambda", p.lambda);
  p.mu = cfg.number_or("params.mu", p.mu);
  p.T = cfg.number_or("params.T", p.T);
  p.g = cfg.number_or("params.g", p.g);
  p.N = cfg.integer_or("params.N", p.N);
  if (cfg.has("params.sigma") && cfg.has("params.sigma2")) {
    throw ConfigError("give only one of params.sigma and params.sigma2");
  }
  p.sigma = cfg.has("params.sigma2") ? std::sqrt(cfg.number_or("params.sigma2", 0.0))
                                     : cfg.number_or("params.sigma", p.sigma);
  p.k = cfg.number_or("params.k", p.k);
  p.eta_ab = cfg.number_or("params.eta_ab", p.eta_ab);
  p.eta_cd = cfg.number_or("params.eta_cd", p.eta_cd);
  p.eta_apd = cfg.number_or("params.eta_apd", p.eta_apd);
  p.validate();

  s.alpha_start = cfg.number_or("sweep.alpha_start", s.alpha_start);
  s.alpha_stop = cfg.number_or("sweep.alpha_stop", s.alpha_stop);
  s.count = cfg.integer_or("sweep.count", s.count);
  s.phase = cfg.number_or("sweep.phase", s.phase);
  if (s.count < 2) throw ConfigError(fmt::format("sweep.count = {} must be at least 2", s.count));
  if (!(s.alpha_start >= 0.0 && s.alpha_stop >= s.alpha_start)) {
    throw ConfigError("sweep amplitudes must satisfy 0 <= alpha_start <= alpha_stop");
  }
  return s;
}

SolveSpec solve_spec_from_config(const Config& cfg) {
  SolveSpec s;
  s.target_g_eff = cfg.number_or("solve.target", s.target_g_eff);
  s.mu_lo = cfg.number_or("solve.bracket_lo", s.mu_lo);
  s.mu_hi = cfg.number_or("solve.bracket_hi", s.mu_hi);
  s.tolerance = cfg.number_or("solve.tolerance", s.tolerance);
  if (!(s.mu_lo < s.mu_hi)) throw ConfigError("solve bracket must satisfy bracket_lo < bracket_hi");
  if (!(s.tolerance > 0.0)) throw ConfigError("solve.tolerance must be positive");
  return s;
}

// ---------------------------------------------------------------------------

struct Evaluator::Impl {
  ModelSpec model;
  AmplifierParams params;
  std::optional<phase::GaussMixQ> q_resource;
  std::optional<fock::FockMix> f_resource;
  std::optional<pure::ResourceEngineering> engineered;
  double p_ab = kNaN;
  std::optional<double> g_eff;

  Metrics compute(Complex alpha) const;
};

Evaluator::Evaluator(const ModelSpec& model, const AmplifierParams& params) : impl_(std::make_unique<Impl>()) {
  params.validate();
  impl_->model = model;
  impl_->params = params;
  const AmplifierParams& p = params;
  switch (model.model) {
    case Model::kPure:
      if (model.resource == Resource::kEngineered) {
        impl_->engineered = pure::resource_engineering(p.lambda, p.mu, p.T);
        impl_->p_ab = impl_->engineered->p_s;
      }
      if (model.resource == Resource::kTruncated && !(p.sigma > 0.0)) {
        throw ConfigError("the truncated-amplifier pure model needs an acceptance window (sigma > 0)");
      }
      if (model.resource != Resource::kTruncated && p.sigma > 0.0) {
        throw ConfigError("the pure model conditions on beta = 0 only; set sigma = 0");
      }
      break;
    case Model::kPhase:
      if (model.resource != Resource::kEngineered) {
        throw ConfigError("the phase-space model uses the photon-subtracted resource (model.resource = engineered)");
      }
      impl_->q_resource = phase::resource_q(p, model.convention);
      impl_->p_ab = impl_->q_resource->total();
      break;
    case Model::kFock:
      if (p.eta_ab != 1.0 || p.eta_cd != 1.0 || p.eta_apd != 1.0) {
        throw ConfigError("the Fock oracle models lossless inputs and detectors only (all eta = 1)");
      }
      if (model.resource == Resource::kEngineered) {
        fock::PreparedResource prep =
            fock::prepare_resource_fock(p.lambda, p.mu, p.T, model.fock_dim, model.detector, model.convention);
        impl_->p_ab = prep.p_ab;
        impl_->f_resource = std::move(prep.state);
      } else if (model.resource == Resource::kTruncated) {
        impl_->f_resource = fock::gn_resource(p.lambda, p.g, p.N, model.fock_dim);
      } else {
        impl_->f_resource = fock::ideal_resource(p.lambda, p.g, model.fock_dim);
      }
      break;
  }
  if (model.target == FidelityTarget::kGeff) impl_->g_eff = impl_->compute(kSmallAlpha).gain;
}

Evaluator::~Evaluator() = default;
Evaluator::Evaluator(Evaluator&&) noexcept = default;
Evaluator& Evaluator::operator=(Evaluator&&) noexcept = default;

Metrics Evaluator::at(Complex alpha) const { return impl_->compute(alpha); }

double Evaluator::small_alpha_gain() const { return impl_->compute(kSmallAlpha).gain; }

Metrics Evaluator::Impl::compute(Complex alpha) const {
  const AmplifierParams& p = params;
  Metrics m;
  switch (model.model) {
    case Model::kPure: {
      if (model.resource == Resource::kTruncated) {
        const pure::WindowProbability w = pure::ptele_window(p.lambda, p.g, p.N, p.sigma, std::abs(alpha));
        if (!w.valid()) throw DomainError("window outside the validity region of the truncated-amplifier model");
        const double ge = p.g * p.lambda;
        m.gain = ge;
        m.fidelity = 1.0;
        m.vx = m.vp = 0.5;
        m.uncertainty_product = 0.25;
        m.mean_re = (ge * alpha).real();
        m.mean_im = (ge * alpha).imag();
        m.p_ab = kNaN;
        m.p_tele = w.p_tele;
        m.p_tot = kNaN;
        return m;
      }
      const double lam = engineered ? engineered->lambda_eff : p.lambda;
      const double g = engineered ? engineered->g : p.g;
      const double ga = g_eff ? *g_eff : pure::gain_alpha(lam, g, std::abs(alpha));
      m = pure::metrics_pure(lam, g, alpha, ga * alpha);
      m.p_ab = p_ab;
      m.p_tele = m.p_tot = kNaN;
      return m;
    }
    case Model::kPhase: {
      if (p.sigma > 0.0) {
        const phase::Windowed w = phase::teleamp_windowed(*q_resource, alpha, p.sigma, p.k);
        m = phase::metrics_q(w.state, alpha, g_eff);
        m.p_tele = w.p_tele;
        m.p_tot = w.p_tot;
      } else {
        m = phase::metrics_q(phase::teleamp_beta0(*q_resource, alpha), alpha, g_eff);
        m.p_tele = m.p_tot = kNaN;
      }
      m.p_ab = p_ab;
      return m;
    }
    case Model::kFock: {
      const std::optional<Complex> target =
          g_eff ? std::optional<Complex>(*g_eff * alpha) : std::nullopt;
      fock::FockMix out;
      m.p_tele = m.p_tot = kNaN;
      if (p.sigma > 0.0) {
        fock::WindowTeleported w = fock::windowed_teleport_fock(*f_resource, alpha, p.sigma, p.k, PolarGrid{});
        out = std::move(w.output);
        m.p_tele = w.p_tele;
        m.p_tot = p_ab * w.p_tele;
      } else {
        out = fock::teleport_fock(*f_resource, alpha, 0.0, 0.0).output;
      }
      const double p_tele = m.p_tele;
      const double p_tot = m.p_tot;
      m = fock::metrics_fock(out, alpha, target);
      if (alpha == 0.0) m.gain = compute(kSmallAlpha).gain;
      m.p_ab = p_ab;
      m.p_tele = p_tele;
      m.p_tot = p_tot;
      return m;
    }
  }
  return m;
}

// ---------------------------------------------------------------------------

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  std::vector<SweepRow> rows;
  std::optional<Evaluator> eval;
  std::string setup_error;
  try {
    eval.emplace(spec.model, spec.params);
  } catch (const std::exception& e) {
    setup_error = e.what();
  }
  for (double a : spec.alpha_grid()) {
    SweepRow row;
    row.alpha = a;
    row.metrics = nan_metrics();
    row.benchmark_det = kNaN;
    if (!eval) {
      row.error = setup_error;
    } else {
      try {
        row.metrics = eval->at(std::polar(a, spec.phase));
        row.benchmark_det = deterministic_benchmark(row.metrics.gain);
      } catch (const std::exception& e) {
        row.error = e.what();
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_csv_header(std::ostream& out, bool with_series) {
  out << (with_series ? "series," : "") << "alpha,gain,fidelity,Vx,Vp,VxVp,P_AB,P_tele,P_tot,benchmark_det,error\n";
}

void write_csv_rows(std::ostream& out, const std::vector<SweepRow>& rows, const std::string& series) {
  for (const auto& r : rows) {
    const Metrics& m = r.metrics;
    if (!series.empty()) out << csv_field(series) << ',';
    out << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},", r.alpha,
                       m.gain, m.fidelity, m.vx, m.vp, m.uncertainty_product, m.p_ab, m.p_tele, m.p_tot,
                       r.benchmark_det)
        << csv_field(r.error) << '\n';
  }
}

// ---------------------------------------------------------------------------

SolveResult solve_mu(const SolveSpec& spec, const ModelSpec& model, const AmplifierParams& params) {
  auto gain_at = [&](double mu) {
    AmplifierParams p = params;
    p.mu = mu;
    return Evaluator(model, p).small_alpha_gain();
  };
  auto safe_gain = [&](double mu) {
    try {
      return gain_at(mu);
    } catch (const std::exception&) {
      return kNaN;
    }
  };
  auto bracket_error = [&](const std::string& why) {
    std::vector<GainSample> samples;
    constexpr int kSamples = 21;
    for (int i = 0; i < kSamples; ++i) {
      const double mu = spec.mu_lo + (spec.mu_hi - spec.mu_lo) * i / (kSamples - 1);
      samples.push_back({mu, safe_gain(mu)});
    }
    return BracketError(why, std::move(samples));
  };

  const double f_lo = safe_gain(spec.mu_lo) - spec.target_g_eff;
  const double f_hi = safe_gain(spec.mu_hi) - spec.target_g_eff;
  if (!std::isfinite(f_lo) || !std::isfinite(f_hi)) {
    throw bracket_error("gain could not be evaluated at a bracket endpoint");
  }
  if (f_lo == 0.0) return {spec.mu_lo, spec.target_g_eff, 0};
  if (f_hi == 0.0) return {spec.mu_hi, spec.target_g_eff, 0};
  if ((f_lo > 0.0) == (f_hi > 0.0)) {
    throw bracket_error(fmt::format("target gain {} is not bracketed by mu in [{}, {}]", spec.target_g_eff,
                                    spec.mu_lo, spec.mu_hi));
  }

  auto f = [&](double mu) { return gain_at(mu) - spec.target_g_eff; };
  std::uintmax_t iterations = 100;
  const auto [a, b] = boost::math::tools::toms748_solve(f, spec.mu_lo, spec.mu_hi, f_lo, f_hi,
                                                        boost::math::tools::eps_tolerance<double>(45), iterations);
  SolveResult result;
  result.mu = 0.5 * (a + b);
  result.gain = gain_at(result.mu);
  result.iterations = static_cast<int>(iterations);
  if (!(std::abs(result.gain - spec.target_g_eff) < spec.tolerance)) {
    throw bracket_error(fmt::format("root finder converged to mu = {} with gain {}, which misses the target {}; "
                                    "the bracket probably contains a pole",
                                    result.mu, result.gain, spec.target_g_eff));
  }
  return result;
}

// ---------------------------------------------------------------------------

std::vector<std::filesystem::path> write_figure(int id, const std::filesystem::path& config_dir,
                                                const std::filesystem::path& out_dir) {
  const Config cfg = Config::load(config_dir / fmt::format("fig{}.cfg", id));
  const std::string panels = cfg.get_or("figure.panels", "abcd");
  const auto names = cfg.series_names();
  if (names.empty()) throw ConfigError("figure config defines no series");

  std::vector<std::vector<SweepRow>> results;
  std::vector<double> grid;
  for (const auto& name : names) {
    const SweepSpec spec = sweep_spec_from_config(cfg.with_series(name));
    if (grid.empty()) grid = spec.alpha_grid();
    if (spec.alpha_grid() != grid) throw ConfigError("all series of a figure must share the amplitude grid");
    results.push_back(run_sweep(spec));
    for (const auto& row : results.back()) {
      if (!row.error.empty()) {
        throw std::runtime_error(fmt::format("series {} at alpha = {}: {}", name, row.alpha, row.error));
      }
    }
  }

  using Column = std::pair<std::string, double (*)(const SweepRow&)>;
  const std::map<char, std::vector<Column>> columns{
      {'a', {{"gain", [](const SweepRow& r) { return r.metrics.gain; }}}},
      {'b', {{"fidelity", [](const SweepRow& r) { return r.metrics.fidelity; }}}},
      {'c', {{"Vx", [](const SweepRow& r) { return r.metrics.vx; }}, {"Vp", [](const SweepRow& r) { return r.metrics.vp; }}}},
      {'d',
       {{"VxVp", [](const SweepRow& r) { return r.metrics.uncertainty_product; }},
        {"benchmark_det", [](const SweepRow& r) { return r.benchmark_det; }}}},
      {'e', {{"P_tele", [](const SweepRow& r) { return r.metrics.p_tele; }}}},
      {'f', {{"P_tot", [](const SweepRow& r) { return r.metrics.p_tot; }}}},
  };

  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  for (char panel : panels) {
    const auto it = columns.find(panel);
    if (it == columns.end()) throw ConfigError(fmt::format("unknown figure panel '{}'", panel));
    const auto path = out_dir / fmt::format("fig{}_{}.csv", id, panel);
    std::ofstream out(path);
    if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
    out << "alpha";
    for (const auto& name : names) {
      for (const auto& [col, get] : it->second) out << ',' << name << '_' << col;
    }
    out << '\n';
    for (std::size_t i = 0; i < grid.size(); ++i) {
      out << fmt::format("{:.17g}", grid[i]);
      for (const auto& rows : results) {
        for (const auto& [col, get] : it->second) out << fmt::format(",{:.17g}", get(rows[i]));
      }
      out << '\n';
    }
    written.push_back(path);
  }
  return written;
}

}  // namespace teleamp::harness
