#pragma once

#include <complex>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "teleamp/config.hpp"
#include "teleamp/fock.hpp"
#include "teleamp/gaussian.hpp"
#include "teleamp/params.hpp"
#include "teleamp/phase_space.hpp"

namespace teleamp::harness {

using Complex = std::complex<double>;

enum class Model { kPure, kPhase, kFock };
enum class Resource { kIdeal, kEngineered, kTruncated };
enum class FidelityTarget {
  kGainAlpha,  ///< |g(α)α⟩
  kGeff,       ///< |g_eff α⟩ with g_eff the small-amplitude gain
};

struct ModelSpec {
  Model model = Model::kPhase;
  Resource resource = Resource::kEngineered;
  fock::Detector detector = fock::Detector::kPnr;
  FidelityTarget target = FidelityTarget::kGainAlpha;
  int fock_dim = fock::kDefaultDim;
  gauss::TapConvention convention = gauss::TapConvention::kMatched;
};

struct SweepSpec {
  std::string name;
  ModelSpec model;
  AmplifierParams params;
  double alpha_start = 0.0;
  double alpha_stop = 1.0;
  int count = 51;
  double phase = 0.0;  ///< α = a·e^{iφ}

  std::vector<double> alpha_grid() const;
};

struct SolveSpec {
  double target_g_eff = 1.5;
  double mu_lo = -0.025;
  double mu_hi = 0.0;
  double tolerance = 1e-5;
};

/// Reads model.*, params.*, sweep.* keys. Unknown keys throw ConfigError.
SweepSpec sweep_spec_from_config(const Config& cfg);
SolveSpec solve_spec_from_config(const Config& cfg);

/// Amplitude used in place of α = 0 wherever a gain ratio is needed.
inline constexpr double kSmallAlpha = 1e-4;

/// A model with its conditionally prepared resource, evaluated per amplitude.
class Evaluator {
 public:
  Evaluator(const ModelSpec& model, const AmplifierParams& params);
  ~Evaluator();
  Evaluator(Evaluator&&) noexcept;
  Evaluator& operator=(Evaluator&&) noexcept;

  /// Metrics with P_AB, P_tele, P_tot filled in where defined (NaN otherwise).
  Metrics at(Complex alpha) const;

  /// Gain at α = kSmallAlpha.
  double small_alpha_gain() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct SweepRow {
  double alpha = 0.0;
  Metrics metrics;
  double benchmark_det = 0.0;
  std::string error;
};

std::vector<SweepRow> run_sweep(const SweepSpec& spec);

/// Writes the CSV header and rows with 17 significant digits. When
/// `series` is non-empty a leading series column is written.
void write_csv_header(std::ostream& out, bool with_series);
void write_csv_rows(std::ostream& out, const std::vector<SweepRow>& rows, const std::string& series = {});

struct GainSample {
  double mu;
  double gain;  ///< NaN where the model failed
};

/// The bracket does not straddle the target; carries the sampled gain curve.
class BracketError : public std::runtime_error {
 public:
  BracketError(const std::string& what, std::vector<GainSample> samples)
      : std::runtime_error(what), samples_(std::move(samples)) {}
  const std::vector<GainSample>& samples() const { return samples_; }

 private:
  std::vector<GainSample> samples_;
};

struct SolveResult {
  double mu = 0.0;
  double gain = 0.0;
  int iterations = 0;
};

/// Root of small_alpha_gain(μ) - target in [mu_lo, mu_hi]; all other
/// parameters are taken from `params`.
SolveResult solve_mu(const SolveSpec& spec, const ModelSpec& model, const AmplifierParams& params);

/// Runs every series of the committed figure config and writes
/// fig<id>_<panel>.csv files. Returns the written paths.
std::vector<std::filesystem::path> write_figure(int id, const std::filesystem::path& config_dir,
                                                const std::filesystem::path& out_dir);

}  // namespace teleamp::harness
