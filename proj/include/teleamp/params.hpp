#pragma once

namespace teleamp {

/// All knobs of the teleamplifier: resource squeezing, tapping beam splitters,
/// efficiencies, amplifier gain/cutoff and the acceptance window.
struct AmplifierParams {
  double lambda = 0.5;   ///< main two-mode squeezing (tanh r)
  double mu = 0.0;       ///< auxiliary two-mode squeezing (tanh s)
  double T = 1.0;        ///< tapping beam-splitter transmittance, R = 1 - T
  double g = 2.0;        ///< nominal amplifier gain
  int N = 0;             ///< cutoff of the truncated amplifier G_N
  double sigma = 0.0;    ///< acceptance window width (sigma^2 = variance scale)
  double k = 0.0;        ///< corrective displacement strength
  double eta_ab = 1.0;
  double eta_cd = 1.0;
  double eta_apd = 1.0;

  double R() const { return 1.0 - T; }
  double lambda_eff() const { return T * lambda + R() * mu; }

  /// Throws DomainError when any field is outside its range.
  void validate() const;
};

/// Per-amplitude figures of merit of the amplified output state.
struct Metrics {
  double gain = 0.0;
  double fidelity = 0.0;
  double vx = 0.0;  ///< amplitude quadrature variance, vacuum = 1/2
  double vp = 0.0;
  double uncertainty_product = 0.0;
  double mean_re = 0.0;  ///< output coherent amplitude
  double mean_im = 0.0;
  double p_ab = 0.0;
  double p_tele = 0.0;
  double p_tot = 0.0;
};

/// Uncertainty product of the optimal deterministic linear amplifier with gain g.
inline double deterministic_benchmark(double gain) { return gain * gain / 2.0 - 0.25; }

}  // namespace teleamp
