#include "teleamp/fock.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <numeric>

#include <fmt/format.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "teleamp/errors.hpp"

namespace teleamp::fock {

namespace {

// Amplitudes below this (squared) inside photon-number blocks that do not fit
// the truncation are treated as zero by the beam splitter.
constexpr double kBlockLeakTolerance = 1e-16;
// Extra levels used when building displacement matrices.
constexpr int kDisplacementPad = 40;

std::size_t ipow(int base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= static_cast<std::size_t>(base);
  return r;
}

Amplitudes coherent_coefficients(Complex z, int dim) {
  Amplitudes c(dim);
  c(0) = std::exp(-0.5 * std::norm(z));
  for (int n = 1; n < dim; ++n) c(n) = c(n - 1) * z / std::sqrt(static_cast<double>(n));
  return c;
}

void require_mode(const FockVec& s, int mode) {
  if (mode < 0 || mode >= s.n_modes()) {
    throw DomainError(fmt::format("mode {} out of range for a {}-mode state", mode, s.n_modes()));
  }
}

// Calls f(base) for every flat index whose digits at the listed modes are zero.
template <typename F>
void for_each_base(const FockVec& s, std::span<const int> fixed, F&& f) {
  const int n = s.n_modes();
  std::vector<int> digits(n, 0);
  std::vector<bool> is_fixed(n, false);
  for (int m : fixed) is_fixed[m] = true;
  while (true) {
    f(s.index(digits));
    int m = n - 1;
    for (; m >= 0; --m) {
      if (is_fixed[m]) continue;
      if (++digits[m] < s.dim()) break;
      digits[m] = 0;
    }
    if (m < 0) return;
  }
}

// exp[θ(a†b - ab†)] on the span of |k, N-k⟩, k = 0..N.
Eigen::MatrixXd bs_block(int total, double theta) {
  Eigen::MatrixXd gen = Eigen::MatrixXd::Zero(total + 1, total + 1);
  for (int k = 0; k <= total; ++k) {
    if (k < total) gen(k + 1, k) += std::sqrt(static_cast<double>((k + 1) * (total - k)));
    if (k > 0) gen(k - 1, k) -= std::sqrt(static_cast<double>(k * (total - k + 1)));
  }
  return (theta * gen).exp();
}

void check_members_single_mode(const FockMix& mix) {
  for (const auto& m : mix.members) {
    if (m.state.n_modes() != 1) {
      throw DomainError(fmt::format("expected single-mode members, got {} modes", m.state.n_modes()));
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// FockVec

FockVec::FockVec(int n_modes, int dim) : n_modes_(n_modes), dim_(dim) {
  if (n_modes < 1 || dim < 1) throw DomainError(fmt::format("invalid Fock space {} modes x {} levels", n_modes, dim));
  amps_ = Amplitudes::Zero(static_cast<Eigen::Index>(ipow(dim, n_modes)));
}

FockVec::FockVec(int n_modes, int dim, Amplitudes amplitudes) : FockVec(n_modes, dim) {
  if (amplitudes.size() != amps_.size()) {
    throw DomainError(fmt::format("amplitude vector of length {} does not match {}^{}", amplitudes.size(), dim, n_modes));
  }
  amps_ = std::move(amplitudes);
}

FockVec FockVec::basis(int dim, std::span<const int> occupation) {
  FockVec v(static_cast<int>(occupation.size()), dim);
  v[v.index(occupation)] = 1.0;
  return v;
}

std::size_t FockVec::stride(int mode) const { return ipow(dim_, n_modes_ - 1 - mode); }

std::size_t FockVec::index(std::span<const int> occupation) const {
  if (static_cast<int>(occupation.size()) != n_modes_) throw DomainError("occupation list does not match mode count");
  std::size_t idx = 0;
  for (int n : occupation) {
    if (n < 0 || n >= dim_) throw TruncationError(fmt::format("Fock level {} outside truncation {}", n, dim_));
    idx = idx * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(n);
  }
  return idx;
}

FockVec FockVec::normalized() const {
  const double n = norm();
  if (n == 0.0) throw ProbabilityError("cannot normalize the zero vector");
  return FockVec(n_modes_, dim_, amps_ / n);
}

Complex FockVec::inner(const FockVec& other) const {
  if (other.size() != size()) throw DomainError("inner product of states from different Fock spaces");
  return amps_.dot(other.amps_);
}

Eigen::VectorXd FockVec::occupation(int mode) const {
  require_mode(*this, mode);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(dim_);
  const std::size_t s = stride(mode);
  for (std::size_t i = 0; i < size(); ++i) p((i / s) % dim_) += std::norm((*this)[i]);
  return p;
}

double FockVec::top_level_weight() const {
  const double total = norm_squared();
  if (total == 0.0) return 0.0;
  double worst = 0.0;
  for (int m = 0; m < n_modes_; ++m) worst = std::max(worst, occupation(m)(dim_ - 1) / total);
  return worst;
}

double FockMix::total_weight() const {
  return std::accumulate(members.begin(), members.end(), 0.0,
                         [](double acc, const Member& m) { return acc + m.weight; });
}

// ---------------------------------------------------------------------------
// States and operators

FockVec coherent_state(Complex alpha, int dim) {
  const double a = std::abs(alpha);
  if (a * a + 5.0 * a + 10.0 >= dim) {
    throw TruncationError(fmt::format("truncation {} too small for coherent amplitude {:.3f}", dim, a));
  }
  FockVec v(1, dim, coherent_coefficients(alpha, dim));
  if (std::abs(v.norm() - 1.0) > 1e-10) {
    throw TruncationError(fmt::format("coherent state |{:.3f}> leaks {:.2e} beyond {} levels", a,
                                      1.0 - v.norm(), dim));
  }
  return v;
}

FockVec tmsv_state(double lambda, int dim) {
  if (!(std::abs(lambda) < 1.0)) throw DomainError(fmt::format("|lambda| = {} must be < 1", std::abs(lambda)));
  if (std::pow(std::abs(lambda), dim) >= 1e-8) {
    throw TruncationError(fmt::format("truncation {} too small for squeezing lambda = {}", dim, lambda));
  }
  FockVec v(2, dim);
  const double norm = std::sqrt(1.0 - lambda * lambda);
  double amp = norm;
  for (int n = 0; n < dim; ++n) {
    const std::array<int, 2> occ{n, n};
    v[v.index(occ)] = amp;
    amp *= lambda;
  }
  return v;
}

FockVec apply_ladder(const FockVec& state, int mode, Ladder kind) {
  require_mode(state, mode);
  const int d = state.dim();
  const std::size_t s = state.stride(mode);
  if (kind == Ladder::kCreate && state.occupation(mode)(d - 1) > 1e-20) {
    throw TruncationError("creation operator applied to a state occupying the top Fock level");
  }
  FockVec out(state.n_modes(), d);
  for (std::size_t i = 0; i < state.size(); ++i) {
    const int n = static_cast<int>((i / s) % d);
    if (kind == Ladder::kAnnihilate) {
      if (n > 0) out[i - s] = std::sqrt(static_cast<double>(n)) * state[i];
    } else if (n + 1 < d) {
      out[i + s] = std::sqrt(static_cast<double>(n + 1)) * state[i];
    }
  }
  return out;
}

FockVec apply_diagonal(const FockVec& state, int mode, const std::vector<Complex>& factors) {
  require_mode(state, mode);
  if (static_cast<int>(factors.size()) != state.dim()) throw DomainError("diagonal factors do not match truncation");
  const std::size_t s = state.stride(mode);
  FockVec out = state;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= factors[(i / s) % state.dim()];
  return out;
}

FockVec apply_single_mode(const FockVec& state, int mode, const Eigen::MatrixXcd& op) {
  require_mode(state, mode);
  const int d = state.dim();
  if (op.rows() != d || op.cols() != d) throw DomainError("single-mode operator does not match truncation");
  const std::size_t s = state.stride(mode);
  FockVec out(state.n_modes(), d);
  const std::array<int, 1> fixed{mode};
  Amplitudes col(d);
  for_each_base(state, fixed, [&](std::size_t base) {
    for (int n = 0; n < d; ++n) col(n) = state[base + n * s];
    const Amplitudes res = op * col;
    for (int n = 0; n < d; ++n) out[base + n * s] = res(n);
  });
  return out;
}

FockVec amplifier_G(const FockVec& state, double g, int mode) {
  std::vector<Complex> f(state.dim());
  for (int n = 0; n < state.dim(); ++n) f[n] = (g - 1.0) * n + 1.0;
  return apply_diagonal(state, mode, f);
}

FockVec amplifier_GN(const FockVec& state, double g, int N, int mode) {
  if (N < 0) throw DomainError("amplifier cutoff N must be non-negative");
  std::vector<Complex> f(state.dim());
  for (int n = 0; n < state.dim(); ++n) f[n] = n <= N ? std::pow(g, n - N) : 1.0;
  return apply_diagonal(state, mode, f);
}

FockVec beam_splitter(const FockVec& state, double T, int mode_a, int mode_b, gauss::ReflectionSign sign) {
  require_mode(state, mode_a);
  require_mode(state, mode_b);
  if (mode_a == mode_b) throw DomainError("beam splitter needs two distinct modes");
  if (!(T >= 0.0 && T <= 1.0)) throw DomainError(fmt::format("transmittance T = {} outside [0, 1]", T));
  const int d = state.dim();
  const double theta = (sign == gauss::ReflectionSign::kPositive ? 1.0 : -1.0) * std::atan2(std::sqrt(1.0 - T), std::sqrt(T));

  std::vector<Eigen::MatrixXd> blocks;
  for (int total = 0; total < d; ++total) blocks.push_back(bs_block(total, theta));

  const std::size_t sa = state.stride(mode_a);
  const std::size_t sb = state.stride(mode_b);
  FockVec out = state;
  const std::array<int, 2> fixed{mode_a, mode_b};
  for_each_base(state, fixed, [&](std::size_t base) {
    for (int total = 0; total <= 2 * (d - 1); ++total) {
      const int k_lo = std::max(0, total - (d - 1));
      const int k_hi = std::min(total, d - 1);
      if (total >= d) {
        double leak = 0.0;
        for (int k = k_lo; k <= k_hi; ++k) leak += std::norm(state[base + k * sa + (total - k) * sb]);
        if (leak > kBlockLeakTolerance) {
          throw TruncationError(fmt::format("beam splitter: {:.2e} of weight in photon-number block {} beyond truncation {}",
                                            leak, total, d));
        }
        continue;
      }
      Amplitudes v(total + 1);
      for (int k = 0; k <= total; ++k) v(k) = state[base + k * sa + (total - k) * sb];
      const Amplitudes w = blocks[total] * v;
      for (int k = 0; k <= total; ++k) out[base + k * sa + (total - k) * sb] = w(k);
    }
  });
  return out;
}

Eigen::MatrixXcd displacement_matrix(Complex z, int dim) {
  // Columns D(z)|n⟩ = (a† - z*)ⁿ/√n! |z⟩, built on a padded space and cropped.
  const int big = dim + kDisplacementPad;
  Eigen::MatrixXcd cols(big, dim);
  cols.col(0) = coherent_coefficients(z, big);
  for (int n = 0; n + 1 < dim; ++n) {
    Amplitudes next = -std::conj(z) * cols.col(n);
    for (int m = 0; m + 1 < big; ++m) next(m + 1) += std::sqrt(static_cast<double>(m + 1)) * cols(m, n);
    cols.col(n + 1) = next / std::sqrt(static_cast<double>(n + 1));
  }
  return cols.topRows(dim);
}

FockVec contract_mode(const FockVec& state, int mode, const Amplitudes& coefficients) {
  require_mode(state, mode);
  if (state.n_modes() < 2) throw DomainError("cannot contract the only mode of a state");
  const int d = state.dim();
  if (coefficients.size() != d) throw DomainError("contraction coefficients do not match truncation");
  const std::size_t s = state.stride(mode);
  FockVec out(state.n_modes() - 1, d);
  // Flat index without the contracted digit: high part / (s*d), low part % s.
  for (std::size_t i = 0; i < state.size(); ++i) {
    const int n = static_cast<int>((i / s) % d);
    const std::size_t reduced = (i / (s * d)) * s + i % s;
    out[reduced] += coefficients(n) * state[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Resource preparation

PreparedResource prepare_resource_fock(double lambda, double mu, double T, int dim, Detector detector,
                                       gauss::TapConvention convention) {
  const FockVec ab = tmsv_state(lambda, dim);
  const FockVec cd = tmsv_state(mu, dim);
  const std::size_t d2 = ab.size();

  FockVec full(4, dim);
  for (std::size_t i = 0; i < d2; ++i) {
    if (ab[i] == 0.0) continue;
    full.amplitudes().segment(static_cast<Eigen::Index>(i * d2), static_cast<Eigen::Index>(d2)) = ab[i] * cd.amplitudes();
  }
  const auto bd_sign = convention == gauss::TapConvention::kMatched ? gauss::ReflectionSign::kPositive
                                                                    : gauss::ReflectionSign::kNegative;
  full = beam_splitter(full, T, 0, 2);
  full = beam_splitter(full, T, 1, 3, bd_sign);

  // Rows index (A,B), columns index (C,D).
  using RowMajor = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMajor> by_cd(full.amplitudes().data(), static_cast<Eigen::Index>(d2),
                                                 static_cast<Eigen::Index>(d2));
  PreparedResource res;
  std::vector<std::pair<double, std::size_t>> clicks;
  for (int c = 0; c < dim; ++c) {
    for (int dd = 0; dd < dim; ++dd) {
      const std::size_t col = static_cast<std::size_t>(c) * dim + dd;
      const double p = by_cd.col(static_cast<Eigen::Index>(col)).squaredNorm();
      const int outcome = (c > 0 ? 0 : 2) + (dd > 0 ? 0 : 1);
      res.outcome_probabilities[outcome] += p;
      if (c > 0 && dd > 0) clicks.emplace_back(p, col);
    }
  }

  auto branch = [&](std::size_t col) { return FockVec(2, dim, by_cd.col(static_cast<Eigen::Index>(col))); };

  if (detector == Detector::kPnr) {
    const FockVec psi = branch(static_cast<std::size_t>(dim) + 1);
    res.p_ab = psi.norm_squared();
    if (res.p_ab <= 0.0) throw ProbabilityError("single-photon coincidence has zero probability");
    res.state.members.push_back({res.p_ab, psi.normalized()});
    return res;
  }

  std::sort(clicks.begin(), clicks.end(), std::greater<>());
  const double p_click = res.outcome_probabilities[0];
  if (p_click <= 0.0) throw ProbabilityError("double click has zero probability");
  double remaining = p_click;
  for (const auto& [p, col] : clicks) {
    if (remaining < 1e-10 * p_click || p == 0.0) break;
    res.state.members.push_back({p, branch(col).normalized()});
    remaining -= p;
  }
  res.omitted_weight = std::max(remaining, 0.0);
  res.p_ab = res.state.total_weight();
  return res;
}

FockMix ideal_resource(double lambda, double g, int dim) {
  const FockVec psi = amplifier_G(tmsv_state(lambda, dim), g, 1);
  return {{{1.0, psi.normalized()}}};
}

FockMix gn_resource(double lambda, double g, int N, int dim) {
  const FockVec psi = amplifier_GN(tmsv_state(lambda, dim), g, N, 1);
  return {{{1.0, psi.normalized()}}};
}

// ---------------------------------------------------------------------------
// Teleportation

Teleported teleport_input_fock(const FockMix& resource, const FockVec& input, Complex beta, double k) {
  if (resource.members.empty()) throw ProbabilityError("empty resource mixture");
  if (input.n_modes() != 1) throw DomainError("teleported input must be a single-mode state");
  const int d = resource.members.front().state.dim();
  if (input.dim() > d) {
    const double tail = input.amplitudes().tail(input.dim() - d).squaredNorm();
    if (tail > kTopLevelTolerance) throw TruncationError("input state exceeds the resource truncation");
  }
  Amplitudes coeffs = Amplitudes::Zero(d);
  const int n_in = std::min(d, input.dim());
  coeffs.head(n_in) = input.amplitudes().head(n_in);
  if (beta != 0.0) coeffs = displacement_matrix(beta, d) * coeffs;
  coeffs /= std::sqrt(std::numbers::pi);

  std::optional<Eigen::MatrixXcd> correction;
  if (k * beta != 0.0) correction = displacement_matrix(-k * beta, d);

  const double total = resource.total_weight();
  Teleported out;
  for (const auto& m : resource.members) {
    if (m.state.n_modes() != 2) throw DomainError("resource members must be two-mode (A, B) states");
    FockVec b = contract_mode(m.state, 0, coeffs);
    if (correction) b = apply_single_mode(b, 0, *correction);
    const double p = m.weight * b.norm_squared() / total;
    if (p > 0.0) out.output.members.push_back({p, b.normalized()});
  }
  out.weight = out.output.total_weight();
  return out;
}

Teleported teleport_fock(const FockMix& resource, Complex alpha, Complex beta, double k) {
  if (resource.members.empty()) throw ProbabilityError("empty resource mixture");
  const int d = resource.members.front().state.dim();
  // The input enters displaced by β, so |α+β⟩ is built directly.
  Teleported t = teleport_input_fock(resource, coherent_state(alpha + beta, d), 0.0, 0.0);
  if (k * beta != 0.0) {
    const Eigen::MatrixXcd corr = displacement_matrix(-k * beta, d);
    for (auto& m : t.output.members) m.state = apply_single_mode(m.state, 0, corr);
  }
  return t;
}

WindowTeleported windowed_teleport_fock(const FockMix& resource, Complex alpha, double sigma, double k,
                                        const PolarGrid& grid) {
  WindowTeleported out;
  for (const auto& pt : grid.points(sigma)) {
    const double accept = sigma > 0.0 ? std::exp(-std::norm(pt.beta) / (sigma * sigma)) : 1.0;
    Teleported t = teleport_fock(resource, alpha, pt.beta, k);
    for (auto& m : t.output.members) {
      out.output.members.push_back({m.weight * pt.weight * accept, std::move(m.state)});
    }
  }
  out.p_tele = out.output.total_weight();
  return out;
}

FockVec photon_addition_teleport_demo(double lambda, const FockVec& input, int dim) {
  if (!(std::abs(lambda) < 1.0)) throw DomainError(fmt::format("|lambda| = {} must be < 1", std::abs(lambda)));
  if (input.n_modes() != 1) throw DomainError("input must be a single-mode state");
  if (dim <= input.dim()) throw TruncationError("resource truncation must exceed the input truncation");
  if (input.top_level_weight() > kTopLevelTolerance) throw TruncationError("input state is not contained in its truncation");

  // â_A Σ λⁿ|n,n⟩ on `dim` levels: exact for every input level below dim - 1.
  FockVec tmsv(2, dim);
  double amp = std::sqrt(1.0 - lambda * lambda);
  for (int n = 0; n < dim; ++n) {
    const std::array<int, 2> occ{n, n};
    tmsv[tmsv.index(occ)] = amp;
    amp *= lambda;
  }
  const FockVec resource = apply_ladder(tmsv, 0, Ladder::kAnnihilate);
  const double w = resource.norm_squared();
  const FockMix mix{{{w, resource.normalized()}}};
  Teleported t = teleport_input_fock(mix, input, 0.0, 0.0);
  if (t.output.members.empty()) throw ProbabilityError("teleported state vanished");
  return t.output.members.front().state;
}

// ---------------------------------------------------------------------------
// Observables

Metrics metrics_fock(const FockMix& state, Complex alpha, std::optional<Complex> fidelity_target) {
  check_members_single_mode(state);
  const double total = state.total_weight();
  if (!(total > 0.0)) throw ProbabilityError("metrics of a zero-weight state");

  Complex a1 = 0.0, a2 = 0.0;
  double nbar = 0.0;
  for (const auto& m : state.members) {
    const FockVec& psi = m.state;
    if (psi.top_level_weight() > kTopLevelTolerance) {
      throw TruncationError(fmt::format("output occupies the top Fock level of truncation {} (weight {:.2e})",
                                        psi.dim(), psi.top_level_weight()));
    }
    Complex s1 = 0.0, s2 = 0.0;
    double sn = 0.0;
    for (int n = 1; n < psi.dim(); ++n) {
      s1 += std::sqrt(static_cast<double>(n)) * std::conj(psi[n - 1]) * psi[n];
      sn += n * std::norm(psi[n]);
      if (n >= 2) s2 += std::sqrt(static_cast<double>(n * (n - 1))) * std::conj(psi[n - 2]) * psi[n];
    }
    a1 += m.weight * s1;
    a2 += m.weight * s2;
    nbar += m.weight * sn;
  }
  a1 /= total;
  a2 /= total;
  nbar /= total;

  Metrics out;
  out.mean_re = a1.real();
  out.mean_im = a1.imag();
  out.gain = std::abs(alpha) > 0.0 ? (a1 / alpha).real() : std::numeric_limits<double>::quiet_NaN();
  out.vx = a2.real() + nbar + 0.5 - 2.0 * a1.real() * a1.real();
  out.vp = -a2.real() + nbar + 0.5 - 2.0 * a1.imag() * a1.imag();
  out.uncertainty_product = out.vx * out.vp;

  const int d = state.members.front().state.dim();
  const FockVec target(1, d, coherent_coefficients(fidelity_target.value_or(a1), d));
  double fid = 0.0;
  for (const auto& m : state.members) fid += m.weight * std::norm(target.inner(m.state));
  out.fidelity = fid / total;
  out.p_tot = total;
  return out;
}

double husimi_q(const FockVec& state, std::span<const Complex> omega) {
  if (static_cast<int>(omega.size()) != state.n_modes()) throw DomainError("one phase-space point per mode required");
  FockVec reduced = state;
  for (int m = state.n_modes() - 1; m >= 1; --m) {
    reduced = contract_mode(reduced, m, coherent_coefficients(omega[m], state.dim()).conjugate());
  }
  const Complex overlap = coherent_coefficients(omega[0], state.dim()).conjugate().transpose() * reduced.amplitudes();
  return std::norm(overlap) / std::pow(std::numbers::pi, state.n_modes());
}

double husimi_q(const FockMix& state, std::span<const Complex> omega) {
  const double total = state.total_weight();
  if (!(total > 0.0)) throw ProbabilityError("Husimi function of a zero-weight state");
  double q = 0.0;
  for (const auto& m : state.members) q += m.weight * husimi_q(m.state, omega);
  return q / total;
}

}  // namespace teleamp::fock
