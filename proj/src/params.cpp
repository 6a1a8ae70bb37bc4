#include "teleamp/params.hpp"

#include <cmath>

#include <fmt/format.h>

#include "teleamp/errors.hpp"

namespace teleamp {

namespace {

void require_unit_interval(double value, const char* name) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw DomainError(fmt::format("{} = {} is outside [0, 1]", name, value));
  }
}

void require_open_unit(double value, const char* name) {
  if (!(std::abs(value) < 1.0)) {
    throw DomainError(fmt::format("|{}| = {} must be < 1", name, std::abs(value)));
  }
}

}  // namespace

void AmplifierParams::validate() const {
  require_open_unit(lambda, "lambda");
  require_open_unit(mu, "mu");
  require_unit_interval(T, "T");
  require_unit_interval(eta_ab, "eta_ab");
  require_unit_interval(eta_cd, "eta_cd");
  require_unit_interval(eta_apd, "eta_apd");
  if (!(g > 0.0)) throw DomainError(fmt::format("gain g = {} must be positive", g));
  if (N < 0) throw DomainError(fmt::format("cutoff N = {} must be non-negative", N));
  if (!(sigma >= 0.0)) throw DomainError(fmt::format("sigma = {} must be non-negative", sigma));
  if (!std::isfinite(k)) throw DomainError("corrective displacement k must be finite");
  require_open_unit(lambda_eff(), "lambda_eff");
}

}  // namespace teleamp
