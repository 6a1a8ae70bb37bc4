#pragma once

#include <stdexcept>
#include <string>

namespace teleamp {

/// Parameter outside the physical domain of an operation (|λ| ≥ 1, η ∉ [0,1], ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Fock-space truncation too small for the requested state.
class TruncationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Matrix factorization failed or the matrix is too ill-conditioned to trust.
class ConditioningError : public std::runtime_error {
 public:
  ConditioningError(const std::string& what, double condition_number)
      : std::runtime_error(what), condition_number_(condition_number) {}

  double condition_number() const { return condition_number_; }

 private:
  double condition_number_;
};

/// The nominal gain formula hits its pole (Rλ + Tμ)(Rμ + Tλ) = 0.
class PoleError : public std::domain_error {
 public:
  PoleError(const std::string& what, double denominator)
      : std::domain_error(what), denominator_(denominator) {}

  double denominator() const { return denominator_; }

 private:
  double denominator_;
};

/// Acceptance-window Gaussian integral does not converge.
class WindowDivergenceError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Conditional event with non-positive probability.
class ProbabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent configuration file or command-line input.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace teleamp
