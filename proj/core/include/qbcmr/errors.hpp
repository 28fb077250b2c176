#pragma once

#include <stdexcept>
#include <string>

namespace qbcmr {

/// Invalid arguments, spec violations, domain errors.
class invalid_argument_error : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Configuration file problems (unknown key, missing key, bad catalog name).
class config_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Numerical failures: singular designs, non-convergent quadrature.
class numerical_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised when one replication of a Monte Carlo study fails; carries the
/// replication index and seed so the failure can be reproduced in isolation.
class replication_error : public std::runtime_error {
public:
  replication_error(int replication, std::uint64_t seed, const std::string& what_inner)
      : std::runtime_error("replication " + std::to_string(replication) + " (seed " +
                           std::to_string(seed) + ") failed: " + what_inner),
        replication_(replication),
        seed_(seed) {}

  int replication() const noexcept { return replication_; }
  std::uint64_t seed() const noexcept { return seed_; }

private:
  int replication_;
  std::uint64_t seed_;
};

}  // namespace qbcmr
