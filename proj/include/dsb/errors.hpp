#pragma once

#include <stdexcept>
#include <string>

namespace dsb {

// Invalid arguments or structurally inconsistent inputs.
class input_error : public std::invalid_argument {
 public:
  explicit input_error(const std::string& what) : std::invalid_argument(what) {}
};

// Numerical failure (e.g. Cholesky factorization after jitter escalation).
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

// A grid or node set does not cover the region an operation needs.
class coverage_error : public std::runtime_error {
 public:
  explicit coverage_error(const std::string& what) : std::runtime_error(what) {}
};

// Density support violation (q = 0 where p > 0 in a KL integrand).
class support_error : public std::runtime_error {
 public:
  explicit support_error(const std::string& what) : std::runtime_error(what) {}
};

// A probe cannot run or produce a meaningful estimate.
class probe_error : public std::runtime_error {
 public:
  explicit probe_error(const std::string& what) : std::runtime_error(what) {}
};

// Run configuration errors (parse or validation).
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dsb
