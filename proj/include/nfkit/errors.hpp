// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nfkit {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed scenario or experiment configuration.
class ConfigurationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A peak search found fewer maxima than requested. `found` holds what was
// located, as (first coordinate, second coordinate) pairs.
class PeakShortageError : public std::runtime_error {
 public:
  PeakShortageError(const std::string& what, std::vector<std::pair<double, double>> found)
      : std::runtime_error(what), found_(std::move(found)) {}
  const std::vector<std::pair<double, double>>& found() const { return found_; }

 private:
  std::vector<std::pair<double, double>> found_;
};

// A multi-stage pipeline failed; stage() names where.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace nfkit
