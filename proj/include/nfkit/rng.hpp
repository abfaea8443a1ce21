// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

#include "nfkit/types.hpp"

namespace nfkit {

std::uint64_t splitmix64(std::uint64_t x);

// Stable 64-bit hash of a role name, used as a substream tag.
std::uint64_t stream_tag(std::string_view name);

// Derives an independent seed from a root seed and a path of tags
// (experiment -> trial -> role -> index). Order of the path matters; the
// result does not depend on how many other streams were drawn before.
std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> path);

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
  RandomStream(std::uint64_t root, std::initializer_list<std::uint64_t> path)
      : engine_(derive_seed(root, path)) {}

  double uniform() { return uniform_(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() { return normal_(engine_); }
  // Circular complex Gaussian with E|z|^2 = variance.
  cdouble complex_normal(double variance = 1.0) {
    const double s = std::sqrt(variance / 2.0);
    const double re = normal();
    const double im = normal();
    return {s * re, s * im};
  }
  cdouble unit_phase() {
    const double phi = 2.0 * kPi * uniform();
    return {std::cos(phi), std::sin(phi)};
  }
  std::uint64_t next_u64() { return engine_(); }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace nfkit
