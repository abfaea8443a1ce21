// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "nfkit/array_model.hpp"
#include "nfkit/types.hpp"

namespace nfkit {

struct ChannelPath {
  cdouble alpha;
  double theta;
  double range;  // kInfiniteRange for a far-field path
};

struct ChannelSpec {
  std::vector<ChannelPath> paths;
};

struct RingSample {
  int s;
  double range;  // kInfiniteRange for s = 0
};

struct AtomLabel {
  double theta;
  double range;
  int ring;
};

struct PolarDictionary {
  CMat atoms;  // N x Q
  std::vector<AtomLabel> labels;
  double epsilon = 0.0;
  bool normalized = true;
  ArrayGeometry geometry;  // centre-referenced copy used for every atom
};

// theta_n = asin(n lambda / (N d)), n = -floor(N d / lambda) .. +floor(N d / lambda), ascending.
std::vector<double> angle_samples(const ArrayGeometry& geometry);

// r_s = N^2 d^2 cos^2(theta) / (2 lambda eps^2 s); s = 0 is the far-field ring.
// Enumeration stops at the first ring closer than r_min.
std::vector<RingSample> distance_samples(const ArrayGeometry& geometry, double theta, double epsilon, double r_min);

struct DictionaryOptions {
  // Drop an angle whose far-field atom duplicates an earlier one (possible
  // when (sin theta_p - sin theta_q) d / lambda is a non-zero integer,
  // e.g. +-90 degrees at half-wavelength spacing).
  bool drop_aliased_angles = true;
};

// Atoms use Fresnel steering on the centre-referenced array and are
// l2-normalized. r_min defaults to the reactive limit.
PolarDictionary build_dictionary(const ArrayGeometry& geometry, double epsilon, std::optional<double> r_min = {},
                                 const DictionaryOptions& options = {});

struct CoherenceResult {
  double mu;             // max_{p != q} |a_p^H a_q| on unit-modulus atoms
  double mu_normalized;  // mu / N
  std::size_t p;
  std::size_t q;
};

CoherenceResult coherence(const PolarDictionary& dictionary);

CVec synthesize_channel(const ArrayGeometry& geometry, const ChannelSpec& spec);

struct PilotSetup {
  double rho = 1.0;
  int num_rf = 1;
  int num_slots = 1;
  CMat combining;  // M x N, entries e^{j phi} / sqrt(N)
  std::uint64_t seed = 0;

  int num_measurements() const { return num_rf * num_slots; }
};

PilotSetup make_pilot_setup(int num_elements, int num_rf, int num_slots, double snr_db, std::uint64_t seed);

// y = sqrt(rho) A h + n with n ~ CN(0, I), drawn from the setup seed.
CVec observe_pilot(const CVec& h, const PilotSetup& setup);

// Minimum-norm least squares solution of y = sqrt(rho) A h.
CVec ls_estimate(const CVec& y, const PilotSetup& setup);

struct OmpOptions {
  std::optional<int> sparsity;
  std::optional<double> residual_tol;
};

struct OmpResult {
  CVec h_hat;
  std::vector<std::size_t> support;
  std::vector<AtomLabel> labels;
  double residual_norm = 0.0;
};

OmpResult omp_estimate(const CVec& y, const PilotSetup& setup, const PolarDictionary& dictionary,
                       const OmpOptions& options);

double nmse(const CVec& h_hat, const CVec& h_true);

}  // namespace nfkit
