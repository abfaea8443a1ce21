// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "nfkit/array_model.hpp"
#include "nfkit/types.hpp"

namespace nfkit {

enum class Waveform { CircularGaussian, QPSK, ConstantModulusRandomPhase };

const char* to_string(Waveform w);

// A source whose waveform is gain * (waveform of source `master`).
struct Coherence {
  std::size_t master;
  cdouble gain;
};

struct SourceSpec {
  double theta = 0.0;
  double range = kInfiniteRange;  // infinite => far-field source
  double power = 1.0;             // linear; ignored for coherent copies
  Waveform waveform = Waveform::CircularGaussian;
  std::optional<Coherence> coherence;

  bool far_field() const { return std::isinf(range); }
};

struct SnapshotSet {
  CMat data;  // N x T
  double snr_db = 0.0;
  std::uint64_t seed = 0;
  std::vector<SourceSpec> sources;
  ArrayGeometry geometry;

  Eigen::Index num_snapshots() const { return data.cols(); }
};

struct CovarianceEstimate {
  CMat matrix;
  Eigen::Index num_snapshots = 0;
};

struct SynthesisOptions {
  // Model used for finite-range sources; far-field sources are always planar.
  SteeringModel near_field_model = SteeringModel::FresnelQuadratic;
};

// Noise is circular white Gaussian with per-element variance 10^(-snr_db/10),
// so a unit-power source sees exactly snr_db. snr_db = +inf disables noise.
// Source waveforms and noise are drawn from per-source / per-element
// substreams of `seed`, so the output depends only on the arguments.
SnapshotSet synthesize_snapshots(const ArrayGeometry& geometry, const std::vector<SourceSpec>& sources,
                                 Eigen::Index num_snapshots, double snr_db, std::uint64_t seed,
                                 const SynthesisOptions& options = {});

// Validates coherent-group structure; throws ConfigurationError.
void validate_sources(const std::vector<SourceSpec>& sources);

// Waveform samples of every source (K x T), coherent copies included.
CMat source_waveforms(const std::vector<SourceSpec>& sources, Eigen::Index num_snapshots, std::uint64_t seed);

CMat steering_matrix(const ArrayGeometry& geometry, const std::vector<SourceSpec>& sources,
                     SteeringModel near_field_model = SteeringModel::FresnelQuadratic);

CovarianceEstimate sample_covariance(const SnapshotSet& snapshots);
CovarianceEstimate sample_covariance(const CMat& data);

double noise_variance_for_snr(double snr_db);

}  // namespace nfkit
