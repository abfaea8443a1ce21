// SPDX-License-Identifier: Apache-2.0
#include "nfkit/scenario.hpp"

#include <cmath>
#include <string>

#include "nfkit/errors.hpp"
#include "nfkit/rng.hpp"

namespace nfkit {

const char* to_string(Waveform w) {
  switch (w) {
    case Waveform::CircularGaussian: return "gaussian";
    case Waveform::QPSK: return "qpsk";
    case Waveform::ConstantModulusRandomPhase: return "constant-modulus";
  }
  return "?";
}

void validate_sources(const std::vector<SourceSpec>& sources) {
  if (sources.empty()) throw ConfigurationError("at least one source is required");
  for (std::size_t k = 0; k < sources.size(); ++k) {
    const SourceSpec& s = sources[k];
    if (!(s.power > 0.0)) throw ConfigurationError("source " + std::to_string(k) + ": power must be positive");
    if (!(s.range > 0.0)) throw ConfigurationError("source " + std::to_string(k) + ": range must be positive");
    if (!s.coherence) continue;
    const std::size_t m = s.coherence->master;
    if (m >= sources.size() || m == k)
      throw ConfigurationError("source " + std::to_string(k) + ": coherence gain without a valid master source");
    if (sources[m].coherence)
      throw ConfigurationError("source " + std::to_string(k) + ": master " + std::to_string(m) +
                               " is itself a coherent copy");
  }
}

double noise_variance_for_snr(double snr_db) {
  if (std::isinf(snr_db) && snr_db > 0) return 0.0;
  return std::pow(10.0, -snr_db / 10.0);
}

namespace {

void draw_waveform(Waveform w, double power, RandomStream& rng, Eigen::Ref<Eigen::RowVectorXcd, 0, Eigen::InnerStride<>> out) {
  const double amp = std::sqrt(power);
  for (Eigen::Index t = 0; t < out.size(); ++t) {
    switch (w) {
      case Waveform::CircularGaussian:
        out[t] = rng.complex_normal(power);
        break;
      case Waveform::QPSK: {
        const std::uint64_t sym = rng.next_u64() >> 62;
        const double re = (sym & 1u) ? 1.0 : -1.0;
        const double im = (sym & 2u) ? 1.0 : -1.0;
        out[t] = amp * cdouble(re, im) / std::sqrt(2.0);
        break;
      }
      case Waveform::ConstantModulusRandomPhase:
        out[t] = amp * rng.unit_phase();
        break;
    }
  }
}

}  // namespace

CMat source_waveforms(const std::vector<SourceSpec>& sources, Eigen::Index num_snapshots, std::uint64_t seed) {
  validate_sources(sources);
  const auto K = static_cast<Eigen::Index>(sources.size());
  CMat s(K, num_snapshots);
  for (Eigen::Index k = 0; k < K; ++k) {
    if (sources[k].coherence) continue;
    RandomStream rng(seed, {stream_tag("source"), static_cast<std::uint64_t>(k)});
    draw_waveform(sources[k].waveform, sources[k].power, rng, s.row(k));
  }
  for (Eigen::Index k = 0; k < K; ++k) {
    if (const auto& c = sources[k].coherence) s.row(k) = c->gain * s.row(static_cast<Eigen::Index>(c->master));
  }
  return s;
}

CMat steering_matrix(const ArrayGeometry& geometry, const std::vector<SourceSpec>& sources,
                     SteeringModel near_field_model) {
  CMat A(geometry.num_elements(), static_cast<Eigen::Index>(sources.size()));
  for (std::size_t k = 0; k < sources.size(); ++k) {
    const SourceSpec& s = sources[k];
    A.col(static_cast<Eigen::Index>(k)) =
        s.far_field() ? steering(geometry, s.theta, kInfiniteRange, SteeringModel::FarFieldPlanar)
                      : steering(geometry, s.theta, s.range, near_field_model);
  }
  return A;
}

SnapshotSet synthesize_snapshots(const ArrayGeometry& geometry, const std::vector<SourceSpec>& sources,
                                 Eigen::Index num_snapshots, double snr_db, std::uint64_t seed,
                                 const SynthesisOptions& options) {
  if (num_snapshots < 1) throw ConfigurationError("need at least one snapshot");
  validate_sources(sources);
  const CMat A = steering_matrix(geometry, sources, options.near_field_model);
  const CMat S = source_waveforms(sources, num_snapshots, seed);
  CMat Y = A * S;

  const double sigma2 = noise_variance_for_snr(snr_db);
  if (sigma2 > 0.0) {
    for (Eigen::Index n = 0; n < Y.rows(); ++n) {
      RandomStream rng(seed, {stream_tag("noise"), static_cast<std::uint64_t>(n)});
      for (Eigen::Index t = 0; t < num_snapshots; ++t) Y(n, t) += rng.complex_normal(sigma2);
    }
  }
  return SnapshotSet{std::move(Y), snr_db, seed, sources, geometry};
}

CovarianceEstimate sample_covariance(const CMat& data) {
  if (data.cols() < 1) throw DomainError("sample covariance needs at least one snapshot");
  CMat R = data * data.adjoint() / static_cast<double>(data.cols());
  // Symmetrize away round-off so downstream Hermitian solvers see an exact Hermitian matrix.
  R = 0.5 * (R + R.adjoint()).eval();
  return {std::move(R), data.cols()};
}

CovarianceEstimate sample_covariance(const SnapshotSet& snapshots) { return sample_covariance(snapshots.data); }

}  // namespace nfkit
