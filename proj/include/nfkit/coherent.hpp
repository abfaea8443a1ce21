// SPDX-License-Identifier: Apache-2.0
//
// Coherent far-field + near-field mixture: a far-field master s_1(t) and
// near-field copies zeta_k s_1(t). The covariance is rank one; the
// calibrated response a~(theta) = a(theta) + sum_k zeta_k a(theta_k, r_k)
// plays the role of the steering vector.
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "nfkit/array_model.hpp"
#include "nfkit/scenario.hpp"
#include "nfkit/types.hpp"

namespace nfkit {

struct CalibrationTable {
  RVec angles;              // C calibration angles
  CMat measured_steering;   // N x C, a~(theta_c)
  CMat gamma;               // N x C, a~ / a entrywise
};

// Uniform calibration angles over [-pi/2, pi/2] (C >= 2).
RVec calibration_angles(int count);

// Each disturbance re-radiates the calibration signal with its coherence gain
// (or sqrt(power) when no gain is given) from its (theta, range). Additive
// measurement noise at calibration_snr_db is drawn from `seed`; +inf = none.
CalibrationTable build_calibration(const ArrayGeometry& geometry, int num_angles,
                                   const std::vector<SourceSpec>& nf_disturbances, std::uint64_t seed,
                                   double calibration_snr_db = std::numeric_limits<double>::infinity());

struct CalibratedDoa {
  double theta;
  std::size_t index;
  RVec spectrum;  // over calibration angles
};

// Rank-one MUSIC restricted to the calibration angles, using the calibrated
// responses a~(theta_c) as steering vectors.
CalibratedDoa estimate_ff_doa_calibrated(const CovarianceEstimate& R, const CalibrationTable& calib);
CalibratedDoa estimate_ff_doa_calibrated(const SnapshotSet& snapshots, const CalibrationTable& calib);

struct NftMatrix {
  CMat matrix;
  double residual = 0.0;  // ||A_FF - T A_NF||_F / ||A_FF||_F
  int rank = 0;           // retained singular values
  bool truncated = false; // some singular values fell below 1e-8 sigma_max
};

// T = A_FF pinv(A_NF), A_NF taken at nf_ring_range.
NftMatrix build_nft(const ArrayGeometry& geometry, const RVec& calib_angles, double nf_ring_range);

double default_ring_range(const ArrayGeometry& geometry);

struct NfEstimate {
  double theta;
  double range;
  cdouble gain;  // least-squares amplitude on the deflated principal vector
};

struct CoherentResult {
  double ff_theta;
  std::vector<NfEstimate> near_field;
  std::vector<double> nf_theta_candidates;  // far-field MUSIC peaks after the transform
  double deflated_energy_ratio = 0.0;
};

struct CoherentOptions {
  std::vector<double> theta_grid;  // NF angle search; default 0.1 degree grid
  double range_epsilon = 0.1;      // polar ring density for the range search
  std::optional<double> r_min;     // default: reactive limit
  double negligible_energy = 1e-6; // deflated / total energy below this => no NF path
};

CoherentResult resolve_coherent_mixture(const SnapshotSet& snapshots, const CalibrationTable& calib,
                                        const NftMatrix& nft, int fbss_len, int K_N,
                                        const CoherentOptions& options = {});

}  // namespace nfkit
