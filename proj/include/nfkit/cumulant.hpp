// SPDX-License-Identifier: Apache-2.0
//
// Fourth-order cumulant DoA for mixed far/near-field sources on a symmetric
// array (N = 2*Nbar + 1, centre reference). Row p of C1 (p = -Nbar..Nbar)
// holds
//
//   [C1]_{p,q} = cum{ y_p, y_{-p}^*, y_q^*, y_{-q} },
//
// which in the noiseless limit equals sum_k c_k e^{j 2 (p - q) omega_k}: the
// quadratic phase cancels, so C1 only sees omega. Stage two recovers kappa
// per omega estimate from the second-order noise subspace.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nfkit/array_model.hpp"
#include "nfkit/scenario.hpp"
#include "nfkit/types.hpp"

namespace nfkit {

struct CumulantMatrixC1 {
  CMat matrix;
  std::vector<double> kurtosis_estimates;  // empty unless filled by the caller
};

// Throws DomainError for even N or a non-centred reference.
CumulantMatrixC1 cumulant_c1(const SnapshotSet& snapshots);
CumulantMatrixC1 cumulant_c1(const CMat& data);

// b1(omega) = [e^{-j 2 Nbar omega}, ..., e^{j 2 Nbar omega}]^T.
CVec cumulant_steering(int num_elements, double omega);

// Analytic C1 for independent sources with kurtosis c_k.
CMat analytic_c1(int num_elements, const std::vector<double>& omegas, const std::vector<double>& kurtosis);

// b1 is pi-periodic in omega, so only |omega| < pi/2 is identifiable.
// This grid spans [-min(2 pi d / lambda, pi/2), +min(...)].
std::vector<double> default_omega_grid(const ArrayGeometry& geometry, int count = 721);

// Returns at most K omega estimates: strict local maxima of the 1-D MUSIC
// spectrum at least 10 dB above its median, strongest first (the strongest is
// always kept). Sources sharing omega give one merged peak, so fewer than K
// values may come back. Throws PeakShortageError when there is no maximum.
std::vector<double> music_omega(const CumulantMatrixC1& c1, int K, const std::vector<double>& omega_grid);

struct MixedSourceEstimate {
  double omega;
  double kappa;
  bool far_field;
  double theta;
  double range;  // kInfiniteRange for far-field sources
  double spectrum_value;
};

struct KappaFailure {
  double omega;
  std::string message;
};

struct KappaSearchResult {
  std::vector<MixedSourceEstimate> estimates;
  std::vector<KappaFailure> failures;
};

struct KappaSearchOptions {
  // |kappa| below this is far-field; default pi d^2 / (10 lambda d_F).
  std::optional<double> ff_threshold;
  double peak_floor_db = 10.0;  // over the median of each 1-D kappa spectrum
  bool refine = true;
};

double default_ff_kappa_threshold(const ArrayGeometry& geometry);

// Uniform grid from the reactive-limit curvature at broadside up to a small
// positive margin, containing 0 exactly.
std::vector<double> default_kappa_grid(const ArrayGeometry& geometry, int negative_points = 400);

// One estimate per omega_hat (strongest kappa peak); if fewer than K_total
// estimates result, the remaining strongest kappa peaks fill the gap (the
// merged-omega case). Failures are reported per omega rather than thrown.
KappaSearchResult kappa_search(const CovarianceEstimate& R, const ArrayGeometry& geometry, int K_total,
                               const std::vector<double>& omega_hat, const std::vector<double>& kappa_grid,
                               const KappaSearchOptions& options = {});

}  // namespace nfkit
