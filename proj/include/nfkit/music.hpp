// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "nfkit/array_model.hpp"
#include "nfkit/scenario.hpp"
#include "nfkit/types.hpp"

namespace nfkit {

struct SubspacePair {
  CMat signal_basis;  // N x K
  CMat noise_basis;   // N x (N - K)
  RVec eigenvalues;   // descending, length N
};

// Partition by the K largest eigenvalues. Requires 1 <= K < N.
SubspacePair eigendecompose(const CMat& R, int K);
SubspacePair eigendecompose(const CovarianceEstimate& R, int K);

// 1 / (a^H U_N U_N^H a) for a unit-modulus steering vector, evaluated as
// 1 / (||a||^2 - ||U_S^H a||^2) with the denominator floored at 1e-12 * ||a||^2.
double music_value(const SubspacePair& subspaces, const CVec& a);

struct Peak2D {
  double theta;
  double range;
  double value;
  int theta_index;
  int range_index;
};

struct Spectrum2D {
  std::vector<double> theta_grid;
  std::vector<double> range_grid;
  RMat values;  // theta x range
  std::vector<Peak2D> peaks;
};

// theta in [-90, 90] degrees at 0.5 degree steps.
std::vector<double> default_theta_grid();
// 200 log-spaced ranges from the reactive limit to 2 d_F.
std::vector<double> default_range_grid(const ArrayGeometry& geometry, int count = 200);

Spectrum2D music_spectrum_2d(const SubspacePair& subspaces, const ArrayGeometry& geometry,
                             const std::vector<double>& theta_grid, const std::vector<double>& range_grid,
                             SteeringModel model = SteeringModel::FresnelQuadratic);

// K strongest strict local maxima (8-neighbourhood), descending value; ties
// broken by lower theta index then lower range index. Throws
// PeakShortageError when fewer than K maxima exist.
std::vector<Peak2D> find_peaks(const Spectrum2D& spectrum, int K);

// Polishes a grid peak by alternating golden-section searches in theta and
// in 1/r, each bracketed by the neighbouring grid cells.
Peak2D refine_peak(const SubspacePair& subspaces, const ArrayGeometry& geometry, const Spectrum2D& spectrum,
                   const Peak2D& peak, SteeringModel model = SteeringModel::FresnelQuadratic);

// Forward-backward spatially smoothed covariance of size L_s x L_s. When
// K > 0 the subarray count N - L_s + 1 must be at least K and L_s >= K.
CovarianceEstimate fbss(const CMat& data, int subarray_len, int K = 0);
CovarianceEstimate fbss(const SnapshotSet& snapshots, int subarray_len, int K = 0);

// Numerical rank: eigenvalues above rel_threshold * largest.
int numerical_rank(const CMat& R, double rel_threshold = 1e-6);

// Golden-section maximization of f on [lo, hi].
template <class F>
double golden_maximize(F&& f, double lo, double hi, int iterations = 60) {
  const double g = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iterations && (b - a) > 1e-15 * (1.0 + std::abs(a) + std::abs(b)); ++i) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = f(x1);
    }
  }
  return f1 > f2 ? x1 : x2;
}

}  // namespace nfkit
