// SPDX-License-Identifier: Apache-2.0
#include "nfkit/music.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nfkit/errors.hpp"

namespace nfkit {

SubspacePair eigendecompose(const CMat& R, int K) {
  const auto N = R.rows();
  if (R.cols() != N) throw DomainError("covariance must be square");
  if (K < 1 || K >= N)
    throw DomainError("source count K = " + std::to_string(K) + " must satisfy 1 <= K < N = " + std::to_string(N));
  Eigen::SelfAdjointEigenSolver<CMat> es(R);
  if (es.info() != Eigen::Success) throw DomainError("eigendecomposition failed");
  // Eigen returns ascending order.
  const CMat U = es.eigenvectors().rowwise().reverse();
  SubspacePair out;
  out.eigenvalues = es.eigenvalues().reverse();
  out.signal_basis = U.leftCols(K);
  out.noise_basis = U.rightCols(N - K);
  return out;
}

SubspacePair eigendecompose(const CovarianceEstimate& R, int K) { return eigendecompose(R.matrix, K); }

double music_value(const SubspacePair& subspaces, const CVec& a) {
  const double aa = a.squaredNorm();
  const double denom = aa - (subspaces.signal_basis.adjoint() * a).squaredNorm();
  return 1.0 / std::max(denom, 1e-12 * aa);
}

std::vector<double> default_theta_grid() {
  std::vector<double> g;
  for (int i = -180; i <= 180; ++i) g.push_back(deg2rad(0.5 * i));
  return g;
}

std::vector<double> default_range_grid(const ArrayGeometry& geometry, int count) {
  if (count < 2) throw DomainError("range grid needs at least 2 points");
  const RegionBoundaries b = region_boundaries(geometry);
  const double lo = std::log(b.reactive_limit), hi = std::log(2.0 * b.fraunhofer);
  std::vector<double> g(count);
  for (int i = 0; i < count; ++i) g[i] = std::exp(lo + (hi - lo) * i / (count - 1));
  return g;
}

Spectrum2D music_spectrum_2d(const SubspacePair& subspaces, const ArrayGeometry& geometry,
                             const std::vector<double>& theta_grid, const std::vector<double>& range_grid,
                             SteeringModel model) {
  if (theta_grid.empty() || range_grid.empty()) throw DomainError("MUSIC grids must be non-empty");
  if (subspaces.signal_basis.rows() != geometry.num_elements())
    throw DomainError("subspace dimension does not match the array");
  Spectrum2D s;
  s.theta_grid = theta_grid;
  s.range_grid = range_grid;
  s.values.resize(static_cast<Eigen::Index>(theta_grid.size()), static_cast<Eigen::Index>(range_grid.size()));
  for (std::size_t i = 0; i < theta_grid.size(); ++i)
    for (std::size_t j = 0; j < range_grid.size(); ++j)
      s.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          music_value(subspaces, steering(geometry, theta_grid[i], range_grid[j], model));
  return s;
}

std::vector<Peak2D> find_peaks(const Spectrum2D& spectrum, int K) {
  if (K < 1) throw DomainError("peak count must be at least 1");
  const RMat& v = spectrum.values;
  std::vector<Peak2D> maxima;
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
      const double x = v(i, j);
      bool strict = true;
      for (int di = -1; di <= 1 && strict; ++di)
        for (int dj = -1; dj <= 1; ++dj) {
          if (di == 0 && dj == 0) continue;
          const Eigen::Index ii = i + di, jj = j + dj;
          if (ii < 0 || jj < 0 || ii >= v.rows() || jj >= v.cols()) continue;
          if (v(ii, jj) >= x) {
            strict = false;
            break;
          }
        }
      if (strict)
        maxima.push_back({spectrum.theta_grid[i], spectrum.range_grid[j], x, static_cast<int>(i), static_cast<int>(j)});
    }
  }
  std::stable_sort(maxima.begin(), maxima.end(), [](const Peak2D& a, const Peak2D& b) {
    if (a.value != b.value) return a.value > b.value;
    if (a.theta_index != b.theta_index) return a.theta_index < b.theta_index;
    return a.range_index < b.range_index;
  });
  if (static_cast<int>(maxima.size()) < K) {
    std::vector<std::pair<double, double>> found;
    for (const auto& p : maxima) found.emplace_back(p.theta, p.range);
    throw PeakShortageError("requested " + std::to_string(K) + " peaks but found " + std::to_string(maxima.size()),
                            std::move(found));
  }
  maxima.resize(K);
  return maxima;
}

Peak2D refine_peak(const SubspacePair& subspaces, const ArrayGeometry& geometry, const Spectrum2D& spectrum,
                   const Peak2D& peak, SteeringModel model) {
  const auto& tg = spectrum.theta_grid;
  const auto& rg = spectrum.range_grid;
  const int i = peak.theta_index, j = peak.range_index;
  const double t_lo = tg[std::max(i - 1, 0)], t_hi = tg[std::min<std::size_t>(i + 1, tg.size() - 1)];
  // Work in inverse range: the spectrum is far closer to symmetric there.
  const double q_lo = 1.0 / rg[std::min<std::size_t>(j + 1, rg.size() - 1)];
  const double q_hi = 1.0 / rg[std::max(j - 1, 0)];
  double theta = peak.theta, q = 1.0 / peak.range;
  auto value = [&](double t, double qq) {
    return music_value(subspaces, steering(geometry, std::clamp(t, -kPi / 2, kPi / 2), 1.0 / qq, model));
  };
  for (int sweep = 0; sweep < 4; ++sweep) {
    if (t_hi > t_lo) theta = golden_maximize([&](double t) { return value(t, q); }, t_lo, t_hi);
    if (q_hi > q_lo) q = golden_maximize([&](double x) { return value(theta, x); }, q_lo, q_hi);
  }
  Peak2D out = peak;
  const double v = value(theta, q);
  if (v >= peak.value) {
    out.theta = theta;
    out.range = 1.0 / q;
    out.value = v;
  }
  return out;
}

CovarianceEstimate fbss(const CMat& data, int subarray_len, int K) {
  const int N = static_cast<int>(data.rows());
  if (subarray_len < 1 || subarray_len > N)
    throw DomainError("subarray length " + std::to_string(subarray_len) + " outside [1, " + std::to_string(N) + "]");
  const int M = N - subarray_len + 1;
  if (K > 0 && (subarray_len < K || M < K))
    throw DomainError("FBSS with L_s = " + std::to_string(subarray_len) + " supports fewer than K = " +
                      std::to_string(K) + " sources");
  const CMat R = sample_covariance(data).matrix;
  const int L = subarray_len;
  CMat Rf = CMat::Zero(L, L);
  for (int m = 0; m < M; ++m) Rf += R.block(m, m, L, L);
  Rf /= static_cast<double>(M);
  // J conj(Rf) J: reverse both axes of the conjugate.
  const CMat Rb = Rf.conjugate().reverse();
  CMat Rs = 0.5 * (Rf + Rb);
  Rs = 0.5 * (Rs + Rs.adjoint()).eval();
  return {std::move(Rs), data.cols()};
}

CovarianceEstimate fbss(const SnapshotSet& snapshots, int subarray_len, int K) {
  return fbss(snapshots.data, subarray_len, K);
}

int numerical_rank(const CMat& R, double rel_threshold) {
  Eigen::SelfAdjointEigenSolver<CMat> es(R, Eigen::EigenvaluesOnly);
  const RVec ev = es.eigenvalues();
  const double top = ev.cwiseAbs().maxCoeff();
  if (top == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) r += std::abs(ev[i]) > rel_threshold * top;
  return r;
}

}  // namespace nfkit
