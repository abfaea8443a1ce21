// SPDX-License-Identifier: Apache-2.0
#include "nfkit/coherent.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nfkit/errors.hpp"
#include "nfkit/music.hpp"
#include "nfkit/polar_omp.hpp"
#include "nfkit/rng.hpp"

namespace nfkit {

RVec calibration_angles(int count) {
  if (count < 2) throw DomainError("calibration needs at least two angles");
  RVec a(count);
  for (int c = 0; c < count; ++c) a[c] = -kPi / 2 + kPi * c / (count - 1);
  return a;
}

CalibrationTable build_calibration(const ArrayGeometry& geometry, int num_angles,
                                   const std::vector<SourceSpec>& nf_disturbances, std::uint64_t seed,
                                   double calibration_snr_db) {
  CalibrationTable t;
  t.angles = calibration_angles(num_angles);
  const int N = geometry.num_elements();

  CVec disturbance = CVec::Zero(N);
  for (const SourceSpec& s : nf_disturbances) {
    const cdouble g = s.coherence ? s.coherence->gain : cdouble(std::sqrt(s.power));
    disturbance += g * steering(geometry, s.theta, s.range);
  }

  const double sigma2 = noise_variance_for_snr(calibration_snr_db);
  t.measured_steering.resize(N, num_angles);
  t.gamma.resize(N, num_angles);
  for (int c = 0; c < num_angles; ++c) {
    const CVec a = steering(geometry, t.angles[c], kInfiniteRange, SteeringModel::FarFieldPlanar);
    CVec m = a + disturbance;
    if (sigma2 > 0.0) {
      RandomStream rng(seed, {stream_tag("calibration"), static_cast<std::uint64_t>(c)});
      for (int n = 0; n < N; ++n) m[n] += rng.complex_normal(sigma2);
    }
    t.measured_steering.col(c) = m;
    t.gamma.col(c) = m.cwiseQuotient(a);
  }
  return t;
}

CalibratedDoa estimate_ff_doa_calibrated(const CovarianceEstimate& R, const CalibrationTable& calib) {
  const SubspacePair sub = eigendecompose(R, 1);
  if (!(sub.eigenvalues[0] > 0.0)) throw DomainError("degenerate covariance: no signal energy");
  CalibratedDoa out{0.0, 0, RVec(calib.angles.size())};
  for (Eigen::Index c = 0; c < calib.angles.size(); ++c) {
    const CVec a = calib.measured_steering.col(c);
    const double nrm = a.norm();
    out.spectrum[c] = nrm > 0.0 ? music_value(sub, a / nrm) : 0.0;
  }
  Eigen::Index best = 0;
  out.spectrum.maxCoeff(&best);
  out.index = static_cast<std::size_t>(best);
  out.theta = calib.angles[best];
  return out;
}

CalibratedDoa estimate_ff_doa_calibrated(const SnapshotSet& snapshots, const CalibrationTable& calib) {
  return estimate_ff_doa_calibrated(sample_covariance(snapshots), calib);
}

double default_ring_range(const ArrayGeometry& geometry) {
  const RegionBoundaries b = region_boundaries(geometry);
  return std::sqrt(b.reactive_limit * b.fraunhofer);
}

NftMatrix build_nft(const ArrayGeometry& geometry, const RVec& calib_angles, double nf_ring_range) {
  if (calib_angles.size() < 1) throw DomainError("NFT needs calibration angles");
  if (!(nf_ring_range > 0.0)) throw DomainError("NFT ring range must be positive");
  const int N = geometry.num_elements();
  const Eigen::Index C = calib_angles.size();
  CMat Aff(N, C), Anf(N, C);
  for (Eigen::Index c = 0; c < C; ++c) {
    Aff.col(c) = steering(geometry, calib_angles[c], kInfiniteRange, SteeringModel::FarFieldPlanar);
    Anf.col(c) = steering(geometry, calib_angles[c], nf_ring_range);
  }
  Eigen::BDCSVD<CMat> svd(Anf, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVec& s = svd.singularValues();
  const double cutoff = 1e-8 * s[0];
  NftMatrix out;
  CMat pinv = CMat::Zero(C, N);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] <= cutoff) {
      out.truncated = true;
      continue;
    }
    pinv += svd.matrixV().col(i) * (1.0 / s[i]) * svd.matrixU().col(i).adjoint();
    ++out.rank;
  }
  out.matrix = Aff * pinv;
  out.residual = (Aff - out.matrix * Anf).norm() / Aff.norm();
  return out;
}

namespace {

struct AnglePeak {
  double theta;
  double value;
};

std::vector<AnglePeak> ff_music_peaks(const SubspacePair& sub, const ArrayGeometry& g, const std::vector<double>& grid) {
  auto value = [&](double t) {
    return music_value(sub, steering(g, t, kInfiniteRange, SteeringModel::FarFieldPlanar));
  };
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) v[i] = value(grid[i]);
  std::vector<AnglePeak> out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const bool left = i == 0 || v[i] > v[i - 1];
    const bool right = i + 1 == grid.size() || v[i] > v[i + 1];
    if (!(left && right)) continue;
    const double lo = grid[i == 0 ? 0 : i - 1], hi = grid[std::min(i + 1, grid.size() - 1)];
    const double t = golden_maximize(value, lo, hi);
    out.push_back({t, std::max(value(t), v[i])});
  }
  std::stable_sort(out.begin(), out.end(), [](const AnglePeak& a, const AnglePeak& b) { return a.value > b.value; });
  return out;
}

}  // namespace

CoherentResult resolve_coherent_mixture(const SnapshotSet& snapshots, const CalibrationTable& calib,
                                        const NftMatrix& nft, int fbss_len, int K_N, const CoherentOptions& options) {
  if (K_N < 1) throw DomainError("coherent mixture needs K_N >= 1");
  const ArrayGeometry& geom = snapshots.geometry;
  const int N = geom.num_elements();
  if (calib.measured_steering.rows() != N || nft.matrix.rows() != N)
    throw DomainError("calibration / NFT size does not match the array");

  CoherentResult out{};
  const CovarianceEstimate R = sample_covariance(snapshots);

  // Stage 1: calibrated far-field DoA.
  CalibratedDoa doa;
  try {
    doa = estimate_ff_doa_calibrated(R, calib);
  } catch (const std::exception& e) {
    throw StageError("ff-doa", e.what());
  }
  out.ff_theta = doa.theta;

  // Principal vector ~ a(theta_1) + sum_k zeta_k a(theta_k, r_k).
  const SubspacePair principal = eigendecompose(R, 1);
  const CVec u1 = principal.signal_basis.col(0);
  const CVec a1 = steering(geom, out.ff_theta, kInfiniteRange, SteeringModel::FarFieldPlanar);
  auto deflate = [&](const CVec& v) -> CVec { return v - a1 * (a1.dot(v) / a1.squaredNorm()); };
  CVec residual = deflate(u1);
  out.deflated_energy_ratio = residual.squaredNorm() / u1.squaredNorm();
  if (out.deflated_energy_ratio < options.negligible_energy) return out;

  // Stage 2: near-to-far transform, smoothing, far-field MUSIC.
  const CMat z = nft.matrix * snapshots.data;
  const int K_total = K_N + 1;
  if (fbss_len <= K_total)
    throw StageError("fbss", "subarray length " + std::to_string(fbss_len) + " leaves no noise subspace for " +
                                 std::to_string(K_total) + " components");
  CovarianceEstimate Rz;
  try {
    Rz = fbss(z, fbss_len, K_total);
  } catch (const DomainError& e) {
    throw StageError("fbss", e.what());
  }
  const SubspacePair sub = eigendecompose(Rz, K_total);
  const ArrayGeometry sub_geom(fbss_len, geom.spacing(), geom.carrier_freq(), 0, geom.propagation_speed());
  std::vector<double> grid = options.theta_grid;
  if (grid.empty())
    for (int i = -900; i <= 900; ++i) grid.push_back(deg2rad(0.1 * i));
  std::vector<AnglePeak> peaks = ff_music_peaks(sub, sub_geom, grid);
  if (peaks.empty()) throw StageError("nf-doa", "far-field MUSIC found no peaks after the transform");
  if (static_cast<int>(peaks.size()) > K_total) peaks.resize(K_total);
  auto nearest = std::min_element(peaks.begin(), peaks.end(), [&](const AnglePeak& a, const AnglePeak& b) {
    return std::abs(a.theta - out.ff_theta) < std::abs(b.theta - out.ff_theta);
  });
  if (static_cast<int>(peaks.size()) == K_total) peaks.erase(nearest);
  if (static_cast<int>(peaks.size()) > K_N) peaks.resize(K_N);
  for (const AnglePeak& p : peaks) out.nf_theta_candidates.push_back(p.theta);

  // Stage 3: range per angle by matching pursuit on the deflated principal vector.
  const double r_min = options.r_min.value_or(region_boundaries(geom).reactive_limit);
  std::vector<CVec> atoms;
  for (const AnglePeak& p : peaks) {
    auto score = [&](double q) {
      const CVec b = deflate(steering(geom, p.theta, 1.0 / q));
      const double bn = b.norm();
      return bn > 0.0 ? std::abs(b.dot(residual)) / bn : 0.0;
    };
    const std::vector<RingSample> rings = distance_samples(geom, p.theta, options.range_epsilon, r_min);
    std::vector<double> qs;
    for (const RingSample& rs : rings)
      if (rs.s > 0) qs.push_back(1.0 / rs.range);
    if (qs.empty()) continue;
    std::size_t best = 0;
    double best_v = -1.0;
    for (std::size_t i = 0; i < qs.size(); ++i) {
      const double v = score(qs[i]);
      if (v > best_v) {
        best_v = v;
        best = i;
      }
    }
    const double lo = best == 0 ? 0.5 * qs[0] : qs[best - 1];
    const double hi = best + 1 < qs.size() ? qs[best + 1] : qs[best] + (qs[best] - lo);
    const double q = golden_maximize(score, lo, hi);
    const double r = 1.0 / (score(q) >= best_v ? q : qs[best]);
    const CVec b = deflate(steering(geom, p.theta, r));
    residual -= b * (b.dot(residual) / b.squaredNorm());
    out.near_field.push_back({p.theta, r, cdouble(0.0)});
    atoms.push_back(steering(geom, p.theta, r));
  }

  // Gains relative to the far-field path, from a joint fit of u1.
  CMat B(N, static_cast<Eigen::Index>(atoms.size()) + 1);
  B.col(0) = a1;
  for (std::size_t k = 0; k < atoms.size(); ++k) B.col(static_cast<Eigen::Index>(k) + 1) = atoms[k];
  const CVec c = B.colPivHouseholderQr().solve(u1);
  if (std::abs(c[0]) > 0.0)
    for (std::size_t k = 0; k < atoms.size(); ++k) out.near_field[k].gain = c[static_cast<Eigen::Index>(k) + 1] / c[0];
  return out;
}

}  // namespace nfkit
