// SPDX-License-Identifier: Apache-2.0
#include "nfkit/cumulant.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "nfkit/errors.hpp"
#include "nfkit/music.hpp"

namespace nfkit {

namespace {

int half_size(Eigen::Index N) {
  if (N < 3 || N % 2 == 0) throw DomainError("cumulant matrix needs an odd element count, got " + std::to_string(N));
  return static_cast<int>(N / 2);
}

double median(std::vector<double> v) {
  const std::size_t m = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m), v.end());
  return v[m];
}

struct Peak1D {
  std::size_t index;
  double x;
  double value;
};

std::vector<Peak1D> strict_maxima(const std::vector<double>& grid, const std::vector<double>& values) {
  std::vector<Peak1D> out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const bool left = i == 0 || values[i] > values[i - 1];
    const bool right = i + 1 == values.size() || values[i] > values[i + 1];
    if (left && right) out.push_back({i, grid[i], values[i]});
  }
  std::stable_sort(out.begin(), out.end(), [](const Peak1D& a, const Peak1D& b) { return a.value > b.value; });
  return out;
}

// Largest-|lambda| eigenvectors: C1 is negative semidefinite for sub-Gaussian sources.
CMat dominant_basis(const CMat& C, int K) {
  Eigen::SelfAdjointEigenSolver<CMat> es(C);
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(C.rows()));
  std::iota(idx.begin(), idx.end(), 0);
  const RVec ev = es.eigenvalues();
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return std::abs(ev[a]) > std::abs(ev[b]); });
  CMat Us(C.rows(), K);
  for (int k = 0; k < K; ++k) Us.col(k) = es.eigenvectors().col(idx[k]);
  return Us;
}

double music_denominator_value(const CMat& Us, const CVec& a) {
  const double aa = a.squaredNorm();
  return 1.0 / std::max(aa - (Us.adjoint() * a).squaredNorm(), 1e-12 * aa);
}

}  // namespace

CumulantMatrixC1 cumulant_c1(const SnapshotSet& snapshots) {
  const ArrayGeometry& g = snapshots.geometry;
  if (g.phase_reference() != g.center_index())
    throw DomainError("cumulant matrix needs the centre element as phase reference");
  return cumulant_c1(snapshots.data);
}

CumulantMatrixC1 cumulant_c1(const CMat& raw) {
  const Eigen::Index N = raw.rows();
  const int Nb = half_size(N);
  const Eigen::Index T = raw.cols();
  if (T < 1) throw DomainError("cumulant matrix needs snapshots");
  const CMat Y = raw.colwise() - raw.rowwise().mean();
  const double invT = 1.0 / static_cast<double>(T);

  auto row = [Nb](int p) { return static_cast<Eigen::Index>(p + Nb); };
  // u_p(t) = y_p(t) conj(y_{-p}(t))
  CMat U(N, T);
  for (int p = -Nb; p <= Nb; ++p) U.row(row(p)) = Y.row(row(p)).cwiseProduct(Y.row(row(-p)).conjugate());
  const CMat M4 = U * U.adjoint() * invT;
  const CMat R = Y * Y.adjoint() * invT;      // E[y_a y_b^*]
  const CMat Rt = Y * Y.transpose() * invT;   // E[y_a y_b]

  CMat C(N, N);
  for (int p = -Nb; p <= Nb; ++p) {
    for (int q = -Nb; q <= Nb; ++q) {
      C(row(p), row(q)) = M4(row(p), row(q)) - R(row(p), row(-p)) * R(row(-q), row(q)) -
                          R(row(p), row(q)) * R(row(-q), row(-p)) -
                          Rt(row(p), row(-q)) * std::conj(Rt(row(-p), row(q)));
    }
  }
  C = 0.5 * (C + C.adjoint()).eval();
  return {std::move(C), {}};
}

CVec cumulant_steering(int num_elements, double omega) {
  const int Nb = half_size(num_elements);
  CVec b(num_elements);
  for (int p = -Nb; p <= Nb; ++p) b[p + Nb] = std::polar(1.0, 2.0 * p * omega);
  return b;
}

CMat analytic_c1(int num_elements, const std::vector<double>& omegas, const std::vector<double>& kurtosis) {
  if (omegas.size() != kurtosis.size()) throw DomainError("one kurtosis per source is required");
  CMat C = CMat::Zero(num_elements, num_elements);
  for (std::size_t k = 0; k < omegas.size(); ++k) {
    const CVec b = cumulant_steering(num_elements, omegas[k]);
    C += kurtosis[k] * b * b.adjoint();
  }
  return C;
}

std::vector<double> default_omega_grid(const ArrayGeometry& geometry, int count) {
  if (count < 3) throw DomainError("omega grid needs at least 3 points");
  const double w = std::min(2.0 * kPi * geometry.spacing() / geometry.wavelength(), kPi / 2.0);
  std::vector<double> g(count);
  for (int i = 0; i < count; ++i) g[i] = -w + 2.0 * w * i / (count - 1);
  return g;
}

std::vector<double> music_omega(const CumulantMatrixC1& c1, int K, const std::vector<double>& omega_grid) {
  const auto N = c1.matrix.rows();
  if (K < 1 || K >= N) throw DomainError("music_omega needs 1 <= K < N");
  if (omega_grid.size() < 3) throw DomainError("omega grid needs at least 3 points");
  const CMat Us = dominant_basis(c1.matrix, K);
  auto spectrum = [&](double w) { return music_denominator_value(Us, cumulant_steering(static_cast<int>(N), w)); };

  std::vector<double> values(omega_grid.size());
  for (std::size_t i = 0; i < omega_grid.size(); ++i) values[i] = spectrum(omega_grid[i]);
  const std::vector<Peak1D> maxima = strict_maxima(omega_grid, values);
  if (maxima.empty()) throw PeakShortageError("omega spectrum has no local maximum", {});

  const double floor = 10.0 * median(values);
  std::vector<double> out;
  for (const Peak1D& p : maxima) {
    if (static_cast<int>(out.size()) == K) break;
    if (!out.empty() && p.value < floor) break;
    const double lo = omega_grid[p.index == 0 ? 0 : p.index - 1];
    const double hi = omega_grid[std::min(p.index + 1, omega_grid.size() - 1)];
    out.push_back(golden_maximize(spectrum, lo, hi));
  }
  return out;
}

double default_ff_kappa_threshold(const ArrayGeometry& geometry) {
  const double d = geometry.spacing();
  return kPi * d * d / (geometry.wavelength() * 10.0 * region_boundaries(geometry).fraunhofer);
}

std::vector<double> default_kappa_grid(const ArrayGeometry& geometry, int negative_points) {
  if (negative_points < 2) throw DomainError("kappa grid needs points");
  const double d = geometry.spacing();
  const double kmax = kPi * d * d / (geometry.wavelength() * region_boundaries(geometry).reactive_limit);
  const double step = kmax / negative_points;
  const int positive_points = std::max(2, negative_points / 20);
  std::vector<double> g;
  for (int i = -negative_points; i <= positive_points; ++i) g.push_back(i * step);
  return g;
}

KappaSearchResult kappa_search(const CovarianceEstimate& R, const ArrayGeometry& geometry, int K_total,
                               const std::vector<double>& omega_hat, const std::vector<double>& kappa_grid,
                               const KappaSearchOptions& options) {
  if (kappa_grid.size() < 3) throw DomainError("kappa grid needs at least 3 points");
  if (std::find(kappa_grid.begin(), kappa_grid.end(), 0.0) == kappa_grid.end())
    throw DomainError("kappa grid must contain 0");
  const SubspacePair sub = eigendecompose(R, K_total);
  const double threshold = options.ff_threshold.value_or(default_ff_kappa_threshold(geometry));
  const double floor_factor = db2lin(options.peak_floor_db);

  struct Candidate {
    std::size_t omega_index;
    double kappa;
    double value;
  };
  std::vector<Candidate> primary, spare;
  KappaSearchResult result;

  for (std::size_t w = 0; w < omega_hat.size(); ++w) {
    const double omega = omega_hat[w];
    auto spectrum = [&](double kappa) { return music_value(sub, steering_from_phases(geometry, omega, kappa)); };
    std::vector<double> values(kappa_grid.size());
    for (std::size_t i = 0; i < kappa_grid.size(); ++i) values[i] = spectrum(kappa_grid[i]);
    const double floor = floor_factor * median(values);
    std::vector<Peak1D> maxima = strict_maxima(kappa_grid, values);
    std::erase_if(maxima, [floor](const Peak1D& p) { return p.value < floor; });
    if (maxima.empty()) {
      result.failures.push_back({omega, "no kappa peak above the spectrum floor"});
      continue;
    }
    for (std::size_t m = 0; m < maxima.size(); ++m) {
      const Peak1D& p = maxima[m];
      double kappa = p.x;
      double value = p.value;
      if (options.refine) {
        const double lo = kappa_grid[p.index == 0 ? 0 : p.index - 1];
        const double hi = kappa_grid[std::min(p.index + 1, kappa_grid.size() - 1)];
        const double k2 = golden_maximize(spectrum, lo, hi);
        const double v2 = spectrum(k2);
        if (v2 >= value) {
          kappa = k2;
          value = v2;
        }
      }
      (m == 0 ? primary : spare).push_back({w, kappa, value});
    }
  }

  std::stable_sort(spare.begin(), spare.end(), [](const Candidate& a, const Candidate& b) { return a.value > b.value; });
  for (const Candidate& c : spare) {
    if (static_cast<int>(primary.size()) >= K_total) break;
    primary.push_back(c);
  }

  for (const Candidate& c : primary) {
    const double omega = omega_hat[c.omega_index];
    MixedSourceEstimate e{};
    e.omega = omega;
    e.kappa = c.kappa;
    e.spectrum_value = c.value;
    e.far_field = std::abs(c.kappa) < threshold;
    try {
      e.theta = theta_from_electrical_angle(geometry, omega);
    } catch (const DomainError& ex) {
      result.failures.push_back({omega, ex.what()});
      continue;
    }
    e.range = e.far_field ? kInfiniteRange : range_from_quadratic_phase(geometry, e.theta, c.kappa);
    if (!e.far_field && !(e.range > 0.0)) {
      // Positive kappa has no physical range.
      result.failures.push_back({omega, "kappa peak at positive curvature"});
      continue;
    }
    result.estimates.push_back(e);
  }
  return result;
}

}  // namespace nfkit
