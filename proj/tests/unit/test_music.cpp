// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <limits>

#include "nfkit/errors.hpp"
#include "nfkit/music.hpp"
#include "oracles.hpp"

using namespace nfkit;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Explicit a^H Un Un^H a.
double music_oracle(const CMat& Un, const CVec& a) { return 1.0 / (Un.adjoint() * a).squaredNorm(); }

// Exhaustive argmax of the explicit pseudo-spectrum.
std::pair<int, int> grid_argmax(const CMat& Un, const ArrayGeometry& g, const std::vector<double>& th,
                                const std::vector<double>& rr) {
  double best = -1;
  std::pair<int, int> at{-1, -1};
  for (int i = 0; i < static_cast<int>(th.size()); ++i)
    for (int j = 0; j < static_cast<int>(rr.size()); ++j) {
      const double v = music_oracle(Un, steering(g, th[i], rr[j]));
      if (v > best) best = v, at = {i, j};
    }
  return at;
}

}  // namespace

TEST_CASE("eigendecomposition partitions the spectrum") {
  const auto g = ArrayGeometry::half_wavelength(10, 30e9);
  const CVec a1 = steering(g, 0.2, 0.5), a2 = steering(g, -0.6, kInfiniteRange);
  const double s2 = 0.01;
  const CMat R = a1 * a1.adjoint() + 2.0 * a2 * a2.adjoint() + s2 * CMat::Identity(10, 10);
  const SubspacePair sp = eigendecompose(R, 2);
  CHECK(sp.signal_basis.cols() == 2);
  CHECK(sp.noise_basis.cols() == 8);
  for (int i = 1; i < 10; ++i) CHECK(sp.eigenvalues[i] <= sp.eigenvalues[i - 1]);
  for (int i = 2; i < 10; ++i) CHECK(sp.eigenvalues[i] == doctest::Approx(s2).epsilon(1e-9));
  CMat Q(10, 10);
  Q << sp.signal_basis, sp.noise_basis;
  CHECK((Q.adjoint() * Q - CMat::Identity(10, 10)).norm() < 1e-12);
  CHECK((sp.noise_basis.adjoint() * a1).norm() < 1e-9);
  CHECK_THROWS_AS(eigendecompose(R, 0), DomainError);
  CHECK_THROWS_AS(eigendecompose(R, 10), DomainError);
}

TEST_CASE("music value matches the explicit noise-subspace projection") {
  const auto g = ArrayGeometry::half_wavelength(12, 30e9);
  const CVec a1 = steering(g, 0.3, 0.4);
  const CMat R = a1 * a1.adjoint() + 0.1 * CMat::Identity(12, 12);
  const SubspacePair sp = eigendecompose(R, 1);
  for (double th : {-0.5, 0.0, 0.25}) {
    const CVec a = steering(g, th, 0.9);
    CHECK(music_value(sp, a) == doctest::Approx(music_oracle(sp.noise_basis, a)).epsilon(1e-8));
  }
  // On the true steering vector the denominator is floored, not zero.
  const double v = music_value(sp, a1);
  CHECK(std::isfinite(v));
  CHECK(v == doctest::Approx(1.0 / (1e-12 * 12.0)).epsilon(1e-6));
}

TEST_CASE("default grids") {
  const auto th = default_theta_grid();
  CHECK(th.size() == 361);
  CHECK(th.front() == doctest::Approx(-oracle::pi / 2));
  CHECK(th[181] - th[180] == doctest::Approx(deg2rad(0.5)));
  const auto g = ArrayGeometry::half_wavelength(64, 30e9);
  const auto rr = default_range_grid(g);
  const auto b = region_boundaries(g);
  CHECK(rr.size() == 200);
  CHECK(rr.front() == doctest::Approx(b.reactive_limit));
  CHECK(rr.back() == doctest::Approx(2 * b.fraunhofer));
  CHECK(rr[1] / rr[0] == doctest::Approx(rr[100] / rr[99]));
}

TEST_CASE("noiseless on-grid source is the spectrum maximum") {
  const auto g = ArrayGeometry::half_wavelength(32, 30e9).centered();
  std::vector<double> th, rr;
  for (int i = -40; i <= 40; ++i) th.push_back(deg2rad(0.5 * i));
  const double dF = region_boundaries(g).fraunhofer;
  for (int j = 0; j < 40; ++j) rr.push_back(0.05 * dF * std::pow(1.08, j));
  const int ti = 57, rj = 17;
  const auto set = synthesize_snapshots(g, {SourceSpec{th[ti], rr[rj]}}, 200, kInf, 4);
  const SubspacePair sp = eigendecompose(sample_covariance(set), 1);
  const Spectrum2D spec = music_spectrum_2d(sp, g, th, rr);
  const auto peaks = find_peaks(spec, 1);
  const auto [oi, oj] = grid_argmax(sp.noise_basis, g, th, rr);
  CHECK(oi == ti);
  CHECK(oj == rj);
  CHECK(peaks[0].theta_index == ti);
  CHECK(peaks[0].range_index == rj);
  CHECK(peaks[0].theta == th[ti]);
  CHECK(peaks[0].range == rr[rj]);
  for (int i = 0; i < 81; i += 9)
    for (int j = 0; j < 40; j += 7)
      CHECK(spec.values(i, j) ==
            doctest::Approx(std::min(music_oracle(sp.noise_basis, steering(g, th[i], rr[j])), 1.0 / (1e-12 * 32)))
                .epsilon(1e-6));
}

TEST_CASE("two sources at one angle and different ranges are resolved") {
  const auto g = ArrayGeometry::half_wavelength(256, 30e9).centered();
  const double th0 = deg2rad(10.0);
  std::vector<double> th;
  for (int i = 0; i <= 40; ++i) th.push_back(deg2rad(5.0 + 0.25 * i));
  std::vector<double> rr;
  for (int j = 0; j < 120; ++j) rr.push_back(10.0 * std::pow(1.03, j));
  const auto dist = [&](const std::vector<double>& grid, double v) {
    int best = 0;
    for (int i = 0; i < static_cast<int>(grid.size()); ++i)
      if (std::abs(grid[i] - v) < std::abs(grid[best] - v)) best = i;
    return best;
  };
  for (std::uint64_t trial = 0; trial < 3; ++trial) {
    const auto set = synthesize_snapshots(g, {SourceSpec{th0, 20.0}, SourceSpec{th0, 100.0}}, 1000, 20.0, 70 + trial);
    const SubspacePair sp = eigendecompose(sample_covariance(set), 2);
    auto peaks = find_peaks(music_spectrum_2d(sp, g, th, rr), 2);
    std::sort(peaks.begin(), peaks.end(), [](auto& a, auto& b) { return a.range < b.range; });
    CHECK(std::abs(peaks[0].theta_index - dist(th, th0)) <= 1);
    CHECK(std::abs(peaks[1].theta_index - dist(th, th0)) <= 1);
    CHECK(std::abs(peaks[0].range_index - dist(rr, 20.0)) <= 1);
    CHECK(std::abs(peaks[1].range_index - dist(rr, 100.0)) <= 1);
  }
}

TEST_CASE("peak search ordering and shortage") {
  Spectrum2D s;
  s.theta_grid = {0, 1, 2, 3, 4};
  s.range_grid = {1, 2, 3};
  s.values = RMat::Zero(5, 3);
  s.values(1, 1) = 5.0;
  s.values(3, 1) = 7.0;
  const auto p = find_peaks(s, 2);
  CHECK(p[0].theta_index == 3);
  CHECK(p[1].theta_index == 1);
  try {
    find_peaks(s, 3);
    FAIL("expected a shortage");
  } catch (const PeakShortageError& e) {
    CHECK(e.found().size() == 2);
  }
}

TEST_CASE("refinement moves an off-grid source towards the truth") {
  const auto g = ArrayGeometry::half_wavelength(32, 30e9).centered();
  std::vector<double> th, rr;
  for (int i = -20; i <= 20; ++i) th.push_back(deg2rad(1.0 * i));
  for (int j = 0; j < 30; ++j) rr.push_back(0.1 * std::pow(1.12, j));
  const double t0 = deg2rad(3.37), r0 = 0.61;
  const auto set = synthesize_snapshots(g, {SourceSpec{t0, r0}}, 400, 40.0, 2);
  const SubspacePair sp = eigendecompose(sample_covariance(set), 1);
  const auto spec = music_spectrum_2d(sp, g, th, rr);
  const auto pk = find_peaks(spec, 1)[0];
  const auto ref = refine_peak(sp, g, spec, pk);
  CHECK(std::abs(ref.theta - t0) < std::abs(pk.theta - t0));
  CHECK(std::abs(ref.range - r0) < std::abs(pk.range - r0));
  CHECK(std::abs(ref.theta - t0) < deg2rad(0.05));
  CHECK(std::abs(ref.range - r0) / r0 < 0.02);
}

TEST_CASE("golden section maximization") {
  const double x = golden_maximize([](double v) { return -(v - 0.3) * (v - 0.3); }, -1.0, 2.0);
  CHECK(x == doctest::Approx(0.3).epsilon(1e-7));
}

TEST_CASE("FBSS against its definition") {
  const auto g = ArrayGeometry::half_wavelength(8, 30e9);
  const auto set = synthesize_snapshots(g, {SourceSpec{0.2}, SourceSpec{-0.4}}, 30, 10.0, 6);
  const CMat& Y = set.data;
  const int N = 8, L = 5, M = N - L + 1, T = 30;
  CMat Rf = CMat::Zero(L, L), Rb = CMat::Zero(L, L);
  for (int m = 0; m < M; ++m)
    for (int t = 0; t < T; ++t)
      for (int p = 0; p < L; ++p)
        for (int q = 0; q < L; ++q) {
          Rf(p, q) += Y(m + p, t) * std::conj(Y(m + q, t));
          // Backward subarray: reversed, conjugated elements.
          Rb(p, q) += std::conj(Y(N - 1 - m - p, t)) * Y(N - 1 - m - q, t);
        }
  const CMat oracle_R = (Rf + Rb) / (2.0 * M * T);
  CHECK((fbss(set, L).matrix - oracle_R).norm() < 1e-12 * oracle_R.norm());
  CHECK_THROWS_AS(fbss(set, 9), DomainError);
  CHECK_THROWS_AS(fbss(set, 7, 3), DomainError);
}

TEST_CASE("FBSS restores the rank of coherent far-field sources") {
  const auto g = ArrayGeometry::half_wavelength(16, 30e9);
  SourceSpec a{deg2rad(-20.0)};
  SourceSpec b{deg2rad(15.0)};
  b.coherence = Coherence{0, cdouble(0.7, -0.4)};
  const auto set = synthesize_snapshots(g, {a, b}, 200, kInf, 12);
  CHECK(numerical_rank(sample_covariance(set).matrix) == 1);
  CHECK(numerical_rank(fbss(set, 12, 2).matrix) == 2);
}

TEST_CASE("FBSS keeps far-field MUSIC estimates for uncorrelated sources") {
  const auto g = ArrayGeometry::half_wavelength(16, 30e9);
  const auto set = synthesize_snapshots(g, {SourceSpec{deg2rad(-20.0)}, SourceSpec{deg2rad(25.0)}}, 500, 15.0, 31);
  const auto angles = [&](const CMat& R, const ArrayGeometry& gg) {
    const SubspacePair sp = eigendecompose(R, 2);
    auto p = find_peaks(music_spectrum_2d(sp, gg, default_theta_grid(), {kInf}, SteeringModel::FarFieldPlanar), 2);
    std::vector<double> out{p[0].theta, p[1].theta};
    std::sort(out.begin(), out.end());
    return out;
  };
  const auto full = angles(sample_covariance(set).matrix, g);
  const auto sm = angles(fbss(set, 12).matrix, ArrayGeometry::half_wavelength(12, 30e9));
  for (int k = 0; k < 2; ++k) CHECK(std::abs(full[k] - sm[k]) <= deg2rad(0.5) + 1e-12);
}
