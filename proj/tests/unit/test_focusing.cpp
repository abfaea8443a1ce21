// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "nfkit/errors.hpp"
#include "nfkit/focusing.hpp"
#include "nfkit/rng.hpp"
#include "oracles.hpp"

using namespace nfkit;

namespace {

ArrayGeometry xl512() { return ArrayGeometry::half_wavelength(512, 30e9); }

double fresnel_mag_over_z(double z) {
  const int n = 4000;
  const double c = oracle::simpson([](double x) { return std::cos(oracle::pi * x * x / 2); }, 0, z, n);
  const double s = oracle::simpson([](double x) { return std::sin(oracle::pi * x * x / 2); }, 0, z, n);
  return std::hypot(c, s) / z;
}

}  // namespace

TEST_CASE("3 dB Fresnel root") {
  double lo = 1.0, hi = 2.0;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (fresnel_mag_over_z(mid) > 0.5 ? lo : hi) = mid;
  }
  CHECK(z_3db_exact() == doctest::Approx(lo).epsilon(1e-9));
  CHECK(z_3db_exact() == doctest::Approx(1.5562).epsilon(1e-4));
  CHECK(std::abs(fresnel_gain(1.6) - 0.5) < 0.05);
  CHECK(fresnel_gain(1.6) == doctest::Approx(fresnel_mag_over_z(1.6)).epsilon(1e-9));
  CHECK(fresnel_gain(0.0) == 1.0);
}

TEST_CASE("exact array gain from coordinate geometry") {
  const auto g = ArrayGeometry::half_wavelength(64, 30e9);
  const double axis = deg2rad(70.0), r0 = 2.0;
  for (double r : {1.0, 2.0, 3.5, 40.0}) {
    const Eigen::VectorXcd a0 = oracle::spherical_response(64, g.spacing(), 32, g.wavelength(), oracle::pi / 2 - axis, r0);
    const Eigen::VectorXcd a = oracle::spherical_response(64, g.spacing(), 32, g.wavelength(), oracle::pi / 2 - axis, r);
    CHECK(array_gain(g, axis, r0, r) == doctest::Approx(std::abs(a0.dot(a)) / 64).epsilon(1e-9));
  }
  CHECK(array_gain(g, axis, r0, r0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(array_gain(g, axis, -1.0, 2.0), DomainError);
}

TEST_CASE("Fresnel gain approximation tracks the exact gain") {
  const auto g = xl512();
  const double axis = deg2rad(30.0);
  double worst = 0.0;
  for (int i = 0; i <= 200; ++i) {
    const double r = 10.0 * std::pow(50.0, i / 200.0);
    worst = std::max(worst, std::abs(array_gain(g, axis, 50.0, r) - array_gain_approx(g, axis, 50.0, r)));
  }
  CHECK(worst <= 0.05);
}

TEST_CASE("closed-form beam depth") {
  const auto g = xl512();
  const double axis = deg2rad(60.0);
  const double N = 512, d = g.spacing(), lam = g.wavelength();
  const double z3 = z_3db_exact();
  const double rbd = N * N * d * d * std::pow(std::sin(axis), 2) / (2 * lam * z3 * z3);
  const double r0 = 0.3 * rbd;
  const auto bd = beam_depth(g, axis, r0);
  CHECK(bd.r_bd == doctest::Approx(rbd).epsilon(1e-12));
  // Interval where |1/r0 - 1/r| <= 1/r_BD.
  const double lo = 1.0 / (1.0 / r0 + 1.0 / rbd), hi = 1.0 / (1.0 / r0 - 1.0 / rbd);
  CHECK(bd.bd_3db == doctest::Approx(hi - lo).epsilon(1e-12));
  CHECK(std::isinf(beam_depth(g, axis, bd.r_bd).bd_3db));
  CHECK(std::isfinite(beam_depth(g, axis, std::nextafter(bd.r_bd, 0.0)).bd_3db));
  CHECK(std::isinf(beam_depth(g, axis, 1.5 * rbd).bd_3db));
  const auto end = beam_depth(g, 0.0, 5.0);
  CHECK(end.degenerate_angle);
  CHECK(std::isinf(end.bd_3db));
  CHECK(beam_depth(g, axis, r0, kZ3dBNominal).r_bd == doctest::Approx(rbd * z3 * z3 / 2.56));
}

TEST_CASE("numerical 3 dB width at broadside, 20 m") {
  const auto g = xl512();
  const double axis = oracle::pi / 2;
  const auto num = numerical_beam_depth(g, axis, 20.0);
  const auto cf = beam_depth(g, axis, 20.0);
  CHECK(num.r_lo < 20.0);
  CHECK(num.r_hi > 20.0);
  CHECK(array_gain(g, axis, 20.0, num.r_lo) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(array_gain(g, axis, 20.0, num.r_hi) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(std::abs(num.width - cf.bd_3db) / cf.bd_3db < 0.10);
}

TEST_CASE("focused beam depth is finite, far-field depth is not") {
  const auto g = ArrayGeometry::half_wavelength(256, 30e9);
  const double axis = deg2rad(80.0);
  const auto cf = beam_depth(g, axis, 8.0);
  CHECK(std::isfinite(cf.bd_3db));
  const auto nf = numerical_beam_depth(g, axis, 8.0);
  CHECK(std::isfinite(nf.r_hi));
  const auto ff = numerical_beam_depth(g, axis, 2.0 * cf.r_bd);
  CHECK(std::isinf(ff.r_hi));
}

TEST_CASE("MRT precoder") {
  CVec h(3);
  h << cdouble(1, 1), cdouble(0, 2), cdouble(-1, 0);
  const CVec w = mrt_precoder(h);
  CHECK(w.norm() == doctest::Approx(1.0));
  CHECK(std::abs(w.dot(h)) == doctest::Approx(h.norm()));
}

TEST_CASE("MMSE spectral efficiency against a direct inverse") {
  RandomStream rng(4);
  const int N = 6, K = 3;
  std::vector<CVec> H;
  UplinkScenario sc{{}, 0.3};
  for (int k = 0; k < K; ++k) {
    CVec h(N);
    for (int n = 0; n < N; ++n) h[n] = rng.complex_normal();
    H.push_back(h);
    sc.users.push_back({0.0, 1.0, 0.5 + k});
  }
  const auto se = mmse_se(sc, H);
  for (int k = 0; k < K; ++k) {
    CMat C = sc.noise_power * CMat::Identity(N, N);
    for (int i = 0; i < K; ++i)
      if (i != k) C += sc.users[i].power * H[i] * H[i].adjoint();
    const double sinr = sc.users[k].power * std::real(H[k].dot(C.inverse() * H[k]));
    CHECK(se[k] == doctest::Approx(std::log2(1 + sinr)).epsilon(1e-10));
  }
  // The MMSE combiner built from the true channels attains the same SE.
  const auto same = combiner_se(sc, H, H);
  for (int k = 0; k < K; ++k) CHECK(same[k] == doctest::Approx(se[k]).epsilon(1e-8));
  // Any other combiner does no better.
  std::vector<CVec> off = H;
  off[0] += 0.3 * H[1];
  const auto worse = combiner_se(sc, H, off);
  CHECK(worse[0] <= se[0] + 1e-12);
}

TEST_CASE("co-angle multiplexing: exact channels dominate planar presumptions") {
  MultiplexConfig cfg;
  cfg.user_counts = {1, 2, 4};
  cfg.drops = 4;
  for (const auto& row : multiplex_experiment(cfg)) {
    if (row.K == 1)
      CHECK(row.exact_se_avg >= row.mismatched_se_avg - 1e-12);
    else
      CHECK(row.exact_se_avg > row.mismatched_se_avg);
  }
  const auto a = multiplex_drop(cfg, 2, 3), b = multiplex_drop(cfg, 2, 3);
  CHECK(a == b);
}
