// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <vector>

#include "nfkit/array_model.hpp"
#include "nfkit/errors.hpp"
#include "oracles.hpp"

using namespace nfkit;

namespace {
// D = 1 m at lambda = 0.01 m.
ArrayGeometry one_metre() { return ArrayGeometry::from_wavelength(201, 0.005, 0.01); }
}  // namespace

TEST_CASE("region boundaries of a one metre aperture at 1 cm") {
  const auto b = region_boundaries(one_metre());
  CHECK(b.fraunhofer == doctest::Approx(200.0).epsilon(1e-14));
  CHECK(std::abs(b.reactive_limit - 6.2) < 1e-9);
  CHECK(b.antenna_reactive_inner == doctest::Approx(0.01 / oracle::pi));
  const auto g2 = ArrayGeometry::from_wavelength(11, 0.05, 0.1);
  CHECK(region_boundaries(g2).antenna_reactive_inner == doctest::Approx(0.0318309886));
}

TEST_CASE("reactive limit stays below the Fraunhofer distance whenever D > lambda") {
  for (int N : {3, 8, 64, 512})
    for (double dl : {0.25, 0.5, 1.0}) {
      const auto g = ArrayGeometry::from_wavelength(N, dl * 0.01, 0.01);
      if (g.aperture() <= g.wavelength()) continue;
      const auto b = region_boundaries(g);
      CHECK(b.reactive_limit > 0.0);
      CHECK(b.reactive_limit < b.fraunhofer);
    }
}

TEST_CASE("range classification") {
  const auto g = one_metre();
  CHECK(classify_range(g, 100.0) == FieldRegion::RadiativeNF);
  CHECK(classify_range(g, 201.0) == FieldRegion::FarField);
  CHECK(classify_range(g, 1.0) == FieldRegion::ReactiveNF);
  CHECK(classify_range(g, 200.0) == FieldRegion::RadiativeNF);
  CHECK(classify_range(g, kInfiniteRange) == FieldRegion::FarField);
  CHECK_THROWS_AS(classify_range(g, 0.0), DomainError);
  CHECK_THROWS_AS(classify_range(g, -3.0), DomainError);
}

TEST_CASE("geometry rejects invalid parameters") {
  CHECK_THROWS_AS(ArrayGeometry(1, 0.005, 30e9), DomainError);
  CHECK_THROWS_AS(ArrayGeometry(4, 0.0, 30e9), DomainError);
  CHECK_THROWS_AS(ArrayGeometry(4, 0.005, -1.0), DomainError);
  CHECK_THROWS_AS(ArrayGeometry(4, 0.005, 30e9, 4), DomainError);
  CHECK_NOTHROW(ArrayGeometry(4, 0.005, 30e9, 3));
}

TEST_CASE("steering models against coordinate geometry") {
  const double lambda = 0.01, d = 0.005;
  for (int ref : {0, 16}) {
    const auto g = ArrayGeometry::from_wavelength(33, d, lambda, ref);
    for (double th : {-0.7, 0.0, 0.3, 1.2}) {
      for (double r : {0.5, 2.0, 40.0}) {
        const CVec a = steering(g, th, r, SteeringModel::ExactSpherical);
        const Eigen::VectorXcd o = oracle::spherical_response(33, d, ref, lambda, th, r);
        CHECK((a - o).cwiseAbs().maxCoeff() < 1e-9);
        CHECK(std::abs(a[ref] - cdouble(1.0)) == 0.0);
        // Second-order Taylor expansion of the same distances.
        const CVec f = steering(g, th, r, SteeringModel::FresnelQuadratic);
        for (int i = 0; i < 33; ++i) {
          const double n = i - ref;
          const double ph = 2 * oracle::pi * d * std::sin(th) / lambda * n -
                            oracle::pi * d * d * std::cos(th) * std::cos(th) / (lambda * r) * n * n;
          CHECK(std::abs(f[i] - std::polar(1.0, ph)) < 1e-12);
        }
        CHECK(f[ref] == cdouble(1.0));
      }
      const CVec p = steering(g, th, 1.0, SteeringModel::FarFieldPlanar);
      CHECK((p - oracle::planar_response(33, d, ref, lambda, th)).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("simple steering examples") {
  const auto g = ArrayGeometry::from_wavelength(16, 0.005, 0.01);
  CHECK((steering(g, 0.0, kInfiniteRange, SteeringModel::FarFieldPlanar) - CVec::Ones(16)).norm() == 0.0);
  const double r = 3.0;
  const double kappa = -oracle::pi * 0.005 * 0.005 / (0.01 * r);
  const CVec a = steering(g, 0.0, r);
  for (int n = 0; n < 16; ++n) CHECK(std::abs(a[n] - std::polar(1.0, kappa * n * n)) < 1e-12);
  // Infinite range forces planar phases under every model.
  for (auto m : {SteeringModel::ExactSpherical, SteeringModel::FresnelQuadratic})
    CHECK((steering(g, 0.4, kInfiniteRange, m) - steering(g, 0.4, kInfiniteRange, SteeringModel::FarFieldPlanar))
              .norm() == 0.0);
}

TEST_CASE("Fresnel steering approaches planar monotonically in range") {
  const auto g = ArrayGeometry::from_wavelength(64, 0.005, 0.01, 32);
  const CVec ff = steering(g, 0.3, kInfiniteRange, SteeringModel::FarFieldPlanar);
  double prev = 1e300;
  for (int i = 0; i <= 40; ++i) {
    const double r = std::pow(10.0, -0.5 + 0.15 * i);
    const double gap = (steering(g, 0.3, r) - ff).norm();
    // The Fresnel gap only depends on kappa ~ 1/r; once |kappa| n^2 < pi it shrinks.
    if (r > 2.0) CHECK(gap <= prev);
    prev = gap;
  }
  CHECK(prev < 1e-3);
}

TEST_CASE("electrical angle and quadratic phase round trip") {
  const auto g = ArrayGeometry::half_wavelength(64, 28e9);
  for (double th : {-1.2, -0.2, 0.0, 0.5, 1.3}) {
    const double w = electrical_angle(g, th);
    CHECK(w == doctest::Approx(2 * oracle::pi * g.spacing() * std::sin(th) / g.wavelength()));
    CHECK(theta_from_electrical_angle(g, w) == doctest::Approx(th).epsilon(1e-12));
    const double k = quadratic_phase(g, th, 1.7);
    CHECK(range_from_quadratic_phase(g, th, k) == doctest::Approx(1.7).epsilon(1e-12));
  }
  CHECK_THROWS_AS(theta_from_electrical_angle(g, 3.2), DomainError);
  CHECK(steering_from_phases(g, 0.3, -0.01)[2] == std::polar(1.0, 0.6 - 0.04));
}

TEST_CASE("planar phase error at the Fraunhofer distance is pi/8") {
  // Odd N puts the edge elements exactly D/2 from the centre; even N adds half a spacing.
  for (int N : {65, 257, 256}) {
    const auto g = ArrayGeometry::from_wavelength(N, 0.005, 0.01).centered();
    const double dF = region_boundaries(g).fraunhofer;
    const double err = max_planar_phase_error(g, 0.0, dF);
    // Direct evaluation at the edge element.
    const double half = g.aperture() / 2.0 + (N % 2 ? 0.0 : 0.5 * g.spacing());
    const double direct = 2 * oracle::pi / g.wavelength() * (std::hypot(dF, half) - dF);
    CHECK(err == doctest::Approx(direct).epsilon(1e-9));
    if (N % 2)
      CHECK(err <= oracle::pi / 8 * (1 + 1e-9));
    else
      CHECK(std::abs(err / (oracle::pi / 8) - 1.0) <= 0.02);
  }
}

TEST_CASE("wavefront mismatch decays and grows with carrier") {
  const auto g = ArrayGeometry::half_wavelength(256, 28e9).centered();
  const double dF = region_boundaries(g).fraunhofer;
  std::vector<double> rr{0.1 * dF, dF, 10.0 * dF};
  const auto m = wavefront_mismatch_mse(g, 0.0, rr);
  REQUIRE(m.size() == 3);
  CHECK(m[2].mse < 1e-2 * m[0].mse);
  for (const auto& p : m) CHECK((p.mse >= 0.0 && p.mse <= 4.0));
  // Oracle: mean |a_exact - a_ff|^2 from coordinates.
  const Eigen::VectorXcd e = oracle::spherical_response(256, g.spacing(), 128, g.wavelength(), 0.0, dF);
  const Eigen::VectorXcd p = oracle::planar_response(256, g.spacing(), 128, g.wavelength(), 0.0);
  CHECK(m[1].mse == doctest::Approx((e - p).squaredNorm() / 256.0).epsilon(1e-9));

  // Same physical aperture, higher carrier: larger mismatch at fixed range.
  const ArrayGeometry lo(256, g.spacing(), 28e9, 128), hi(256, g.spacing(), 100e9, 128);
  std::vector<double> r1{20.0};
  CHECK(wavefront_mismatch_mse(hi, 0.0, r1)[0].mse > wavefront_mismatch_mse(lo, 0.0, r1)[0].mse);

  const ArrayGeometry two(2, 0.005, 30e9);
  std::vector<double> far{100.0};
  CHECK(wavefront_mismatch_mse(two, 0.3, far)[0].mse < 1e-8);
  CHECK_THROWS_AS(wavefront_mismatch_mse(g, 0.0, std::vector<double>{}), DomainError);
}

TEST_CASE("Fresnel integrals against composite Simpson quadrature") {
  // March the integral from 0 to 10 in fine panels, checking every 0.25.
  const double h = 2.5e-4;
  double C = 0.0, S = 0.0, z = 0.0;
  double worst = 0.0;
  for (int step = 1; step <= 40; ++step) {
    const double z1 = 0.25 * step;
    const int n = static_cast<int>(std::lround((z1 - z) / h));
    C += oracle::simpson([](double x) { return std::cos(oracle::pi * x * x / 2); }, z, z1, n);
    S += oracle::simpson([](double x) { return std::sin(oracle::pi * x * x / 2); }, z, z1, n);
    z = z1;
    const auto f = fresnel_integrals(z);
    worst = std::max({worst, std::abs(f.c - C), std::abs(f.s - S)});
    const auto m = fresnel_integrals(-z);
    CHECK(m.c == -f.c);
    CHECK(m.s == -f.s);
  }
  CHECK(worst < 1e-8);
  const auto z0 = fresnel_integrals(0.0);
  CHECK(z0.c == 0.0);
  CHECK(z0.s == 0.0);
  const auto big = fresnel_integrals(1e4);
  CHECK(big.c == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(big.s == doctest::Approx(0.5).epsilon(1e-4));
  const auto f16 = fresnel_integrals(1.6);
  // "About one half near z = 1.6"; the exact half-power point is z = 1.5562.
  CHECK(std::abs(std::hypot(f16.c, f16.s) / 1.6 - 0.5) < 0.05);
}
