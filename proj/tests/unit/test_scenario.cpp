// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <set>

#include "nfkit/errors.hpp"
#include "nfkit/rng.hpp"
#include "nfkit/scenario.hpp"
#include "oracles.hpp"

using namespace nfkit;

namespace {
ArrayGeometry small() { return ArrayGeometry::half_wavelength(12, 30e9); }
}  // namespace

TEST_CASE("seed derivation is stable and path sensitive") {
  CHECK(derive_seed(7, {1, 2}) == derive_seed(7, {1, 2}));
  CHECK(derive_seed(7, {1, 2}) != derive_seed(7, {2, 1}));
  CHECK(derive_seed(7, {1}) != derive_seed(8, {1}));
  CHECK(stream_tag("noise") != stream_tag("source"));
  std::set<std::uint64_t> seen;
  for (std::uint64_t t = 0; t < 1000; ++t) seen.insert(derive_seed(1, {stream_tag("trial"), t}));
  CHECK(seen.size() == 1000);
}

TEST_CASE("noiseless single snapshot equals steering times waveform") {
  const auto g = small();
  std::vector<SourceSpec> s{{0.2, 3.0, 1.0, Waveform::ConstantModulusRandomPhase, {}}};
  const auto set = synthesize_snapshots(g, s, 1, std::numeric_limits<double>::infinity(), 11);
  const CMat w = source_waveforms(s, 1, 11);
  CHECK((set.data.col(0) - steering(g, 0.2, 3.0) * w(0, 0)).norm() < 1e-14);
  CHECK(std::abs(std::abs(w(0, 0)) - 1.0) < 1e-14);
}

TEST_CASE("far-field sources use planar steering, near-field Fresnel") {
  const auto g = small();
  std::vector<SourceSpec> s{{-0.3, kInfiniteRange}, {0.4, 0.2}};
  const CMat A = steering_matrix(g, s);
  CHECK((A.col(0) - steering(g, -0.3, kInfiniteRange, SteeringModel::FarFieldPlanar)).norm() == 0.0);
  CHECK((A.col(1) - steering(g, 0.4, 0.2, SteeringModel::FresnelQuadratic)).norm() == 0.0);
  const CMat E = steering_matrix(g, s, SteeringModel::ExactSpherical);
  CHECK((E.col(1) - steering(g, 0.4, 0.2, SteeringModel::ExactSpherical)).norm() == 0.0);
}

TEST_CASE("coherent copies reduce data rank") {
  const auto g = small();
  SourceSpec master{0.1, kInfiniteRange};
  SourceSpec copy{-0.5, 0.3};
  copy.coherence = Coherence{0, cdouble(1.0, 0.0)};
  SourceSpec other{0.7, kInfiniteRange};
  const double inf = std::numeric_limits<double>::infinity();
  const auto two = synthesize_snapshots(g, {master, copy}, 50, inf, 3);
  CHECK(oracle::rank_hermitian(two.data * two.data.adjoint(), 1e-10) == 1);
  const auto three = synthesize_snapshots(g, {master, copy, other}, 50, inf, 3);
  CHECK(oracle::rank_hermitian(three.data * three.data.adjoint(), 1e-10) == 2);
  const CMat w = source_waveforms({master, copy}, 20, 3);
  CHECK((w.row(1) - w.row(0)).norm() < 1e-14);
}

TEST_CASE("malformed source lists are configuration errors") {
  const auto g = small();
  CHECK_THROWS_AS(synthesize_snapshots(g, {}, 10, 10.0, 1), ConfigurationError);
  SourceSpec orphan{0.0, 2.0};
  orphan.coherence = Coherence{3, cdouble(1.0)};
  CHECK_THROWS_AS(validate_sources({SourceSpec{}, orphan}), ConfigurationError);
  SourceSpec self{0.0, 2.0};
  self.coherence = Coherence{0, cdouble(1.0)};
  CHECK_THROWS_AS(validate_sources({self}), ConfigurationError);
  SourceSpec chained{0.0, 2.0};
  chained.coherence = Coherence{1, cdouble(1.0)};
  SourceSpec copy{0.0, 3.0};
  copy.coherence = Coherence{0, cdouble(1.0)};
  CHECK_THROWS_AS(validate_sources({SourceSpec{}, copy, chained}), ConfigurationError);
  CHECK_THROWS_AS(validate_sources({SourceSpec{0.0, kInfiniteRange, 0.0}}), ConfigurationError);
}

TEST_CASE("snapshots are reproducible from their inputs") {
  const auto g = small();
  std::vector<SourceSpec> s{{0.2, 3.0}, {-0.4, kInfiniteRange, 2.0, Waveform::QPSK, {}}};
  const auto a = synthesize_snapshots(g, s, 64, 5.0, 99);
  const auto b = synthesize_snapshots(g, s, 64, 5.0, 99);
  const auto c = synthesize_snapshots(g, s, 64, 5.0, 100);
  CHECK((a.data - b.data).norm() == 0.0);
  CHECK((a.data - c.data).norm() > 0.0);
}

TEST_CASE("sample covariance properties") {
  const auto g = small();
  const double inf = std::numeric_limits<double>::infinity();
  const int T = 20000;
  const auto one = synthesize_snapshots(g, {SourceSpec{0.3, 2.0}}, T, inf, 5);
  const CMat R = sample_covariance(one).matrix;
  const CVec a = steering(g, 0.3, 2.0);
  CHECK((R - R.adjoint()).norm() < 1e-12);
  CHECK(((R - a * a.adjoint()).norm() / (a * a.adjoint()).norm()) < 3.0 / std::sqrt(double(T)));
  CHECK(oracle::rank_hermitian(R, 1e-10) == 1);
  CHECK(std::abs(R.trace().real() - 12.0) < 12.0 * 3.0 / std::sqrt(double(T)));

  // Noise only: sources with vanishing power.
  const auto noise = synthesize_snapshots(g, {SourceSpec{0.0, kInfiniteRange, 1e-300}}, T, 3.0, 8);
  const CMat Rn = sample_covariance(noise).matrix;
  const double s2 = noise_variance_for_snr(3.0);
  CHECK((Rn - s2 * CMat::Identity(12, 12)).norm() / (s2 * std::sqrt(12.0)) < 0.1);
  Eigen::SelfAdjointEigenSolver<CMat> es(Rn);
  CHECK(es.eigenvalues().minCoeff() > 0.0);

  const auto single = synthesize_snapshots(g, {SourceSpec{0.3, 2.0}}, 1, 10.0, 5);
  const CVec y = single.data.col(0);
  CHECK((sample_covariance(single).matrix - y * y.adjoint()).norm() == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("waveform statistics") {
  std::vector<SourceSpec> s{{0.0, kInfiniteRange, 2.0, Waveform::QPSK, {}},
                            {0.0, kInfiniteRange, 0.5, Waveform::CircularGaussian, {}},
                            {0.0, kInfiniteRange, 3.0, Waveform::ConstantModulusRandomPhase, {}}};
  const int T = 40000;
  const CMat w = source_waveforms(s, T, 21);
  for (int t = 0; t < T; ++t) {
    CHECK_UNARY(std::abs(std::abs(w(0, t)) - std::sqrt(2.0)) < 1e-12);
    const double ang = std::arg(w(0, t)) / (oracle::pi / 4);
    CHECK_UNARY(std::abs(ang - std::round(ang)) < 1e-9);
    CHECK_UNARY(std::abs(std::abs(w(2, t)) - std::sqrt(3.0)) < 1e-12);
  }
  CHECK(w.row(1).squaredNorm() / T == doctest::Approx(0.5).epsilon(0.03));
  CHECK(std::abs(w.row(0).sum()) / T < 0.03);
}
