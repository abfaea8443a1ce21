// SPDX-License-Identifier: Apache-2.0
#include "nfkit/polar_omp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nfkit/errors.hpp"
#include "nfkit/rng.hpp"

namespace nfkit {

namespace {

int max_angle_index(const ArrayGeometry& g) {
  return static_cast<int>(std::floor(g.num_elements() * g.spacing() / g.wavelength() + 1e-9));
}

}  // namespace

std::vector<double> angle_samples(const ArrayGeometry& geometry) {
  const int nmax = max_angle_index(geometry);
  const double scale = geometry.wavelength() / (geometry.num_elements() * geometry.spacing());
  std::vector<double> out;
  out.reserve(2 * nmax + 1);
  for (int n = -nmax; n <= nmax; ++n) out.push_back(n == 0 ? 0.0 : std::asin(std::clamp(n * scale, -1.0, 1.0)));
  return out;
}

std::vector<RingSample> distance_samples(const ArrayGeometry& geometry, double theta, double epsilon, double r_min) {
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  if (!(r_min > 0.0)) throw DomainError("r_min must be positive");
  const double N = geometry.num_elements();
  const double d = geometry.spacing();
  const double c = std::cos(theta);
  const double base = N * N * d * d * c * c / (2.0 * geometry.wavelength() * epsilon * epsilon);
  std::vector<RingSample> out{{0, kInfiniteRange}};
  for (int s = 1;; ++s) {
    const double r = base / s;
    if (r < r_min) break;
    out.push_back({s, r});
  }
  return out;
}

PolarDictionary build_dictionary(const ArrayGeometry& geometry, double epsilon, std::optional<double> r_min,
                                 const DictionaryOptions& options) {
  const ArrayGeometry g = geometry.centered();
  const double rmin = r_min.value_or(region_boundaries(g).reactive_limit);
  const double dl = g.spacing() / g.wavelength();

  std::vector<double> angles;
  for (double theta : angle_samples(g)) {
    bool aliased = false;
    if (options.drop_aliased_angles) {
      for (double kept : angles) {
        const double x = (std::sin(theta) - std::sin(kept)) * dl;
        if (std::abs(x - std::round(x)) < 1e-9) {
          aliased = true;
          break;
        }
      }
    }
    if (!aliased) angles.push_back(theta);
  }

  PolarDictionary dict{CMat(), {}, epsilon, true, g};
  for (double theta : angles)
    for (const RingSample& rs : distance_samples(g, theta, epsilon, rmin)) dict.labels.push_back({theta, rs.range, rs.s});

  const double scale = 1.0 / std::sqrt(static_cast<double>(g.num_elements()));
  dict.atoms.resize(g.num_elements(), static_cast<Eigen::Index>(dict.labels.size()));
  for (std::size_t q = 0; q < dict.labels.size(); ++q)
    dict.atoms.col(static_cast<Eigen::Index>(q)) =
        scale * steering(g, dict.labels[q].theta, dict.labels[q].range, SteeringModel::FresnelQuadratic);
  return dict;
}

CoherenceResult coherence(const PolarDictionary& dictionary) {
  const Eigen::Index Q = dictionary.atoms.cols();
  if (Q < 2) throw DomainError("coherence needs at least two atoms");
  const double N = static_cast<double>(dictionary.atoms.rows());
  // Raw atoms are unit-modulus; normalized ones are raw / sqrt(N).
  const double to_raw = dictionary.normalized ? N : 1.0;
  CoherenceResult best{0.0, 0.0, 0, 1};
  const Eigen::Index block = 256;
  for (Eigen::Index start = 0; start < Q; start += block) {
    const Eigen::Index len = std::min(block, Q - start);
    const CMat G = dictionary.atoms.middleCols(start, len).adjoint() * dictionary.atoms;
    for (Eigen::Index i = 0; i < len; ++i) {
      const Eigen::Index p = start + i;
      for (Eigen::Index q = p + 1; q < Q; ++q) {
        const double v = std::abs(G(i, q)) * to_raw;
        if (v > best.mu) best = {v, 0.0, static_cast<std::size_t>(p), static_cast<std::size_t>(q)};
      }
    }
  }
  best.mu_normalized = best.mu / N;
  return best;
}

CVec synthesize_channel(const ArrayGeometry& geometry, const ChannelSpec& spec) {
  if (spec.paths.empty()) throw ConfigurationError("channel needs at least one path");
  CVec h = CVec::Zero(geometry.num_elements());
  for (const ChannelPath& p : spec.paths) h += p.alpha * steering(geometry, p.theta, p.range);
  return h;
}

PilotSetup make_pilot_setup(int num_elements, int num_rf, int num_slots, double snr_db, std::uint64_t seed) {
  if (num_elements < 1 || num_rf < 1 || num_slots < 1) throw ConfigurationError("pilot dimensions must be positive");
  PilotSetup s;
  s.rho = db2lin(snr_db);
  s.num_rf = num_rf;
  s.num_slots = num_slots;
  s.seed = seed;
  const int M = num_rf * num_slots;
  s.combining.resize(M, num_elements);
  const double scale = 1.0 / std::sqrt(static_cast<double>(num_elements));
  RandomStream rng(seed, {stream_tag("combining")});
  for (int m = 0; m < M; ++m)
    for (int n = 0; n < num_elements; ++n) s.combining(m, n) = scale * rng.unit_phase();
  return s;
}

CVec observe_pilot(const CVec& h, const PilotSetup& setup) {
  if (h.size() != setup.combining.cols()) throw DomainError("channel length does not match the combining matrix");
  CVec y = std::sqrt(setup.rho) * (setup.combining * h);
  RandomStream rng(setup.seed, {stream_tag("pilot-noise")});
  for (Eigen::Index m = 0; m < y.size(); ++m) y[m] += rng.complex_normal(1.0);
  return y;
}

CVec ls_estimate(const CVec& y, const PilotSetup& setup) {
  if (y.size() != setup.combining.rows()) throw DomainError("observation length does not match the combining matrix");
  const CMat Phi = std::sqrt(setup.rho) * setup.combining;
  return Phi.completeOrthogonalDecomposition().solve(y);
}

OmpResult omp_estimate(const CVec& y, const PilotSetup& setup, const PolarDictionary& dictionary,
                       const OmpOptions& options) {
  const Eigen::Index Q = dictionary.atoms.cols();
  if (!options.sparsity && !options.residual_tol) throw DomainError("OMP needs a sparsity level or residual tolerance");
  const int max_atoms = options.sparsity.value_or(static_cast<int>(std::min<Eigen::Index>(Q, y.size())));
  if (max_atoms > Q) throw DomainError("sparsity exceeds the dictionary size");
  if (max_atoms < 0) throw DomainError("sparsity must be non-negative");
  if (y.size() != setup.combining.rows()) throw DomainError("observation length does not match the combining matrix");
  if (dictionary.atoms.rows() != setup.combining.cols()) throw DomainError("dictionary does not match the array");

  const double sr = std::sqrt(setup.rho);
  const double tol = options.residual_tol.value_or(-1.0);
  OmpResult out;
  CVec r = y;
  CMat PhiS(y.size(), 0);
  CVec coef;
  std::vector<char> used(static_cast<std::size_t>(Q), 0);

  while (static_cast<int>(out.support.size()) < max_atoms && r.norm() > tol) {
    const CVec corr = sr * (dictionary.atoms.adjoint() * (setup.combining.adjoint() * r));
    Eigen::Index best = -1;
    double best_v = -1.0;
    for (Eigen::Index q = 0; q < Q; ++q) {
      if (used[static_cast<std::size_t>(q)]) continue;
      const double v = std::abs(corr[q]);
      if (v > best_v) {
        best_v = v;
        best = q;
      }
    }
    if (best < 0) break;
    used[static_cast<std::size_t>(best)] = 1;
    out.support.push_back(static_cast<std::size_t>(best));
    PhiS.conservativeResize(Eigen::NoChange, PhiS.cols() + 1);
    PhiS.col(PhiS.cols() - 1) = sr * (setup.combining * dictionary.atoms.col(best));
    coef = PhiS.colPivHouseholderQr().solve(y);
    r = y - PhiS * coef;
  }

  out.h_hat = CVec::Zero(dictionary.atoms.rows());
  for (std::size_t i = 0; i < out.support.size(); ++i) {
    out.h_hat += coef[static_cast<Eigen::Index>(i)] * dictionary.atoms.col(static_cast<Eigen::Index>(out.support[i]));
    out.labels.push_back(dictionary.labels[out.support[i]]);
  }
  out.residual_norm = r.norm();
  return out;
}

double nmse(const CVec& h_hat, const CVec& h_true) {
  if (h_hat.size() != h_true.size()) throw DomainError("nmse needs equal lengths");
  const double den = h_true.squaredNorm();
  if (!(den > 0.0)) throw DomainError("nmse undefined for a zero true channel");
  return (h_hat - h_true).squaredNorm() / den;
}

}  // namespace nfkit
