// SPDX-License-Identifier: Apache-2.0
#include "nfkit/focusing.hpp"

#include <cmath>
#include <functional>
#include <string>

#include <boost/math/tools/roots.hpp>

#include "nfkit/errors.hpp"
#include "nfkit/rng.hpp"

namespace nfkit {

namespace {

double find_root(const std::function<double(double)>& f, double lo, double hi) {
  boost::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(50), iters);
  return 0.5 * (r.first + r.second);
}

double focus_coefficient(const ArrayGeometry& g, double theta_axis) {
  const double N = g.num_elements();
  const double d = g.spacing();
  const double s = std::sin(theta_axis);
  return N * N * d * d * s * s / (2.0 * g.wavelength());
}

}  // namespace

double fresnel_gain(double z) {
  if (z < 1e-8) return 1.0;
  const FresnelPair p = fresnel_integrals(z);
  return std::hypot(p.c, p.s) / z;
}

double z_3db_exact() {
  static const double z = find_root([](double x) { return fresnel_gain(x) - 0.5; }, 1.0, 2.0);
  return z;
}

double array_gain(const ArrayGeometry& geometry, double theta_axis, double r0, double r, SteeringModel model) {
  if (!(r0 > 0.0) || !(r > 0.0)) throw DomainError("array gain needs positive ranges");
  const ArrayGeometry g = geometry.centered();
  const double tb = axis_to_broadside(theta_axis);
  const CVec a0 = steering(g, tb, r0, model);
  const CVec a = steering(g, tb, r, model);
  return std::abs(a0.dot(a)) / g.num_elements();
}

double array_gain_approx(const ArrayGeometry& geometry, double theta_axis, double r0, double r) {
  if (!(r0 > 0.0) || !(r > 0.0)) throw DomainError("array gain needs positive ranges");
  const double z = std::sqrt(focus_coefficient(geometry, theta_axis) * std::abs(1.0 / r0 - 1.0 / r));
  return fresnel_gain(z);
}

BeamDepthResult beam_depth(const ArrayGeometry& geometry, double theta_axis, double r0, double z_3db) {
  if (!(r0 > 0.0)) throw DomainError("beam depth needs r0 > 0");
  BeamDepthResult out{};
  out.z_3db = z_3db;
  out.r_bd = focus_coefficient(geometry, theta_axis) / (z_3db * z_3db);
  out.degenerate_angle = !(out.r_bd > 0.0);
  if (out.degenerate_angle || r0 >= out.r_bd) {
    out.bd_3db = kInfiniteRange;
  } else {
    out.bd_3db = 2.0 * r0 * r0 * out.r_bd / (out.r_bd * out.r_bd - r0 * r0);
  }
  return out;
}

NumericalBeamDepth numerical_beam_depth(const ArrayGeometry& geometry, double theta_axis, double r0, double level,
                                        double r_far) {
  auto f = [&](double r) { return array_gain(geometry, theta_axis, r0, r) - level; };
  NumericalBeamDepth out{};
  // Walk outwards geometrically until the gain first drops below the level.
  double inner = r0, probe = r0;
  while (true) {
    probe /= 1.01;
    if (probe < 1e-6 * r0) throw DomainError("gain never falls below the level towards the array");
    if (f(probe) < 0.0) break;
    inner = probe;
  }
  out.r_lo = find_root(f, probe, inner);
  double outer = r0;
  probe = r0;
  out.r_hi = kInfiniteRange;
  while (probe < r_far) {
    probe *= 1.01;
    if (f(probe) < 0.0) {
      out.r_hi = find_root(f, outer, probe);
      break;
    }
    outer = probe;
  }
  out.width = out.r_hi - out.r_lo;
  return out;
}

CVec mrt_precoder(const CVec& h) {
  const double n = h.norm();
  if (!(n > 0.0)) throw DomainError("MRT needs a non-zero channel");
  return h / n;
}

namespace {

void check_channels(const UplinkScenario& s, const std::vector<CVec>& h) {
  if (h.size() != s.users.size()) throw DomainError("one channel per user is required");
  if (!(s.noise_power > 0.0)) throw DomainError("noise power must be positive");
  for (std::size_t k = 1; k < h.size(); ++k)
    if (h[k].size() != h[0].size()) throw DomainError("channels must have equal length");
}

// v_k proportional to (sigma^2 I + sum_i p_i g_i g_i^H)^{-1} g_k, via the
// K x K Woodbury system; well conditioned even when sigma^2 is tiny.
std::vector<CVec> mmse_combiners(const UplinkScenario& s, const std::vector<CVec>& g) {
  const auto K = static_cast<Eigen::Index>(g.size());
  const auto N = g[0].size();
  CMat G(N, K);
  for (Eigen::Index k = 0; k < K; ++k) G.col(k) = g[static_cast<std::size_t>(k)];
  CMat M = G.adjoint() * G;
  for (Eigen::Index k = 0; k < K; ++k) M(k, k) += s.noise_power / s.users[static_cast<std::size_t>(k)].power;
  const auto solver = M.ldlt();
  std::vector<CVec> v;
  for (Eigen::Index k = 0; k < K; ++k) {
    const CVec gk = G.col(k);
    v.push_back(gk - G * solver.solve(G.adjoint() * gk));
  }
  return v;
}

}  // namespace

std::vector<double> mmse_se(const UplinkScenario& scenario, const std::vector<CVec>& channels) {
  check_channels(scenario, channels);
  const std::size_t K = channels.size();
  std::vector<double> se(K);
  for (std::size_t k = 0; k < K; ++k) {
    // h^H (sigma^2 I + H P H^H)^{-1} h over the interferers, via Woodbury.
    const CVec& h = channels[k];
    double q = h.squaredNorm();
    if (K > 1) {
      CMat H(h.size(), static_cast<Eigen::Index>(K - 1));
      RVec pinv(static_cast<Eigen::Index>(K - 1));
      Eigen::Index c = 0;
      for (std::size_t i = 0; i < K; ++i) {
        if (i == k) continue;
        H.col(c) = channels[i];
        pinv[c] = scenario.noise_power / scenario.users[i].power;
        ++c;
      }
      CMat M = H.adjoint() * H;
      M.diagonal() += pinv.cast<cdouble>();
      const CVec b = H.adjoint() * h;
      q -= std::real(b.dot(M.ldlt().solve(b)));
    }
    const double sinr = scenario.users[k].power * std::max(q, 0.0) / scenario.noise_power;
    se[k] = std::log2(1.0 + sinr);
  }
  return se;
}

std::vector<double> combiner_se(const UplinkScenario& scenario, const std::vector<CVec>& actual,
                                const std::vector<CVec>& presumed) {
  check_channels(scenario, actual);
  check_channels(scenario, presumed);
  const std::vector<CVec> v = mmse_combiners(scenario, presumed);
  std::vector<double> se(actual.size());
  for (std::size_t k = 0; k < actual.size(); ++k) {
    const double vn = v[k].squaredNorm();
    if (!(vn > 0.0)) {
      se[k] = 0.0;
      continue;
    }
    const double signal = scenario.users[k].power * std::norm(v[k].dot(actual[k]));
    double interference = scenario.noise_power * vn;
    for (std::size_t i = 0; i < actual.size(); ++i)
      if (i != k) interference += scenario.users[i].power * std::norm(v[k].dot(actual[i]));
    se[k] = std::log2(1.0 + signal / interference);
  }
  return se;
}

std::pair<double, double> multiplex_drop(const MultiplexConfig& config, int K, int drop) {
  const ArrayGeometry g = ArrayGeometry::half_wavelength(config.num_elements, config.carrier_freq).centered();
  RandomStream rng(config.seed, {stream_tag("se-multiplex"), static_cast<std::uint64_t>(K),
                                 static_cast<std::uint64_t>(drop), stream_tag("ranges")});
  UplinkScenario sc{{}, 1e-3 * db2lin(config.noise_power_dbm)};
  std::vector<CVec> exact, presumed;
  const double tb = axis_to_broadside(config.theta_axis);
  for (int k = 0; k < K; ++k) {
    const double r = rng.uniform(config.r_min, config.r_max);
    double amp = 1.0;
    if (config.path_loss == PathLoss::FreeSpace) amp = g.wavelength() / (4.0 * kPi * r);
    sc.users.push_back({config.theta_axis, r, config.user_power});
    exact.push_back(amp * steering(g, tb, r, SteeringModel::ExactSpherical));
    presumed.push_back(amp * steering(g, tb, kInfiniteRange, SteeringModel::FarFieldPlanar));
  }
  const std::vector<double> se_exact = mmse_se(sc, exact);
  const std::vector<double> se_mis = combiner_se(sc, exact, presumed);
  double a = 0.0, b = 0.0;
  for (int k = 0; k < K; ++k) {
    a += se_exact[k];
    b += se_mis[k];
  }
  return {a / K, b / K};
}

std::vector<MultiplexRow> multiplex_experiment(const MultiplexConfig& config) {
  std::vector<MultiplexRow> rows;
  for (int K : config.user_counts) {
    if (K < 1) throw ConfigurationError("user counts must be positive");
    double a = 0.0, b = 0.0;
    for (int d = 0; d < config.drops; ++d) {
      const auto [e, m] = multiplex_drop(config, K, d);
      a += e;
      b += m;
    }
    rows.push_back({K, a / config.drops, b / config.drops});
  }
  return rows;
}

}  // namespace nfkit
