// SPDX-License-Identifier: Apache-2.0
#include "nfkit/squint.hpp"

#include <cmath>

#include "nfkit/errors.hpp"

namespace nfkit {

WidebandGrid make_wideband_grid(double carrier_freq, double bandwidth, int num_subcarriers) {
  if (!(carrier_freq > 0.0) || !(bandwidth >= 0.0) || num_subcarriers < 1)
    throw DomainError("invalid wideband grid");
  if (bandwidth / 2.0 >= carrier_freq) throw DomainError("bandwidth reaches zero frequency");
  WidebandGrid g{carrier_freq, bandwidth, {}, {}};
  for (int m = 0; m < num_subcarriers; ++m) {
    const double f = num_subcarriers == 1
                         ? carrier_freq
                         : carrier_freq - bandwidth / 2.0 + bandwidth * m / (num_subcarriers - 1);
    g.freqs.push_back(f);
    g.eta.push_back(carrier_freq / f);
  }
  if (num_subcarriers % 2 == 1) {
    g.freqs[num_subcarriers / 2] = carrier_freq;
    g.eta[num_subcarriers / 2] = 1.0;
  }
  return g;
}

CVec steering_subcarrier(const ArrayGeometry& geometry, double vartheta, double r, double f_m) {
  if (!(std::abs(vartheta) < 1.0)) throw DomainError("|vartheta| must be below 1");
  if (!(r > 0.0)) throw DomainError("range must be positive");
  if (!(f_m > 0.0)) throw DomainError("subcarrier frequency must be positive");
  const double k = 2.0 * kPi * f_m / geometry.propagation_speed();
  const double d = geometry.spacing();
  const double ups = std::isinf(r) ? 0.0 : (1.0 - vartheta * vartheta) / (2.0 * r);
  CVec a(geometry.num_elements());
  for (int i = 0; i < geometry.num_elements(); ++i) {
    const double n = geometry.offset(i);
    a[i] = std::polar(1.0, k * (n * d * vartheta - n * n * d * d * ups));
  }
  a[geometry.phase_reference()] = 1.0;
  return a;
}

SquintDeviation squint_deviation(double vartheta, double r, double eta) {
  if (!(std::abs(vartheta) < 1.0)) throw DomainError("squint deviation is singular at |vartheta| = 1");
  if (!(eta > 0.0)) throw DomainError("eta must be positive");
  const double v2 = vartheta * vartheta;
  return {(eta - 1.0) * vartheta, r * ((1.0 - eta * eta * v2) / (eta * (1.0 - v2)) - 1.0)};
}

CVec matched_beam(const ArrayGeometry& geometry, double vartheta0, double r0) {
  const CVec a = steering_subcarrier(geometry, vartheta0, r0, geometry.carrier_freq());
  return a / a.norm();
}

Beampattern wideband_beampattern(const ArrayGeometry& geometry, const CVec& w, const std::vector<double>& vartheta_grid,
                                 const std::vector<double>& range_grid, double f_m) {
  if (vartheta_grid.empty() || range_grid.empty()) throw DomainError("beampattern grids must be non-empty");
  if (w.size() != geometry.num_elements()) throw DomainError("beamformer length does not match the array");
  const double N = geometry.num_elements();
  Beampattern bp{vartheta_grid, range_grid, RMat(vartheta_grid.size(), range_grid.size()), 0, 0, -1.0, 0, 0};
  for (std::size_t i = 0; i < vartheta_grid.size(); ++i) {
    for (std::size_t j = 0; j < range_grid.size(); ++j) {
      const double g = std::norm(w.dot(steering_subcarrier(geometry, vartheta_grid[i], range_grid[j], f_m))) / N;
      bp.gain(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = g;
      if (g > bp.peak_gain) {
        bp.peak_gain = g;
        bp.peak_i = static_cast<int>(i);
        bp.peak_j = static_cast<int>(j);
      }
    }
  }
  bp.peak_vartheta = vartheta_grid[bp.peak_i];
  bp.peak_range = range_grid[bp.peak_j];
  return bp;
}

}  // namespace nfkit
