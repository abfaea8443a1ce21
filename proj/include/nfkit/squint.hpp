// SPDX-License-Identifier: Apache-2.0
//
// Wideband near-field steering in sine space. With vartheta = sin(theta) and
// Upsilon = (1 - vartheta^2) / (2 r), subcarrier f_m sees
//
//   [a~(vartheta, r; f_m)]_n = exp(j 2 pi f_m / c (n d vartheta - n^2 d^2 Upsilon)).
//
// A beam matched at f_c to (vartheta_0, r_0) peaks at f_m where
// f_m vartheta = f_c vartheta_0 and f_m Upsilon = f_c Upsilon_0, which gives
//
//   d_vartheta = (eta - 1) vartheta_0
//   d_r        = r_0 ((1 - eta^2 vartheta_0^2) / (eta (1 - vartheta_0^2)) - 1),   eta = f_c / f_m.
#pragma once

#include <vector>

#include "nfkit/array_model.hpp"
#include "nfkit/types.hpp"

namespace nfkit {

struct WidebandGrid {
  double carrier_freq;
  double bandwidth;
  std::vector<double> freqs;
  std::vector<double> eta;
};

// M subcarriers spread uniformly over [f_c - B/2, f_c + B/2].
WidebandGrid make_wideband_grid(double carrier_freq, double bandwidth, int num_subcarriers);

CVec steering_subcarrier(const ArrayGeometry& geometry, double vartheta, double r, double f_m);

struct SquintDeviation {
  double delta_theta;  // sine space
  double delta_range;  // metres
};

SquintDeviation squint_deviation(double vartheta, double r, double eta);

struct Beampattern {
  std::vector<double> vartheta_grid;
  std::vector<double> range_grid;
  RMat gain;  // vartheta x range, |w^H a~|^2 / N
  double peak_vartheta;
  double peak_range;
  double peak_gain;
  int peak_i;
  int peak_j;
};

// w must be unit norm; the matched beam then peaks at gain 1.
Beampattern wideband_beampattern(const ArrayGeometry& geometry, const CVec& w, const std::vector<double>& vartheta_grid,
                                 const std::vector<double>& range_grid, double f_m);

// Unit-norm beam matched to (vartheta_0, r_0) at the carrier.
CVec matched_beam(const ArrayGeometry& geometry, double vartheta0, double r0);

}  // namespace nfkit
