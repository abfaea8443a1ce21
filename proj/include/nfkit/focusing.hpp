// SPDX-License-Identifier: Apache-2.0
//
// Beam focusing. Angles here are measured from the array axis (theta = 90
// degrees is broadside), which is the convention under which the beam-depth
// boundary r_BD = N^2 d^2 sin^2(theta) / (2 lambda z_3dB^2) holds. Steering is
// evaluated on the centre-referenced array.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nfkit/array_model.hpp"
#include "nfkit/types.hpp"

namespace nfkit {

// Root of |C(z) + j S(z)| / z = 1/2.
double z_3db_exact();
inline constexpr double kZ3dBNominal = 1.6;

// Convert an axis angle to the broadside angle used by steering().
inline double axis_to_broadside(double theta_axis) { return kPi / 2.0 - theta_axis; }

// G = |a^H(theta, r0) a(theta, r)| / N with exact spherical steering.
double array_gain(const ArrayGeometry& geometry, double theta_axis, double r0, double r,
                  SteeringModel model = SteeringModel::ExactSpherical);

// |C(z) + j S(z)| / z with z = sqrt(N^2 d^2 sin^2(theta) / (2 lambda) |1/r0 - 1/r|).
double array_gain_approx(const ArrayGeometry& geometry, double theta_axis, double r0, double r);
double fresnel_gain(double z);

struct BeamDepthResult {
  double r_bd;
  double bd_3db;  // kInfiniteRange when r0 >= r_BD
  double z_3db;
  bool degenerate_angle;  // sin(theta) = 0: r_BD = 0, depth infinite
};

BeamDepthResult beam_depth(const ArrayGeometry& geometry, double theta_axis, double r0, double z_3db = z_3db_exact());

struct NumericalBeamDepth {
  double r_lo;
  double r_hi;  // kInfiniteRange if the gain never falls to `level` beyond r0
  double width;
};

// Range interval around r0 where the exact gain stays >= level, by bracketed
// root finding on each side.
NumericalBeamDepth numerical_beam_depth(const ArrayGeometry& geometry, double theta_axis, double r0,
                                        double level = 0.5, double r_far = 1e7);

CVec mrt_precoder(const CVec& h);

struct User {
  double theta;  // axis angle
  double range;
  double power;
};

struct UplinkScenario {
  std::vector<User> users;
  double noise_power;
};

// SE_k = log2(1 + p_k h_k^H (sum_{i != k} p_i h_i h_i^H + sigma^2 I)^{-1} h_k).
std::vector<double> mmse_se(const UplinkScenario& scenario, const std::vector<CVec>& channels);

// SE when the MMSE combiner is built from `presumed` channels while the signal
// propagates over `actual` channels.
std::vector<double> combiner_se(const UplinkScenario& scenario, const std::vector<CVec>& actual,
                                const std::vector<CVec>& presumed);

enum class PathLoss { Unit, FreeSpace };

struct MultiplexConfig {
  int num_elements = 512;
  double carrier_freq = 30e9;
  double user_power = 0.2;         // W
  double noise_power_dbm = -87.0;
  double theta_axis = kPi / 2.0;   // common user angle (broadside)
  double r_min = 20.0;
  double r_max = 500.0;
  std::vector<int> user_counts{1, 2, 4, 6, 8, 10};
  int drops = 200;
  std::uint64_t seed = 1;
  PathLoss path_loss = PathLoss::FreeSpace;
};

struct MultiplexRow {
  int K;
  double exact_se_avg;
  double mismatched_se_avg;
};

// Exact channels are spherical near-field responses; the mismatched combiner
// presumes planar responses at the same angles.
std::vector<MultiplexRow> multiplex_experiment(const MultiplexConfig& config);

// One drop; exposed for parallel runners. Returns {exact avg SE, mismatched avg SE}.
std::pair<double, double> multiplex_drop(const MultiplexConfig& config, int K, int drop);

}  // namespace nfkit
