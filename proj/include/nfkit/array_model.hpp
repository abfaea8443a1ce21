// SPDX-License-Identifier: Apache-2.0
//
// Uniform linear array geometry, field-region boundaries and steering models.
//
// Element i (0-based) sits at offset n = i - phase_reference spacings from the
// phase reference. A source at broadside angle theta (measured from the array
// normal, positive towards increasing n) and range r (from the reference
// element) produces the per-element phase
//
//   ExactSpherical   : -2*pi/lambda * (r_n - r),  r_n = sqrt(r^2 + n^2 d^2 - 2 r n d sin(theta))
//   FresnelQuadratic : omega*n + kappa*n^2,       omega = 2*pi*d*sin(theta)/lambda,
//                                                 kappa = -pi*d^2*cos^2(theta)/(lambda*r)
//   FarFieldPlanar   : omega*n
//
// so every steering vector equals 1 at the phase reference.
#pragma once

#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "nfkit/types.hpp"

namespace nfkit {

enum class FieldRegion { ReactiveNF, RadiativeNF, FarField };
enum class SteeringModel { ExactSpherical, FresnelQuadratic, FarFieldPlanar };

const char* to_string(FieldRegion region);
const char* to_string(SteeringModel model);

inline constexpr double kInfiniteRange = std::numeric_limits<double>::infinity();

class ArrayGeometry {
 public:
  // Throws DomainError unless N >= 2, d > 0, f_c > 0, c > 0 and the
  // reference index is inside the array.
  ArrayGeometry(int num_elements, double spacing, double carrier_freq, int phase_reference = 0,
                double propagation_speed = kSpeedOfLight);

  // Spacing of half a carrier wavelength.
  static ArrayGeometry half_wavelength(int num_elements, double carrier_freq, int phase_reference = 0,
                                       double propagation_speed = kSpeedOfLight);

  // Geometry specified by wavelength; lambda is stored exactly as given and
  // the carrier frequency derived from it.
  static ArrayGeometry from_wavelength(int num_elements, double spacing, double wavelength,
                                       int phase_reference = 0,
                                       double propagation_speed = kSpeedOfLight);

  int num_elements() const { return num_elements_; }
  double spacing() const { return spacing_; }
  double carrier_freq() const { return carrier_freq_; }
  double wavelength() const { return wavelength_; }
  double propagation_speed() const { return propagation_speed_; }
  int phase_reference() const { return phase_reference_; }
  double aperture() const { return (num_elements_ - 1) * spacing_; }

  // Index of the middle element (N/2 rounded down); the symmetric
  // N = 2*Nbar + 1 convention uses Nbar.
  int center_index() const { return num_elements_ / 2; }
  bool is_symmetric() const { return num_elements_ % 2 == 1 && phase_reference_ == center_index(); }

  // Offset of element i from the phase reference, in element spacings.
  double offset(int i) const { return static_cast<double>(i - phase_reference_); }

  ArrayGeometry with_reference(int phase_reference) const;
  ArrayGeometry centered() const { return with_reference(center_index()); }
  ArrayGeometry with_carrier(double carrier_freq) const;

 private:
  ArrayGeometry() = default;
  void validate() const;

  int num_elements_ = 0;
  double spacing_ = 0.0;
  double carrier_freq_ = 0.0;
  double wavelength_ = 0.0;
  double propagation_speed_ = kSpeedOfLight;
  int phase_reference_ = 0;
};

struct RegionBoundaries {
  double reactive_limit;          // 0.62 * sqrt(D^3 / lambda)
  double fraunhofer;              // 2 D^2 / lambda
  double antenna_reactive_inner;  // lambda / pi, single-antenna scale
};

RegionBoundaries region_boundaries(const ArrayGeometry& geometry);

FieldRegion classify_range(const ArrayGeometry& geometry, double r);

// Electrical angle and quadratic phase coefficient of a source.
double electrical_angle(const ArrayGeometry& geometry, double theta);
double quadratic_phase(const ArrayGeometry& geometry, double theta, double r);
// Inverse maps; theta_from_electrical_angle throws if |omega| exceeds the
// visible region.
double theta_from_electrical_angle(const ArrayGeometry& geometry, double omega);
double range_from_quadratic_phase(const ArrayGeometry& geometry, double theta, double kappa);

// Steering vector of length N. r may be kInfiniteRange, in which case the
// planar phases are returned for every model.
CVec steering(const ArrayGeometry& geometry, double theta, double r,
              SteeringModel model = SteeringModel::FresnelQuadratic);

// Steering vector parameterized directly by (omega, kappa).
CVec steering_from_phases(const ArrayGeometry& geometry, double omega, double kappa);

struct MismatchPoint {
  double range;
  double mse;
};

// Per-element mean squared modulus of a_exact(theta, r) - a_FF(theta).
std::vector<MismatchPoint> wavefront_mismatch_mse(const ArrayGeometry& geometry, double theta,
                                                  std::span<const double> r_grid);

// Largest per-element phase difference between the exact and planar models.
double max_planar_phase_error(const ArrayGeometry& geometry, double theta, double r);

struct FresnelPair {
  double c;
  double s;
};

// C(z) = int_0^z cos(pi x^2 / 2) dx, S(z) = int_0^z sin(pi x^2 / 2) dx.
FresnelPair fresnel_integrals(double z);

}  // namespace nfkit
