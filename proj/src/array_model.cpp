// SPDX-License-Identifier: Apache-2.0
#include "nfkit/array_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "nfkit/errors.hpp"

namespace nfkit {

const char* to_string(FieldRegion region) {
  switch (region) {
    case FieldRegion::ReactiveNF: return "reactive-nf";
    case FieldRegion::RadiativeNF: return "radiative-nf";
    case FieldRegion::FarField: return "far-field";
  }
  return "?";
}

const char* to_string(SteeringModel model) {
  switch (model) {
    case SteeringModel::ExactSpherical: return "exact";
    case SteeringModel::FresnelQuadratic: return "fresnel";
    case SteeringModel::FarFieldPlanar: return "planar";
  }
  return "?";
}

ArrayGeometry::ArrayGeometry(int num_elements, double spacing, double carrier_freq, int phase_reference,
                             double propagation_speed)
    : num_elements_(num_elements),
      spacing_(spacing),
      carrier_freq_(carrier_freq),
      wavelength_(propagation_speed / carrier_freq),
      propagation_speed_(propagation_speed),
      phase_reference_(phase_reference) {
  validate();
}

ArrayGeometry ArrayGeometry::half_wavelength(int num_elements, double carrier_freq, int phase_reference,
                                             double propagation_speed) {
  return ArrayGeometry(num_elements, 0.5 * propagation_speed / carrier_freq, carrier_freq, phase_reference,
                       propagation_speed);
}

ArrayGeometry ArrayGeometry::from_wavelength(int num_elements, double spacing, double wavelength,
                                             int phase_reference, double propagation_speed) {
  ArrayGeometry g;
  g.num_elements_ = num_elements;
  g.spacing_ = spacing;
  g.wavelength_ = wavelength;
  g.propagation_speed_ = propagation_speed;
  g.carrier_freq_ = propagation_speed / wavelength;
  g.phase_reference_ = phase_reference;
  g.validate();
  return g;
}

void ArrayGeometry::validate() const {
  if (num_elements_ < 2) throw DomainError("array needs at least 2 elements, got " + std::to_string(num_elements_));
  if (!(spacing_ > 0.0) || !std::isfinite(spacing_)) throw DomainError("element spacing must be positive");
  if (!(wavelength_ > 0.0) || !std::isfinite(wavelength_)) throw DomainError("wavelength must be positive");
  if (!(propagation_speed_ > 0.0)) throw DomainError("propagation speed must be positive");
  if (phase_reference_ < 0 || phase_reference_ >= num_elements_)
    throw DomainError("phase reference " + std::to_string(phase_reference_) + " outside array of " +
                      std::to_string(num_elements_) + " elements");
}

ArrayGeometry ArrayGeometry::with_reference(int phase_reference) const {
  ArrayGeometry g = *this;
  g.phase_reference_ = phase_reference;
  g.validate();
  return g;
}

ArrayGeometry ArrayGeometry::with_carrier(double carrier_freq) const {
  ArrayGeometry g = *this;
  g.carrier_freq_ = carrier_freq;
  g.wavelength_ = propagation_speed_ / carrier_freq;
  g.validate();
  return g;
}

RegionBoundaries region_boundaries(const ArrayGeometry& geometry) {
  const double D = geometry.aperture();
  const double lambda = geometry.wavelength();
  return {0.62 * std::sqrt(D * D * D / lambda), 2.0 * D * D / lambda, lambda / kPi};
}

FieldRegion classify_range(const ArrayGeometry& geometry, double r) {
  if (!(r > 0.0)) throw DomainError("range must be positive");
  const RegionBoundaries b = region_boundaries(geometry);
  if (r <= b.reactive_limit) return FieldRegion::ReactiveNF;
  if (r <= b.fraunhofer) return FieldRegion::RadiativeNF;
  return FieldRegion::FarField;
}

double electrical_angle(const ArrayGeometry& geometry, double theta) {
  return 2.0 * kPi * geometry.spacing() * std::sin(theta) / geometry.wavelength();
}

double quadratic_phase(const ArrayGeometry& geometry, double theta, double r) {
  if (std::isinf(r)) return 0.0;
  const double d = geometry.spacing();
  const double c = std::cos(theta);
  return -kPi * d * d * c * c / (geometry.wavelength() * r);
}

double theta_from_electrical_angle(const ArrayGeometry& geometry, double omega) {
  const double s = omega * geometry.wavelength() / (2.0 * kPi * geometry.spacing());
  if (std::abs(s) > 1.0 + 1e-12) throw DomainError("electrical angle outside the visible region");
  return std::asin(std::clamp(s, -1.0, 1.0));
}

double range_from_quadratic_phase(const ArrayGeometry& geometry, double theta, double kappa) {
  if (kappa == 0.0) return kInfiniteRange;
  const double d = geometry.spacing();
  const double c = std::cos(theta);
  return -kPi * d * d * c * c / (geometry.wavelength() * kappa);
}

namespace {

void check_angle(double theta) {
  if (!(std::abs(theta) <= kPi / 2.0 + 1e-12)) throw DomainError("steering angle must satisfy |theta| <= pi/2");
}

}  // namespace

CVec steering_from_phases(const ArrayGeometry& geometry, double omega, double kappa) {
  const int N = geometry.num_elements();
  CVec a(N);
  for (int i = 0; i < N; ++i) {
    const double n = geometry.offset(i);
    a[i] = std::polar(1.0, omega * n + kappa * n * n);
  }
  a[geometry.phase_reference()] = 1.0;
  return a;
}

CVec steering(const ArrayGeometry& geometry, double theta, double r, SteeringModel model) {
  check_angle(theta);
  if (std::isnan(r) || r <= 0.0) throw DomainError("steering range must be positive or infinite");
  const double omega = electrical_angle(geometry, theta);
  if (std::isinf(r) || model == SteeringModel::FarFieldPlanar) return steering_from_phases(geometry, omega, 0.0);
  if (model == SteeringModel::FresnelQuadratic)
    return steering_from_phases(geometry, omega, quadratic_phase(geometry, theta, r));

  const int N = geometry.num_elements();
  const double d = geometry.spacing();
  const double k = 2.0 * kPi / geometry.wavelength();
  const double st = std::sin(theta);
  CVec a(N);
  for (int i = 0; i < N; ++i) {
    const double nd = geometry.offset(i) * d;
    // r_n - r written to avoid cancellation when nd << r
    const double num = nd * nd - 2.0 * r * nd * st;
    const double rn = std::sqrt(r * r + num);
    a[i] = std::polar(1.0, -k * (num / (rn + r)));
  }
  a[geometry.phase_reference()] = 1.0;
  return a;
}

std::vector<MismatchPoint> wavefront_mismatch_mse(const ArrayGeometry& geometry, double theta,
                                                  std::span<const double> r_grid) {
  if (r_grid.empty()) throw DomainError("wavefront_mismatch_mse needs a non-empty range grid");
  const CVec ff = steering(geometry, theta, kInfiniteRange, SteeringModel::FarFieldPlanar);
  std::vector<MismatchPoint> out;
  out.reserve(r_grid.size());
  for (double r : r_grid) {
    if (!(r > 0.0)) throw DomainError("range grid entries must be positive");
    const CVec exact = steering(geometry, theta, r, SteeringModel::ExactSpherical);
    out.push_back({r, (exact - ff).squaredNorm() / geometry.num_elements()});
  }
  return out;
}

double max_planar_phase_error(const ArrayGeometry& geometry, double theta, double r) {
  const CVec exact = steering(geometry, theta, r, SteeringModel::ExactSpherical);
  const CVec ff = steering(geometry, theta, kInfiniteRange, SteeringModel::FarFieldPlanar);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < exact.size(); ++i) worst = std::max(worst, std::abs(std::arg(exact[i] * std::conj(ff[i]))));
  return worst;
}

namespace {

FresnelPair fresnel_series(double z) {
  // C = sum (-1)^k (pi/2)^{2k} z^{4k+1} / ((2k)! (4k+1)), S likewise with odd powers.
  const double a = kPi / 2.0;
  const double z2 = z * z;
  double c = 0.0, s = 0.0;
  double term = z;  // (-1)^k a^m z^{2m+1} / m!, m = 0, 1, 2, ...
  for (int m = 0; m < 60; ++m) {
    const double contrib = term / (2.0 * m + 1.0);
    if (m % 2 == 0)
      c += contrib;
    else
      s += contrib;
    term *= a * z2 / (m + 1.0);
    if (m % 2 == 1) term = -term;
    if (std::abs(contrib) < 1e-18 * std::max(1.0, std::abs(c))) break;
  }
  return {c, s};
}

// Direct adaptive quadrature of the defining integrals.
FresnelPair fresnel_quadrature(double z) {
  using boost::math::quadrature::gauss_kronrod;
  const double tol = 1e-12;
  const double c = gauss_kronrod<double, 31>::integrate([](double x) { return std::cos(kPi * x * x / 2.0); }, 0.0, z,
                                                        20, tol);
  const double s = gauss_kronrod<double, 31>::integrate([](double x) { return std::sin(kPi * x * x / 2.0); }, 0.0, z,
                                                        20, tol);
  return {c, s};
}

// Tail via rotation of the integration contour:
//   int_z^inf e^{j pi x^2/2} dx = j e^{j pi z^2/2} int_0^inf e^{-pi z u} e^{-j pi u^2/2} du,
// whose integrand is non-oscillatory for large z.
FresnelPair fresnel_tail(double z) {
  using boost::math::quadrature::gauss_kronrod;
  const double upper = 45.0 / (kPi * z);
  const double tol = 1e-13;
  const double re = gauss_kronrod<double, 31>::integrate(
      [z](double u) { return std::exp(-kPi * z * u) * std::cos(kPi * u * u / 2.0); }, 0.0, upper, 20, tol);
  const double im = gauss_kronrod<double, 31>::integrate(
      [z](double u) { return -std::exp(-kPi * z * u) * std::sin(kPi * u * u / 2.0); }, 0.0, upper, 20, tol);
  const double z2mod4 = std::fmod(z * z, 4.0);
  const cdouble tail = kJ * std::polar(1.0, kPi * z2mod4 / 2.0) * cdouble(re, im);
  const cdouble f = cdouble(0.5, 0.5) - tail;
  return {f.real(), f.imag()};
}

}  // namespace

FresnelPair fresnel_integrals(double z) {
  if (!std::isfinite(z)) {
    if (std::isnan(z)) throw DomainError("fresnel_integrals needs a finite argument");
    return z > 0 ? FresnelPair{0.5, 0.5} : FresnelPair{-0.5, -0.5};
  }
  const double az = std::abs(z);
  FresnelPair p;
  if (az <= 1.0)
    p = fresnel_series(az);
  else if (az <= 6.0)
    p = fresnel_quadrature(az);
  else
    p = fresnel_tail(az);
  if (z < 0) return {-p.c, -p.s};
  return p;
}

}  // namespace nfkit
