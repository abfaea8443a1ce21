// SPDX-License-Identifier: Apache-2.0
#include "nfkit/beamformers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nfkit/errors.hpp"

namespace nfkit {

AvsManifold avs_manifold(double theta, double phi, double r, double wavelength) {
  if (!(r > 0.0)) throw DomainError("AVS range must be positive");
  if (!(wavelength > 0.0)) throw DomainError("wavelength must be positive");
  const double x = std::isinf(r) ? 0.0 : wavelength / (2.0 * kPi * r);
  return {std::sin(phi) * std::cos(theta), std::sin(phi) * std::sin(theta), std::cos(phi),
          std::polar(1.0 / std::sqrt(1.0 + x * x), std::atan(x))};
}

MvdrResult mvdr_weights(const CMat& R, const CVec& a) {
  const auto N = R.rows();
  if (R.cols() != N || a.size() != N) throw DomainError("MVDR dimensions do not match");
  if (!(a.norm() > 0.0)) throw DomainError("MVDR steering vector is zero");
  MvdrResult out;
  Eigen::SelfAdjointEigenSolver<CMat> es(R, Eigen::EigenvaluesOnly);
  const double lmax = es.eigenvalues().maxCoeff();
  const double lmin = es.eigenvalues().minCoeff();
  out.condition_number = lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity();
  CMat Rl = R;
  if (!(out.condition_number <= 1e10)) {
    double load = 1e-6 * std::real(R.trace()) / static_cast<double>(N);
    if (!(load > 0.0)) load = 1e-6;
    Rl.diagonal().array() += load;
    out.diagonal_loading = true;
  }
  const CVec x = Rl.ldlt().solve(a);
  CVec w = x / a.dot(x);
  const cdouble s = w.dot(a);  // w^H a
  w /= std::conj(s);
  out.w = std::move(w);
  return out;
}

Eigen::RowVectorXcd beamformer_output(const CVec& w, const CMat& data) {
  if (w.size() != data.rows()) throw DomainError("weight length does not match the sensor count");
  return w.adjoint() * data;
}

std::vector<Point3> line_array(int num_elements, double pitch) {
  if (num_elements < 1 || !(pitch > 0.0)) throw DomainError("invalid line array");
  std::vector<Point3> out;
  for (int n = 0; n < num_elements; ++n) out.push_back({(n - 0.5 * (num_elements - 1)) * pitch, 0.0, 0.0});
  return out;
}

CVec point_response(const std::vector<Point3>& elements, const Point3& point, double wavelength) {
  const double k = 2.0 * kPi / wavelength;
  const double ref = std::hypot(point[0], point[1], point[2]);
  CVec y(static_cast<Eigen::Index>(elements.size()));
  for (std::size_t n = 0; n < elements.size(); ++n) {
    const auto& e = elements[n];
    const double dn = std::hypot(point[0] - e[0], point[1] - e[1], point[2] - e[2]);
    y[static_cast<Eigen::Index>(n)] = std::polar(1.0, -k * (dn - ref));
  }
  return y;
}

namespace {

double max_sidelobe(const CMat& Y, const CVec& w) {
  if (Y.cols() == 0) return 0.0;
  return (Y.adjoint() * w).cwiseAbs().maxCoeff();
}

}  // namespace

SidelobeSolution sidelobe_design(const SidelobeProblem& problem, const SidelobeOptions& options) {
  const CVec& yf = problem.focus_response;
  const CMat& Y = problem.sidelobe_responses;
  const double yf2 = yf.squaredNorm();
  if (!(yf2 > 0.0)) throw DomainError("focus response must be non-zero");
  if (!(problem.delta > 0.0)) throw DomainError("sidelobe ceiling must be positive");
  if (Y.cols() > 0 && Y.rows() != yf.size()) throw DomainError("sidelobe responses do not match the array");

  // Matched filter: minimum-norm distortionless weight; optimal if feasible.
  CVec w = yf / yf2;
  SidelobeSolution out{w, w.norm(), max_sidelobe(Y, w), true, 0};
  if (out.max_sidelobe <= problem.delta) return out;

  auto project = [&](CVec& v) { v += yf * ((1.0 - yf.dot(v)) / yf2); };
  const double Ynorm2 = Y.cols() > 0 ? Eigen::JacobiSVD<CMat>(Y).singularValues()[0] : 0.0;
  double mu = options.mu0;
  int total = 0;
  for (int stage = 0; stage < options.stages; ++stage, mu *= options.mu_growth) {
    const double L = 2.0 + 2.0 * mu * Ynorm2 * Ynorm2;
    const double step = 1.0 / L;
    CVec x = w, z = w;
    double t = 1.0;
    for (int it = 0; it < options.max_iters_per_stage; ++it, ++total) {
      const CVec c = Y.adjoint() * z;  // y_p^H z
      CVec grad = 2.0 * z;
      for (Eigen::Index p = 0; p < c.size(); ++p) {
        const double m = std::abs(c[p]);
        if (m > problem.delta) grad += (2.0 * mu * (m - problem.delta) / m) * Y.col(p) * c[p];
      }
      CVec xn = z - step * grad;
      project(xn);
      const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      z = xn + ((t - 1.0) / tn) * (xn - x);
      const double change = (xn - x).norm();
      x = std::move(xn);
      t = tn;
      if (change <= options.step_tol * (1.0 + x.norm())) break;
    }
    w = x;
  }
  out.w = w;
  out.xi = w.norm();
  out.max_sidelobe = max_sidelobe(Y, w);
  out.feasible = out.max_sidelobe <= problem.delta + options.feasibility_tol;
  out.iterations = total;
  return out;
}

}  // namespace nfkit
