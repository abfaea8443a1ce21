// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <vector>

#include "nfkit/types.hpp"

namespace nfkit {

// phi is elevation from the z axis, theta the azimuth.
struct AvsManifold {
  double u;
  double v;
  double w;
  cdouble p;
};

AvsManifold avs_manifold(double theta, double phi, double r, double wavelength);

struct MvdrResult {
  CVec w;
  bool diagonal_loading = false;
  double condition_number = 0.0;
};

// w = R^{-1} a / (a^H R^{-1} a), rescaled so that w^H a = 1 exactly. R is
// loaded by 1e-6 tr(R)/N when its condition number exceeds 1e10.
MvdrResult mvdr_weights(const CMat& R, const CVec& a);

// y_o(t) = w^H y(t) for every column of `data`.
Eigen::RowVectorXcd beamformer_output(const CVec& w, const CMat& data);

using Point3 = std::array<double, 3>;

// Element positions of a line array along x, centred at the origin.
std::vector<Point3> line_array(int num_elements, double pitch);

// Unit-modulus response exp(-j k (|x_n - p| - |p|)) of every element to a point source.
CVec point_response(const std::vector<Point3>& elements, const Point3& point, double wavelength);

struct SidelobeProblem {
  CVec focus_response;
  CMat sidelobe_responses;  // N x P, possibly P = 0
  double delta;
};

struct SidelobeOptions {
  double mu0 = 10.0;
  double mu_growth = 10.0;
  int stages = 6;
  int max_iters_per_stage = 200000;
  double step_tol = 1e-13;
  double feasibility_tol = 1e-4;
};

struct SidelobeSolution {
  CVec w;
  double xi;             // ||w||
  double max_sidelobe;   // max_p |w^H y_p|, evaluated directly
  bool feasible;         // max_sidelobe <= delta + feasibility_tol
  int iterations;
};

// min ||w|| s.t. w^H y_f = 1, |w^H y_p| <= delta.
SidelobeSolution sidelobe_design(const SidelobeProblem& problem, const SidelobeOptions& options = {});

}  // namespace nfkit
