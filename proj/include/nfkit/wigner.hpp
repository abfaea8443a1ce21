// SPDX-License-Identifier: Apache-2.0
//
// Wigner functions in the convention d^l_{kn}(beta) = <l k| exp(-j beta J_y) |l n>,
// D^l_{kn}(theta, phi, chi) = N_l e^{-j k phi} d^l_{kn}(cos theta) e^{-j n chi},
// N_l = sqrt((2l + 1) / (8 pi^2)). Coefficients are ordered l-major, then k,
// then n, all ascending.
#pragma once

#include <cstdint>
#include <vector>

#include "nfkit/types.hpp"

namespace nfkit {

double wigner_d(int l, int k, int n, double cos_theta);
cdouble wigner_D(int l, int k, int n, double theta, double phi, double chi);

// d^l_{kn} for l = max(|k|,|n|) .. lmax (entries below the base degree are 0),
// via three-term recursion in l.
std::vector<double> wigner_d_column(int lmax, int k, int n, double cos_theta);

// Reference evaluation from the explicit finite sum.
double wigner_d_explicit(int l, int k, int n, double cos_theta);

struct WignerIndex {
  int l;
  int k;
  int n;
};

int wigner_coefficient_count(int bandlimit);
int wigner_coefficient_index(int l, int k, int n);
WignerIndex wigner_coefficient_label(int index);

struct RotationSample {
  double theta;
  double phi;
  double chi;
};

// Uniform random rotations: phi, chi uniform, cos(theta) uniform.
std::vector<RotationSample> random_rotation_samples(int count, std::uint64_t seed);

CMat build_wigner_matrix(int bandlimit, const std::vector<RotationSample>& samples);

CVec synthesize_field(const CVec& alpha, const CMat& A);
RVec phaseless_measure(const CVec& alpha, const CMat& A);

// f(alpha) = 1/2 || |A alpha| - y ||^2 and its gradient A^H (z - y z/|z|),
// z = A alpha, zero where z vanishes. Directional derivative along d is
// Re(grad^H d).
double pr_objective(const CVec& alpha, const CMat& A, const RVec& y);
CVec pr_gradient(const CVec& alpha, const CMat& A, const RVec& y);

struct PhaseRetrievalOptions {
  int restarts = 20;
  int max_iters = 3000;
  double tol = 1e-8;  // relative residual || |A alpha| - y || / ||y||
  std::uint64_t seed = 0;
  bool stop_on_success = true;
  // After a stalled descent, conjugate-flip subsets of degrees and descend
  // again while the residual improves; up to this many rounds per restart.
  int flip_hops = 6;
  // Truncated amplitude-flow warm-up before each descent: measurements with
  // |(A alpha)_i| < y_i / (1 + truncation_gamma) are left out of the gradient.
  // 0 disables it.
  int truncation_iters = 1000;
  double truncation_gamma = 0.7;
};

struct RestartRecord {
  int restart;
  double residual;
  int iterations;
  bool converged;
};

struct PhaseRetrievalResult {
  CVec alpha;
  double residual;
  bool converged;
  int best_restart;
  std::vector<RestartRecord> log;
};

struct DescentResult {
  CVec alpha;
  double residual;  // relative
  int iterations;
};

// Gradient descent with Armijo backtracking from a given starting point.
DescentResult pr_descend(const CVec& init, const CMat& A, const RVec& y, const PhaseRetrievalOptions& options);

PhaseRetrievalResult phase_retrieve(const RVec& y, const CMat& A, const PhaseRetrievalOptions& options = {});

// min over gamma of ||alpha_hat e^{j gamma} - alpha|| / ||alpha||.
double relative_error_up_to_phase(const CVec& alpha_hat, const CVec& alpha);

// The same after also allowing alpha_{l,k,n} -> (-1)^{k-n} conj(alpha_{l,-k,-n}),
// which leaves every phaseless Wigner measurement unchanged.
double relative_error_up_to_ambiguity(const CVec& alpha_hat, const CVec& alpha);
CVec wigner_conjugate_flip(const CVec& alpha);

}  // namespace nfkit
