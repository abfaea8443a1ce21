// SPDX-License-Identifier: Apache-2.0
#include "nfkit/wigner.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nfkit/errors.hpp"
#include "nfkit/rng.hpp"

namespace nfkit {

namespace {

void check_orders(int l, int k, int n) {
  if (l < 0 || std::abs(k) > l || std::abs(n) > l)
    throw DomainError("Wigner orders need |k|, |n| <= l, got l=" + std::to_string(l) + " k=" + std::to_string(k) +
                      " n=" + std::to_string(n));
}

double normalization(int l) { return std::sqrt((2.0 * l + 1.0) / (8.0 * kPi * kPi)); }

}  // namespace

double wigner_d_explicit(int l, int k, int n, double x) {
  check_orders(l, k, n);
  x = std::clamp(x, -1.0, 1.0);
  const double c = std::sqrt(0.5 * (1.0 + x));  // cos(beta/2)
  const double s = std::sqrt(0.5 * (1.0 - x));  // sin(beta/2)
  const double lf = 0.5 * (std::lgamma(l + k + 1.0) + std::lgamma(l - k + 1.0) + std::lgamma(l + n + 1.0) +
                           std::lgamma(l - n + 1.0));
  double sum = 0.0;
  const int smin = std::max(0, n - k), smax = std::min(l + n, l - k);
  for (int j = smin; j <= smax; ++j) {
    const double denom = std::lgamma(l + n - j + 1.0) + std::lgamma(j + 1.0) + std::lgamma(k - n + j + 1.0) +
                         std::lgamma(l - k - j + 1.0);
    const int pc = 2 * l + n - k - 2 * j, ps = k - n + 2 * j;
    const double sign = ((k - n + j) % 2 == 0) ? 1.0 : -1.0;
    sum += sign * std::exp(lf - denom) * std::pow(c, pc) * std::pow(s, ps);
  }
  return sum;
}

std::vector<double> wigner_d_column(int lmax, int k, int n, double x) {
  check_orders(lmax, k, n);
  x = std::clamp(x, -1.0, 1.0);
  std::vector<double> d(static_cast<std::size_t>(lmax + 1), 0.0);
  const int l0 = std::max(std::abs(k), std::abs(n));
  d[l0] = wigner_d_explicit(l0, k, n, x);
  const double kk = k, nn = n;
  for (int J = l0; J < lmax; ++J) {
    const double J1 = J + 1.0;
    const double a = std::sqrt((J1 * J1 - kk * kk) * (J1 * J1 - nn * nn));
    const double mixed = J == 0 ? 0.0 : kk * nn / (J * J1);
    double next = J1 * (2.0 * J + 1.0) / a * (x - mixed) * d[J];
    if (J > l0) {
      const double b = std::sqrt((J * J - kk * kk) * (J * J - nn * nn));
      next -= J1 * b / (J * a) * d[J - 1];
    }
    d[J + 1] = next;
  }
  return d;
}

double wigner_d(int l, int k, int n, double cos_theta) {
  check_orders(l, k, n);
  return wigner_d_column(l, k, n, cos_theta)[l];
}

cdouble wigner_D(int l, int k, int n, double theta, double phi, double chi) {
  return normalization(l) * wigner_d(l, k, n, std::cos(theta)) * std::polar(1.0, -k * phi - n * chi);
}

int wigner_coefficient_count(int bandlimit) {
  if (bandlimit < 1) throw DomainError("bandlimit must be at least 1");
  return bandlimit * (2 * bandlimit - 1) * (2 * bandlimit + 1) / 3;
}

int wigner_coefficient_index(int l, int k, int n) {
  check_orders(l, k, n);
  const int before = l == 0 ? 0 : wigner_coefficient_count(l);
  return before + (k + l) * (2 * l + 1) + (n + l);
}

WignerIndex wigner_coefficient_label(int index) {
  if (index < 0) throw DomainError("negative coefficient index");
  int l = 0;
  while (wigner_coefficient_count(l + 1) <= index) ++l;
  const int off = index - (l == 0 ? 0 : wigner_coefficient_count(l));
  const int w = 2 * l + 1;
  return {l, off / w - l, off % w - l};
}

std::vector<RotationSample> random_rotation_samples(int count, std::uint64_t seed) {
  if (count < 1) throw DomainError("need at least one rotation sample");
  RandomStream rng(seed, {stream_tag("rotations")});
  std::vector<RotationSample> out;
  for (int i = 0; i < count; ++i) {
    const double ct = rng.uniform(-1.0, 1.0);
    const double phi = rng.uniform(0.0, 2.0 * kPi);
    const double chi = rng.uniform(0.0, 2.0 * kPi);
    out.push_back({std::acos(ct), phi, chi});
  }
  return out;
}

CMat build_wigner_matrix(int bandlimit, const std::vector<RotationSample>& samples) {
  const int ncoef = wigner_coefficient_count(bandlimit);
  const int L = bandlimit - 1;
  CMat A(static_cast<Eigen::Index>(samples.size()), ncoef);
  for (std::size_t m = 0; m < samples.size(); ++m) {
    const RotationSample& s = samples[m];
    const double x = std::cos(s.theta);
    for (int k = -L; k <= L; ++k) {
      for (int n = -L; n <= L; ++n) {
        const std::vector<double> d = wigner_d_column(L, k, n, x);
        const cdouble ph = std::polar(1.0, -k * s.phi - n * s.chi);
        for (int l = std::max(std::abs(k), std::abs(n)); l <= L; ++l)
          A(static_cast<Eigen::Index>(m), wigner_coefficient_index(l, k, n)) = normalization(l) * d[l] * ph;
      }
    }
  }
  return A;
}

CVec synthesize_field(const CVec& alpha, const CMat& A) {
  if (alpha.size() != A.cols()) throw DomainError("coefficient count does not match the Wigner matrix");
  return A * alpha;
}

RVec phaseless_measure(const CVec& alpha, const CMat& A) { return synthesize_field(alpha, A).cwiseAbs(); }

double pr_objective(const CVec& alpha, const CMat& A, const RVec& y) {
  return 0.5 * ((A * alpha).cwiseAbs() - y).squaredNorm();
}

CVec pr_gradient(const CVec& alpha, const CMat& A, const RVec& y) {
  CVec z = A * alpha;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double m = std::abs(z[i]);
    z[i] = m > 0.0 ? z[i] * (1.0 - y[i] / m) : cdouble(0.0);
  }
  return A.adjoint() * z;
}

namespace {

DescentResult descend(CVec alpha, const CMat& A, const RVec& y, const PhaseRetrievalOptions& o, double ynorm) {
  double f = pr_objective(alpha, A, y);
  double step = 1.0 / A.squaredNorm() * static_cast<double>(A.rows());
  int it = 0;
  double f_mark = f;
  for (; it < o.max_iters; ++it) {
    if (std::sqrt(2.0 * f) <= o.tol * ynorm) break;
    if (it > 0 && it % 100 == 0) {
      // Stationary point: under 1e-4 relative progress over 100 steps.
      if (f > (1.0 - 1e-4) * f_mark) break;
      f_mark = f;
    }
    const CVec g = pr_gradient(alpha, A, y);
    const double g2 = g.squaredNorm();
    if (g2 == 0.0) break;
    step *= 2.0;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      const CVec trial = alpha - step * g;
      const double ft = pr_objective(trial, A, y);
      if (ft <= f - 0.5 * step * g2) {
        alpha = trial;
        f = ft;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  return {std::move(alpha), std::sqrt(2.0 * f) / ynorm, it};
}

CVec truncated_flow(CVec alpha, const CMat& A, const RVec& y, const PhaseRetrievalOptions& o) {
  if (o.truncation_iters <= 0) return alpha;
  // Fixed step 1 / ||A||_2^2.
  const double L = Eigen::JacobiSVD<CMat>(A).singularValues()[0];
  const double step = 1.0 / (L * L);
  for (int it = 0; it < o.truncation_iters; ++it) {
    CVec z = A * alpha;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      const double mz = std::abs(z[i]);
      z[i] = mz >= y[i] / (1.0 + o.truncation_gamma) && mz > 0.0 ? z[i] * (1.0 - y[i] / mz) : cdouble(0.0);
    }
    alpha -= step * (A.adjoint() * z);
  }
  return alpha;
}

CVec spectral_init(const CMat& A, const RVec& y) {
  const CMat M = A.adjoint() * y.array().square().matrix().asDiagonal() * A;
  Eigen::SelfAdjointEigenSolver<CMat> es(M);
  CVec v = es.eigenvectors().col(M.cols() - 1);
  const double scale = y.norm() / std::max((A * v).norm(), 1e-300);
  return scale * v;
}

CVec flip_degrees(const CVec& a, unsigned mask) {
  const CVec f = wigner_conjugate_flip(a);
  CVec out = a;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if ((mask >> wigner_coefficient_label(static_cast<int>(i)).l) & 1u) out[i] = f[i];
  return out;
}

}  // namespace

DescentResult pr_descend(const CVec& init, const CMat& A, const RVec& y, const PhaseRetrievalOptions& options) {
  if (init.size() != A.cols() || y.size() != A.rows()) throw DomainError("phase retrieval dimensions do not match");
  const double ynorm = y.norm();
  if (ynorm == 0.0) return {CVec::Zero(A.cols()), 0.0, 0};
  return descend(init, A, y, options, ynorm);
}

PhaseRetrievalResult phase_retrieve(const RVec& y, const CMat& A, const PhaseRetrievalOptions& options) {
  if (y.size() != A.rows()) throw DomainError("measurement count does not match the Wigner matrix");
  if ((y.array() < 0.0).any()) throw DomainError("phaseless measurements must be non-negative");
  const double ynorm = y.norm();
  PhaseRetrievalResult out{CVec::Zero(A.cols()), 0.0, true, 0, {}};
  if (ynorm == 0.0) return out;

  out.residual = std::numeric_limits<double>::infinity();
  out.converged = false;
  for (int r = 0; r < std::max(1, options.restarts); ++r) {
    CVec init;
    if (r == 0) {
      init = spectral_init(A, y);
    } else {
      RandomStream rng(options.seed, {stream_tag("pr-restart"), static_cast<std::uint64_t>(r)});
      init.resize(A.cols());
      for (Eigen::Index i = 0; i < init.size(); ++i) init[i] = rng.complex_normal(1.0);
      init *= ynorm / std::max((A * init).norm(), 1e-300);
    }
    DescentResult d = descend(truncated_flow(std::move(init), A, y, options), A, y, options, ynorm);
    const int degrees = wigner_coefficient_label(static_cast<int>(A.cols()) - 1).l + 1;
    const unsigned masks = degrees < 31 ? (1u << degrees) - 1u : 0u;
    for (int hop = 0; hop < options.flip_hops && d.residual > options.tol; ++hop) {
      bool improved = false;
      for (unsigned m = 1; m < masks; ++m) {
        DescentResult e = descend(flip_degrees(d.alpha, m), A, y, options, ynorm);
        e.iterations += d.iterations;
        if (e.residual < 0.999 * d.residual) {
          d = std::move(e);
          improved = true;
        }
      }
      if (!improved) break;
    }
    const bool ok = d.residual <= options.tol;
    out.log.push_back({r, d.residual, d.iterations, ok});
    if (d.residual < out.residual) {
      out.residual = d.residual;
      out.alpha = std::move(d.alpha);
      out.best_restart = r;
      out.converged = ok;
    }
    if (ok && options.stop_on_success) break;
  }
  return out;
}

double relative_error_up_to_phase(const CVec& alpha_hat, const CVec& alpha) {
  const double an = alpha.norm();
  if (!(an > 0.0)) throw DomainError("reference coefficients are zero");
  const cdouble c = alpha_hat.dot(alpha);  // alpha_hat^H alpha
  const cdouble ph = std::abs(c) > 0.0 ? c / std::abs(c) : cdouble(1.0);
  return (alpha_hat * ph - alpha).norm() / an;
}

CVec wigner_conjugate_flip(const CVec& alpha) {
  CVec out(alpha.size());
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    const WignerIndex w = wigner_coefficient_label(static_cast<int>(i));
    const double sign = ((w.k - w.n) % 2 == 0) ? 1.0 : -1.0;
    out[i] = sign * std::conj(alpha[wigner_coefficient_index(w.l, -w.k, -w.n)]);
  }
  return out;
}

double relative_error_up_to_ambiguity(const CVec& alpha_hat, const CVec& alpha) {
  return std::min(relative_error_up_to_phase(alpha_hat, alpha),
                  relative_error_up_to_phase(wigner_conjugate_flip(alpha_hat), alpha));
}

}  // namespace nfkit
