#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "driftlab/errors.hpp"

namespace driftlab {

// --- Spectral densities -----------------------------------------------------

// Edge of the Kesten-McKay spectrum: 2 sqrt(k-1).
inline double kesten_mckay_edge(int k) { return 2.0 * std::sqrt(k - 1.0); }

// Kesten-McKay density of the limiting spectrum of random k-regular graph
// adjacency matrices:
//   p(nu) = (k / 2pi) sqrt(4(k-1) - nu^2) / (k^2 - nu^2)  on |nu| <= 2 sqrt(k-1).
inline double kesten_mckay_pdf(double nu, int k) {
  if (k < 3) throw config_error("kesten_mckay_pdf requires k >= 3");
  const double support = 4.0 * (k - 1.0) - nu * nu;
  if (support <= 0.0) return 0.0;
  constexpr double kPi = 3.141592653589793238462643383279502884;
  return (k / (2.0 * kPi)) * std::sqrt(support) / (static_cast<double>(k) * k - nu * nu);
}

// Semicircle density with second moment alpha (radius 2 sqrt(alpha)).
inline double semicircle_pdf(double nu, double alpha) {
  if (!(alpha > 0.0)) throw config_error("semicircle_pdf requires alpha > 0");
  const double r2 = 4.0 * alpha;
  const double support = r2 - nu * nu;
  if (support <= 0.0) return 0.0;
  constexpr double kPi = 3.141592653589793238462643383279502884;
  return 2.0 / (kPi * r2) * std::sqrt(support);
}

// --- Stieltjes transform of the Kesten-McKay law ------------------------------

// G(k, z) = int dmu(nu) / (z - nu) on the real branch z >= 2 sqrt(k-1),
// evaluated in the rationalized form
//   G(k, z) = 2 (k-1) / (k sqrt(z^2 - 4(k-1)) + (k-2) z),
// which is finite through the removable point z = k and carries no
// cancellation at the spectral edge.
inline double stieltjes_g(int k, double z) {
  if (k < 3) throw config_error("stieltjes_g requires k >= 3");
  const double edge = kesten_mckay_edge(k);
  if (z < edge * (1.0 - 1e-12)) {
    throw numeric_error("stieltjes_g: z is inside the spectrum support (complex branch)");
  }
  const double gap = std::max(0.0, z - edge);
  const double w = std::sqrt(gap * (z + edge));  // sqrt(z^2 - edge^2) without cancellation
  return 2.0 * (k - 1.0) / (k * w + (k - 2.0) * z);
}

// --- Variance-rate denominators ----------------------------------------------

// Large-p limit of (1/p) { Tr E(-A) - Tr (E(-A^{-1}))^{-1} } for the sparse
// ensemble: rho + 2 a sqrt(k-1) - a / G(k, rho/a + 2 sqrt(k-1)), evaluated in
// the rationalized form 2 a k / (z + sqrt((z - e)(z + e))), e = 2 sqrt(k-1),
// which is exact at both the rho -> 0 and rho -> infinity extremes.
inline double variance_rate_sparse(double a_min, int k, double rho) {
  if (!(a_min > 0.0)) throw config_error("variance_rate_sparse requires a_min > 0");
  if (rho < 0.0) throw config_error("variance_rate_sparse requires rho >= 0");
  if (k < 3) throw config_error("variance_rate_sparse requires k >= 3");
  const double edge = kesten_mckay_edge(k);
  const double rho_a = rho / a_min;
  const double z = rho_a + edge;
  const double w = std::sqrt(rho_a * (rho_a + 2.0 * edge));  // sqrt(z^2 - edge^2)
  return 2.0 * a_min * k / (z + w);
}

// Large-p limit of E (1/p) Tr (-A)^{-1} for the dense ensemble:
//   C(alpha, rho) = (2 sqrt(alpha) + rho - sqrt(rho (4 sqrt(alpha) + rho))) / (2 alpha)
// in the rationalized form 2 / (2 sqrt(alpha) + rho + sqrt(rho (rho + 4 sqrt(alpha)))).
inline double resolvent_mean_dense(double alpha, double rho) {
  if (!(alpha > 0.0)) throw config_error("resolvent_mean_dense requires alpha > 0");
  if (rho < 0.0) throw config_error("resolvent_mean_dense requires rho >= 0");
  const double s = std::sqrt(alpha);
  return 2.0 / (2.0 * s + rho + std::sqrt(rho * (rho + 4.0 * s)));
}

// Dense analog of variance_rate_sparse:
//   rho + 2 sqrt(alpha) - 1 / C(alpha, rho), alpha = a_min^2 / 2,
// rationalized to 2 alpha / (rho + 2 sqrt(alpha) + sqrt(rho (rho + 4 sqrt(alpha)))).
inline double variance_rate_dense(double a_min, double rho) {
  if (!(a_min > 0.0)) throw config_error("variance_rate_dense requires a_min > 0");
  if (rho < 0.0) throw config_error("variance_rate_dense requires rho >= 0");
  const double alpha = 0.5 * a_min * a_min;
  const double s = std::sqrt(alpha);
  return 2.0 * alpha / (rho + 2.0 * s + std::sqrt(rho * (rho + 4.0 * s)));
}

// --- Observation-time lower bounds --------------------------------------------

enum class BoundRegime { kSparse, kDense, kNonlinear, kGeneric };

inline const char* to_string(BoundRegime r) {
  switch (r) {
    case BoundRegime::kSparse: return "sparse";
    case BoundRegime::kDense: return "dense";
    case BoundRegime::kNonlinear: return "nonlinear";
    case BoundRegime::kGeneric: return "generic";
  }
  return "generic";
}

inline BoundRegime bound_regime_from_string(const std::string& s) {
  if (s == "sparse") return BoundRegime::kSparse;
  if (s == "dense") return BoundRegime::kDense;
  if (s == "nonlinear") return BoundRegime::kNonlinear;
  if (s == "generic") return BoundRegime::kGeneric;
  throw config_error("unknown bound regime: " + s);
}

// Per-dimension decomposition of an observation-time lower bound,
//   t_min = max(0, (entropy - 2 mi_x0) / variance_rate).
struct BoundReport {
  BoundRegime regime = BoundRegime::kGeneric;
  double entropy_per_p = 0.0;
  double mi_x0_per_p = 0.0;
  double variance_rate_per_p = 0.0;
  double t_min = 0.0;
  bool vacuous = false;  // numerator was <= 0: the bound carries no information
};

inline BoundReport general_bound(double entropy_per_p, double mi_x0_per_p,
                                 double variance_rate_per_p,
                                 BoundRegime regime = BoundRegime::kGeneric) {
  if (!(variance_rate_per_p > 0.0)) {
    throw config_error("variance rate must be positive");
  }
  BoundReport report;
  report.regime = regime;
  report.entropy_per_p = entropy_per_p;
  report.mi_x0_per_p = mi_x0_per_p;
  report.variance_rate_per_p = variance_rate_per_p;
  const double numerator = entropy_per_p - 2.0 * mi_x0_per_p;
  report.vacuous = numerator <= 0.0;
  report.t_min = std::max(0.0, numerator / variance_rate_per_p);
  return report;
}

// Sparse regime: per-p signed-support entropy k log(2p/k), initial-state
// information capped at 1 per dimension, sparse variance rate.
inline BoundReport lower_bound_sparse(int p, int k, double a_min, double rho) {
  if (p <= k) throw config_error("lower_bound_sparse requires p > k");
  return general_bound(k * std::log(2.0 * p / k), 1.0,
                       variance_rate_sparse(a_min, k, rho), BoundRegime::kSparse);
}

// Dense regime: per-p entropy ((1+p)/4) log 4 with the same unit cap on the
// initial-state information.
inline BoundReport lower_bound_dense(int p, double a_min, double rho) {
  if (p < 2) throw config_error("lower_bound_dense requires p >= 2");
  return general_bound(0.25 * (1.0 + p) * std::log(4.0), 1.0,
                       variance_rate_dense(a_min, rho), BoundRegime::kDense);
}

// Nonlinear drift class parameters: row sparsity k of the Jacobian support,
// per-coordinate stationary variance bound B, covariance eigenvalue floor L,
// Lipschitz bound D on the partials, and the drift-at-mean constant.
struct NonlinearClassParams {
  int p = 0;
  int k = 1;
  double var_bound_b = 1.0;
  double cov_floor_l = 1.0;
  double lipschitz_d = 0.0;
  double drift_at_mean_c = 0.0;

  void validate() const {
    if (k < 1) throw config_error("nonlinear class requires k >= 1");
    if (p <= k) throw config_error("nonlinear class requires p > k");
    if (!(var_bound_b > 0.0)) throw config_error("variance bound B must be > 0");
    if (!(cov_floor_l > 0.0)) throw config_error("covariance floor L must be > 0");
    if (lipschitz_d < 0.0) throw config_error("Lipschitz bound D must be >= 0");
    if (drift_at_mean_c < 0.0) throw config_error("drift-at-mean constant must be >= 0");
  }
};

// t_min = (k log(p/k) - log(B/L)) / (C + 2 k^2 D^2 B); the mi slot holds the
// Gaussian bound (1/2) log(B/L) so the generic numerator matches exactly.
inline BoundReport lower_bound_nonlinear(const NonlinearClassParams& params) {
  params.validate();
  const double entropy = params.k * std::log(static_cast<double>(params.p) / params.k);
  const double mi = 0.5 * std::log(params.var_bound_b / params.cov_floor_l);
  const double rate = params.drift_at_mean_c + 2.0 * params.k * params.k *
                                                   params.lipschitz_d * params.lipschitz_d *
                                                   params.var_bound_b;
  if (!(rate > 0.0)) throw config_error("nonlinear bound denominator must be positive");
  return general_bound(entropy, mi, rate, BoundRegime::kNonlinear);
}

// --- Information chain diagnostic ---------------------------------------------

// Supremum of 2 sqrt(z G(k, z)) over a log-spaced grid just inside
// [2 sqrt(k-1), 1e3]. The analytic supremum sits at the spectral edge.
inline double mi_chain_supremum(int k, int grid_points = 1000) {
  if (k < 3) throw config_error("mi_chain_supremum requires k >= 3");
  const double z_lo = kesten_mckay_edge(k) * (1.0 + 1e-9);
  const double z_hi = 1e3;
  const double log_lo = std::log(z_lo);
  const double log_hi = std::log(z_hi);
  double sup = 0.0;
  for (int i = 0; i < grid_points; ++i) {
    const double t = grid_points == 1 ? 0.0 : static_cast<double>(i) / (grid_points - 1);
    const double z = std::exp(log_lo + t * (log_hi - log_lo));
    sup = std::max(sup, 2.0 * std::sqrt(z * stieltjes_g(k, z)));
  }
  return sup;
}

// Closed-form cap sqrt(8) sqrt((k-1)/(k-2)) on the same quantity; equals 4 at k = 3.
inline double mi_chain_bound(int k) {
  if (k < 3) throw config_error("mi_chain_bound requires k >= 3");
  return std::sqrt(8.0) * std::sqrt((k - 1.0) / (k - 2.0));
}

}  // namespace driftlab
