// Test-only oracles, independent of the library code paths they check:
// finite differences, quadrature compositions, closed-form references.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "driftlab/quadrature.hpp"
#include "driftlab/spectral_bounds.hpp"

namespace oracles {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Elastic potential U(q) = (1/2) sum_{i<j} C_ij (|q_i - q_j| - D_ij)^2,
// evaluated directly for finite-difference gradient checks.
inline double spring_potential(const VectorXd& q, const MatrixXd& adjacency,
                               const MatrixXd& rest_length, int d) {
  const int p = static_cast<int>(adjacency.rows());
  double u = 0.0;
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) {
      if (adjacency(i, j) == 0.0) continue;
      double norm2 = 0.0;
      for (int a = 0; a < d; ++a) {
        const double delta = q[i * d + a] - q[j * d + a];
        norm2 += delta * delta;
      }
      const double stretch = std::sqrt(norm2) - rest_length(i, j);
      u += 0.5 * adjacency(i, j) * stretch * stretch;
    }
  }
  return u;
}

// Central finite-difference gradient of the elastic potential.
inline VectorXd spring_grad_fd(const VectorXd& q, const MatrixXd& adjacency,
                               const MatrixXd& rest_length, int d, double step = 1e-5) {
  VectorXd grad(q.size());
  VectorXd probe = q;
  for (int i = 0; i < q.size(); ++i) {
    probe[i] = q[i] + step;
    const double up = spring_potential(probe, adjacency, rest_length, d);
    probe[i] = q[i] - step;
    const double down = spring_potential(probe, adjacency, rest_length, d);
    probe[i] = q[i];
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

// Quadrature of the Kesten-McKay density against an arbitrary function, with
// the square-root edge substitution.
template <class F>
double kesten_mckay_expect(int k, const F& f, double tol = 1e-10) {
  const double edge = driftlab::kesten_mckay_edge(k);
  return driftlab::integrate_sqrt_edges(
      [&](double nu) { return f(nu) * driftlab::kesten_mckay_pdf(nu, k); }, -edge, edge, tol);
}

// Same against the semicircle density with second moment alpha.
template <class F>
double semicircle_expect(double alpha, const F& f, double tol = 1e-10) {
  const double edge = 2.0 * std::sqrt(alpha);
  return driftlab::integrate_sqrt_edges(
      [&](double nu) { return f(nu) * driftlab::semicircle_pdf(nu, alpha); }, -edge, edge, tol);
}

// Ordinary least squares for the increments regression: rows of the returned
// matrix solve  min_a sum_t (y_t - eta <a, f_t>)^2  per target column.
inline MatrixXd ols_drift(const MatrixXd& features, const MatrixXd& targets, double eta) {
  const MatrixXd gram = features.transpose() * features * eta;
  const MatrixXd cross = features.transpose() * targets;
  return gram.ldlt().solve(cross).transpose();
}

// Mutual information between a symmetric two-point drift +/- mu and the
// terminal state x_T ~ N(+/- mu T, T), by quadrature of the mixture entropy.
// For constant drifts the terminal state is sufficient, so this equals the
// path mutual information.
inline double two_point_gaussian_mi(double mu, double t_total, double tol = 1e-12) {
  const double sd = std::sqrt(t_total);
  const double m = mu * t_total;
  auto density = [&](double y) {
    const double a = (y - m) / sd;
    const double b = (y + m) / sd;
    return 0.5 * (std::exp(-0.5 * a * a) + std::exp(-0.5 * b * b)) /
           (sd * std::sqrt(2.0 * M_PI));
  };
  const double lo = -m - 12.0 * sd;
  const double hi = m + 12.0 * sd;
  const double h_mix = driftlab::integrate(
      [&](double y) {
        const double p = density(y);
        return p > 0.0 ? -p * std::log(p) : 0.0;
      },
      lo, hi, tol);
  const double h_cond = 0.5 * std::log(2.0 * M_PI * M_E * t_total);
  return h_mix - h_cond;
}

// Largest monotonicity violation max_{t1 < t2} (rate[t1] - rate[t2]).
inline double isotonic_violation(const std::vector<double>& rates) {
  double worst = 0.0;
  double running_max = -1.0;
  for (const double r : rates) {
    if (running_max > r) worst = std::max(worst, running_max - r);
    running_max = std::max(running_max, r);
  }
  return worst;
}

}  // namespace oracles
