#pragma once

#include <array>
#include <cmath>

#include "driftlab/errors.hpp"

namespace driftlab {

namespace detail {

// Gauss-Kronrod 7-15 nodes and weights on [-1, 1].
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss-7 weights, aligned with Kronrod nodes 1, 3, 5 and the center node.
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
void gk15(const F& f, double a, double b, double& result, double& err) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double fk = 0.0;
  double fg = 0.0;
  {
    const double v = f(c);
    fk += kKronrodWeights[7] * v;
    fg += kGaussWeights[3] * v;
  }
  for (int i = 0; i < 7; ++i) {
    const double v1 = f(c - h * kKronrodNodes[i]);
    const double v2 = f(c + h * kKronrodNodes[i]);
    fk += kKronrodWeights[i] * (v1 + v2);
    if (i % 2 == 1) fg += kGaussWeights[i / 2] * (v1 + v2);
  }
  result = h * fk;
  err = std::abs(h * (fk - fg));
}

template <class F>
double adapt(const F& f, double a, double b, double tol, int depth, int max_depth) {
  double r = 0.0;
  double e = 0.0;
  gk15(f, a, b, r, e);
  if (e <= tol || depth >= max_depth) {
    if (depth >= max_depth && e > 1e3 * tol) {
      throw numeric_error("adaptive quadrature failed to converge");
    }
    return r;
  }
  const double m = 0.5 * (a + b);
  return adapt(f, a, m, 0.5 * tol, depth + 1, max_depth) +
         adapt(f, m, b, 0.5 * tol, depth + 1, max_depth);
}

}  // namespace detail

// Adaptive Gauss-Kronrod integration of f over [a, b] to absolute tolerance.
template <class F>
double integrate(const F& f, double a, double b, double abs_tol = 1e-10) {
  if (a == b) return 0.0;
  if (a > b) return -integrate(f, b, a, abs_tol);
  return detail::adapt(f, a, b, abs_tol, 0, 48);
}

// Integration for integrands whose derivative blows up like an inverse square
// root at the endpoints (spectral densities vanishing like sqrt at the support
// edge, or resolvents evaluated at the edge). Substitutes x = a + u^2 on the
// left half and x = b - u^2 on the right half, which makes the transformed
// integrands smooth.
template <class F>
double integrate_sqrt_edges(const F& f, double a, double b, double abs_tol = 1e-10) {
  if (a == b) return 0.0;
  if (a > b) return -integrate_sqrt_edges(f, b, a, abs_tol);
  const double m = 0.5 * (a + b);
  auto left = [&](double u) { return 2.0 * u * f(a + u * u); };
  auto right = [&](double u) { return 2.0 * u * f(b - u * u); };
  return integrate(left, 0.0, std::sqrt(m - a), 0.5 * abs_tol) +
         integrate(right, 0.0, std::sqrt(b - m), 0.5 * abs_tol);
}

}  // namespace driftlab
