#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "driftlab/drift_model.hpp"
#include "driftlab/rng.hpp"

namespace driftlab {

// Random symmetric matrix class with k nonzero off-diagonal couplings of
// magnitude a_min per row and stability margin rho.
struct SparseEnsembleSpec {
  int p = 0;
  int k = 3;
  double a_min = 1.0;
  double rho = 0.5;

  void validate() const {
    if (k < 3) throw config_error("sparse ensemble requires row degree k >= 3");
    if (k >= p) throw config_error("sparse ensemble requires k < p");
    if ((static_cast<long>(p) * k) % 2 != 0) {
      throw config_error("p * k must be even for a k-regular graph to exist");
    }
    if (!(a_min > 0.0)) throw config_error("minimum coupling must be > 0");
    if (!(rho > 0.0)) throw config_error("stability margin must be > 0");
  }
};

// Random symmetric matrix class with i.i.d. entries of magnitude a_min/sqrt(p)
// present with probability 1/2, and stability margin rho.
struct DenseEnsembleSpec {
  int p = 0;
  double a_min = 1.0;
  double rho = 0.5;

  double alpha() const { return 0.5 * a_min * a_min; }  // entry second moment

  void validate() const {
    if (p < 2) throw config_error("dense ensemble requires p >= 2");
    if (!(a_min > 0.0)) throw config_error("minimum coupling must be > 0");
    if (!(rho > 0.0)) throw config_error("stability margin must be > 0");
  }
};

// Uniform random k-regular simple graph via the pairing model, with each
// edge's sign flipped to -1 with probability 1/2 (symmetrically). Entries are
// in {-1, 0, +1} with zero diagonal.
inline MatrixXd random_regular_signed(int p, int k, std::uint64_t seed,
                                      int max_attempts = 1000) {
  if (k < 1 || k >= p) throw config_error("k-regular graph requires 1 <= k < p");
  if ((static_cast<long>(p) * k) % 2 != 0) throw config_error("p * k must be even");
  Rng rng(seed);
  std::vector<int> stubs(static_cast<std::size_t>(p) * k);
  for (int v = 0; v < p; ++v) {
    for (int s = 0; s < k; ++s) stubs[static_cast<std::size_t>(v) * k + s] = v;
  }
  MatrixXd adj(p, p);
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    rng.shuffle(stubs);
    adj.setZero();
    bool simple = true;
    for (std::size_t e = 0; e + 1 < stubs.size(); e += 2) {
      const int u = stubs[e];
      const int v = stubs[e + 1];
      if (u == v || adj(u, v) != 0.0) {
        simple = false;
        break;
      }
      adj(u, v) = 1.0;
      adj(v, u) = 1.0;
    }
    if (!simple) continue;
    for (int i = 0; i < p; ++i) {
      for (int j = i + 1; j < p; ++j) {
        if (adj(i, j) != 0.0 && rng.uniform() < 0.5) {
          adj(i, j) = -1.0;
          adj(j, i) = -1.0;
        }
      }
    }
    return adj;
  }
  throw numeric_error("pairing model: retry budget exhausted for (p=" +
                      std::to_string(p) + ", k=" + std::to_string(k) + ")");
}

namespace detail {

// Smallest nonnegative diagonal shift placing lambda_min(-A) at rho, where
// A = -(gamma + edge) I + coupling and lam_max is the top eigenvalue of the
// coupling. Floored at 1e-12 to keep the shift strictly positive.
inline double minimal_gamma_shift(double lam_max, double edge, double rho) {
  return std::max(1e-12, lam_max - edge + rho);
}

}  // namespace detail

inline InteractionMatrix sparse_ensemble_sample(const SparseEnsembleSpec& spec,
                                                std::uint64_t seed) {
  spec.validate();
  const MatrixXd tilde = random_regular_signed(spec.p, spec.k, seed);
  const double edge = 2.0 * spec.a_min * std::sqrt(spec.k - 1.0);
  MatrixXd coupling = spec.a_min * tilde;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(coupling, Eigen::EigenvaluesOnly);
  const double gamma = detail::minimal_gamma_shift(es.eigenvalues().maxCoeff(), edge, spec.rho);
  coupling.diagonal().array() -= gamma + edge;
  return InteractionMatrix{std::move(coupling), spec.rho};
}

inline InteractionMatrix dense_ensemble_sample(const DenseEnsembleSpec& spec,
                                               std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  MatrixXd tilde(spec.p, spec.p);
  for (int i = 0; i < spec.p; ++i) {
    for (int j = i; j < spec.p; ++j) {
      const double u = rng.uniform();
      const double v = u < 0.25 ? spec.a_min : (u < 0.5 ? -spec.a_min : 0.0);
      tilde(i, j) = v;
      tilde(j, i) = v;
    }
  }
  const double edge = 2.0 * std::sqrt(spec.alpha());
  MatrixXd scaled = tilde / std::sqrt(static_cast<double>(spec.p));
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(scaled, Eigen::EigenvaluesOnly);
  const double gamma = detail::minimal_gamma_shift(es.eigenvalues().maxCoeff(), edge, spec.rho);
  scaled.diagonal().array() -= gamma + edge;
  return InteractionMatrix{std::move(scaled), spec.rho};
}

// Checks the defining conditions of the sparse class: exactly k off-diagonal
// couplings per row, all of magnitude >= a_min (the stabilizing diagonal is
// not counted), and stability margin >= rho.
inline bool is_sparse_class_member(const InteractionMatrix& m, const SparseEnsembleSpec& spec,
                                   double tol = 1e-9) {
  const MatrixXd& a = m.entries;
  if (a.rows() != spec.p) return false;
  for (int i = 0; i < spec.p; ++i) {
    int support = 0;
    for (int j = 0; j < spec.p; ++j) {
      if (i == j) continue;
      if (a(i, j) != 0.0) {
        ++support;
        if (std::abs(a(i, j)) < spec.a_min - tol) return false;
      }
    }
    if (support != spec.k) return false;
  }
  return stability_margin(a) >= spec.rho - tol;
}

// Dense-class conditions with a_max = a_min: every nonzero off-diagonal entry
// has magnitude a_min/sqrt(p), and the stability margin is >= rho.
inline bool is_dense_class_member(const InteractionMatrix& m, const DenseEnsembleSpec& spec,
                                  double tol = 1e-9) {
  const MatrixXd& a = m.entries;
  if (a.rows() != spec.p) return false;
  const double scale = std::sqrt(static_cast<double>(spec.p));
  for (int i = 0; i < spec.p; ++i) {
    for (int j = 0; j < spec.p; ++j) {
      if (i == j || a(i, j) == 0.0) continue;
      if (std::abs(std::abs(a(i, j)) * scale - spec.a_min) > tol) return false;
    }
  }
  return stability_margin(a) >= spec.rho - tol;
}

enum class GridTopology { kGrid, kGridWithDiagonals, kExplicit };

inline const char* to_string(GridTopology t) {
  switch (t) {
    case GridTopology::kGrid: return "grid";
    case GridTopology::kGridWithDiagonals: return "grid-with-diagonals";
    case GridTopology::kExplicit: return "explicit";
  }
  return "grid";
}

inline GridTopology grid_topology_from_string(const std::string& s) {
  if (s == "grid") return GridTopology::kGrid;
  if (s == "grid-with-diagonals") return GridTopology::kGridWithDiagonals;
  if (s == "explicit") return GridTopology::kExplicit;
  throw config_error("unknown topology: " + s);
}

struct NetworkSpec {
  int rows = 3;
  int cols = 3;
  GridTopology topology = GridTopology::kGrid;
  std::vector<std::pair<int, int>> edges;  // used when topology is kExplicit
  double rest_length = 1.0;
  double gamma_damp = 2.0;
  double sigma = 0.5;
  int spatial_dim = 2;

  int mass_count() const { return rows * cols; }
};

struct MassSpringNetwork {
  MassSpringDrift drift;
  VectorXd rest_state;  // masses on the integer grid scaled by rest_length, zero velocity
  int edge_count = 0;
};

// Builds the elastic network for a rows x cols grid of masses. The seed is
// consumed only by randomized topologies; the built-in ones are deterministic.
inline MassSpringNetwork mass_spring_network(const NetworkSpec& spec, std::uint64_t seed) {
  (void)seed;
  const int p = spec.mass_count();
  if (spec.rows < 1 || spec.cols < 1 || p < 2) throw config_error("grid must hold >= 2 masses");
  if (!(spec.rest_length > 0.0)) throw config_error("rest length must be > 0");
  if (spec.spatial_dim < 2 && spec.rows > 1 && spec.cols > 1) {
    throw config_error("a 2-d grid needs spatial dimension >= 2");
  }

  std::vector<std::pair<int, int>> edges;
  const auto vertex = [&](int r, int c) { return r * spec.cols + c; };
  if (spec.topology == GridTopology::kExplicit) {
    edges = spec.edges;
    if (edges.empty()) throw config_error("explicit topology requires an edge list");
    for (auto& [u, v] : edges) {
      if (u < 0 || v < 0 || u >= p || v >= p || u == v) {
        throw config_error("explicit edge list has an invalid edge");
      }
    }
  } else {
    for (int r = 0; r < spec.rows; ++r) {
      for (int c = 0; c < spec.cols; ++c) {
        if (c + 1 < spec.cols) edges.emplace_back(vertex(r, c), vertex(r, c + 1));
        if (r + 1 < spec.rows) edges.emplace_back(vertex(r, c), vertex(r + 1, c));
        if (spec.topology == GridTopology::kGridWithDiagonals && r + 1 < spec.rows) {
          if (c + 1 < spec.cols) edges.emplace_back(vertex(r, c), vertex(r + 1, c + 1));
          if (c > 0) edges.emplace_back(vertex(r, c), vertex(r + 1, c - 1));
        }
      }
    }
  }

  MassSpringDrift drift;
  drift.adjacency = MatrixXd::Zero(p, p);
  drift.rest_length = MatrixXd::Zero(p, p);
  drift.gamma_damp = spec.gamma_damp;
  drift.sigma = spec.sigma;
  drift.spatial_dim = spec.spatial_dim;
  int count = 0;
  for (const auto& [u, v] : edges) {
    if (drift.adjacency(u, v) != 0.0) continue;  // duplicate in an explicit list
    drift.adjacency(u, v) = 1.0;
    drift.adjacency(v, u) = 1.0;
    drift.rest_length(u, v) = spec.rest_length;
    drift.rest_length(v, u) = spec.rest_length;
    ++count;
  }
  drift.validate();

  // Connectivity check (breadth-first from vertex 0).
  std::vector<char> seen(p, 0);
  std::queue<int> queue;
  queue.push(0);
  seen[0] = 1;
  int reached = 1;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop();
    for (int v = 0; v < p; ++v) {
      if (drift.adjacency(u, v) != 0.0 && !seen[v]) {
        seen[v] = 1;
        ++reached;
        queue.push(v);
      }
    }
  }
  if (reached != p) throw config_error("network is disconnected");

  const int d = spec.spatial_dim;
  VectorXd rest = VectorXd::Zero(2 * p * d);
  for (int r = 0; r < spec.rows; ++r) {
    for (int c = 0; c < spec.cols; ++c) {
      const int m = vertex(r, c);
      if (d == 1) {
        rest[m] = spec.rest_length * (r * spec.cols + c);
      } else {
        rest[m * d + 0] = spec.rest_length * c;
        rest[m * d + 1] = spec.rest_length * r;
      }
    }
  }
  return MassSpringNetwork{std::move(drift), std::move(rest), count};
}

}  // namespace driftlab
