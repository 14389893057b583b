#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "driftlab/errors.hpp"

namespace driftlab {

using Eigen::MatrixXd;
using Eigen::MatrixXi;
using Eigen::VectorXd;
using Eigen::VectorXi;

// Smallest eigenvalue of -(A + A^T)/2: the dissipativity margin of a drift
// matrix. Positive margin implies a unique stationary law.
inline double stability_margin(const MatrixXd& a) {
  const MatrixXd sym = -0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// Square real drift matrix, optionally carrying a claimed stability margin
// lambda_min(-(A+A^T)/2) >= rho.
struct InteractionMatrix {
  MatrixXd entries;
  std::optional<double> rho;

  int dim() const { return static_cast<int>(entries.rows()); }

  void validate(double margin_slack = 1e-9) const {
    if (entries.rows() != entries.cols()) {
      throw config_error("interaction matrix must be square");
    }
    if (!entries.allFinite()) {
      throw config_error("interaction matrix has non-finite entries");
    }
    if (rho) {
      if (*rho < 0.0) throw config_error("stability margin must be >= 0");
      if (stability_margin(entries) < *rho - margin_slack) {
        throw config_error("matrix violates its claimed stability margin");
      }
    }
  }
};

// A finite catalog of scalar functions of the state, evaluated jointly.
struct Basis {
  std::string name;
  int input_dim = 0;
  std::vector<std::string> labels;
  std::function<void(const VectorXd&, VectorXd&)> eval_into;

  int size() const { return static_cast<int>(labels.size()); }

  VectorXd operator()(const VectorXd& x) const {
    VectorXd out(size());
    eval_into(x, out);
    return out;
  }
};

inline Basis constant_basis(int input_dim) {
  Basis b;
  b.name = "constant";
  b.input_dim = input_dim;
  b.labels = {"1"};
  b.eval_into = [](const VectorXd&, VectorXd& out) { out[0] = 1.0; };
  return b;
}

// Column layout of the elastic-network feature catalog: all velocity
// components, then displacement vectors delta_ij = q_i - q_j over unordered
// pairs i < j, then their unit vectors.
struct MassSpringBasisLayout {
  int p = 0;
  int d = 0;

  int pair_count() const { return p * (p - 1) / 2; }
  int size() const { return p * d + 2 * pair_count() * d; }
  int velocity_col(int i, int a) const { return i * d + a; }
  int pair_index(int i, int j) const {  // requires i < j
    return i * p - i * (i + 1) / 2 + (j - i - 1);
  }
  int delta_col(int pair, int a) const { return p * d + pair * d + a; }
  int unit_col(int pair, int a) const { return p * d + pair_count() * d + pair * d + a; }
};

// State convention for elastic networks: x = [q, v], positions before
// velocities, each a flat block of p*d coordinates.
inline Basis mass_spring_basis(int p, int d) {
  if (p < 2 || d < 1) throw config_error("mass-spring basis needs p >= 2, d >= 1");
  MassSpringBasisLayout lay{p, d};
  Basis b;
  b.name = "mass-spring";
  b.input_dim = 2 * p * d;
  b.labels.resize(lay.size());
  for (int i = 0; i < p; ++i) {
    for (int a = 0; a < d; ++a) {
      b.labels[lay.velocity_col(i, a)] =
          "v[" + std::to_string(i) + "]." + std::to_string(a);
    }
  }
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) {
      const int pr = lay.pair_index(i, j);
      const std::string ij = "[" + std::to_string(i) + "," + std::to_string(j) + "].";
      for (int a = 0; a < d; ++a) {
        b.labels[lay.delta_col(pr, a)] = "delta" + ij + std::to_string(a);
        b.labels[lay.unit_col(pr, a)] = "unit" + ij + std::to_string(a);
      }
    }
  }
  b.eval_into = [lay](const VectorXd& x, VectorXd& out) {
    const int pd = lay.p * lay.d;
    out.segment(0, pd) = x.segment(pd, pd);  // velocities
    for (int i = 0; i < lay.p; ++i) {
      for (int j = i + 1; j < lay.p; ++j) {
        const int pr = lay.pair_index(i, j);
        double norm2 = 0.0;
        for (int a = 0; a < lay.d; ++a) {
          const double delta = x[i * lay.d + a] - x[j * lay.d + a];
          out[lay.delta_col(pr, a)] = delta;
          norm2 += delta * delta;
        }
        const double norm = std::sqrt(norm2);
        if (norm == 0.0) {
          throw numeric_error("coincident masses " + std::to_string(i) + "," +
                              std::to_string(j) + ": unit displacement undefined");
        }
        for (int a = 0; a < lay.d; ++a) {
          out[lay.unit_col(pr, a)] = out[lay.delta_col(pr, a)] / norm;
        }
      }
    }
  };
  return b;
}

// Damped elastic network of unit masses and unit spring constants.
struct MassSpringDrift {
  MatrixXd adjacency;    // symmetric 0/1 with zero diagonal
  MatrixXd rest_length;  // positive wherever adjacency is nonzero
  double gamma_damp = 0.0;
  double sigma = 1.0;  // noise amplitude on velocity coordinates
  int spatial_dim = 2;

  int mass_count() const { return static_cast<int>(adjacency.rows()); }
  int state_dim() const { return 2 * mass_count() * spatial_dim; }

  void validate() const {
    const int p = mass_count();
    if (adjacency.cols() != p || rest_length.rows() != p || rest_length.cols() != p) {
      throw config_error("adjacency and rest-length matrices must be p x p");
    }
    if (spatial_dim < 1) throw config_error("spatial dimension must be >= 1");
    if (gamma_damp < 0.0) throw config_error("damping coefficient must be >= 0");
    if (!(sigma > 0.0)) throw config_error("noise amplitude must be > 0");
    for (int i = 0; i < p; ++i) {
      if (adjacency(i, i) != 0.0) throw config_error("adjacency diagonal must be zero");
      for (int j = 0; j < p; ++j) {
        if (adjacency(i, j) != adjacency(j, i)) {
          throw config_error("adjacency must be symmetric");
        }
        if (adjacency(i, j) != 0.0 && !(rest_length(i, j) > 0.0)) {
          throw config_error("rest length must be positive on every spring");
        }
      }
    }
  }
};

// Force field of the elastic network: returns [v, -gamma v - grad U(q)] with
//   U(q) = (1/2) sum_{springs (i,j)} C_ij (|q_i - q_j| - D_ij)^2,
//   grad_{q_i} U = sum_j C_ij (1 - D_ij/|delta_ij|) delta_ij.
inline VectorXd mass_spring_drift(const VectorXd& positions, const VectorXd& velocities,
                                  const MatrixXd& adjacency, const MatrixXd& rest_length,
                                  double gamma_damp, int spatial_dim) {
  const int p = static_cast<int>(adjacency.rows());
  const int d = spatial_dim;
  if (positions.size() != p * d || velocities.size() != p * d) {
    throw config_error("position/velocity size does not match p * d");
  }
  VectorXd grad = VectorXd::Zero(p * d);
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) {
      const double c = adjacency(i, j);
      if (c == 0.0) continue;
      double norm2 = 0.0;
      for (int a = 0; a < d; ++a) {
        const double delta = positions[i * d + a] - positions[j * d + a];
        norm2 += delta * delta;
      }
      const double norm = std::sqrt(norm2);
      if (norm == 0.0) {
        throw numeric_error("coincident connected masses " + std::to_string(i) + "," +
                            std::to_string(j));
      }
      const double coef = c * (1.0 - rest_length(i, j) / norm);
      for (int a = 0; a < d; ++a) {
        const double delta = positions[i * d + a] - positions[j * d + a];
        grad[i * d + a] += coef * delta;
        grad[j * d + a] -= coef * delta;
      }
    }
  }
  VectorXd out(2 * p * d);
  out.head(p * d) = velocities;
  out.tail(p * d) = -gamma_damp * velocities - grad;
  return out;
}

struct LinearDrift {
  InteractionMatrix matrix;
};

// drift(x) = coefficients * basis(x)
struct BasisDrift {
  MatrixXd coefficients;
  Basis basis;
};

using DriftModel = std::variant<LinearDrift, BasisDrift, MassSpringDrift>;

inline int state_dim(const DriftModel& model) {
  return std::visit(
      [](const auto& m) -> int {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearDrift>) {
          return m.matrix.dim();
        } else if constexpr (std::is_same_v<T, BasisDrift>) {
          return m.basis.input_dim;
        } else {
          return m.state_dim();
        }
      },
      model);
}

inline void validate(const DriftModel& model) {
  std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearDrift>) {
          m.matrix.validate();
        } else if constexpr (std::is_same_v<T, BasisDrift>) {
          if (m.coefficients.cols() != m.basis.size()) {
            throw config_error("coefficient columns must match basis size");
          }
          if (!m.coefficients.allFinite()) {
            throw config_error("coefficient matrix has non-finite entries");
          }
          if (m.coefficients.rows() != m.basis.input_dim) {
            throw config_error("basis drift must map the state space to itself");
          }
        } else {
          m.validate();
        }
      },
      model);
}

// Reusable drift evaluation with preallocated scratch, for hot loops.
class DriftEvaluator {
 public:
  explicit DriftEvaluator(const DriftModel& model) : model_(&model) {
    if (const auto* b = std::get_if<BasisDrift>(&model)) {
      scratch_.resize(b->basis.size());
    }
  }

  void operator()(const VectorXd& x, VectorXd& out) {
    if (const auto* lin = std::get_if<LinearDrift>(model_)) {
      out.noalias() = lin->matrix.entries * x;
    } else if (const auto* bas = std::get_if<BasisDrift>(model_)) {
      bas->basis.eval_into(x, scratch_);
      out.noalias() = bas->coefficients * scratch_;
    } else {
      const auto& ms = std::get<MassSpringDrift>(*model_);
      const int pd = ms.mass_count() * ms.spatial_dim;
      out = mass_spring_drift(x.head(pd), x.tail(pd), ms.adjacency, ms.rest_length,
                              ms.gamma_damp, ms.spatial_dim);
    }
  }

 private:
  const DriftModel* model_;
  VectorXd scratch_;
};

inline VectorXd drift(const DriftModel& model, const VectorXd& x) {
  if (x.size() != state_dim(model)) {
    throw config_error("state dimension does not match the model");
  }
  DriftEvaluator eval(model);
  VectorXd out(state_dim(model));
  eval(x, out);
  return out;
}

inline DriftModel make_linear(MatrixXd a, std::optional<double> rho = {}) {
  LinearDrift m{InteractionMatrix{std::move(a), rho}};
  m.matrix.validate();
  return m;
}

// State-independent drift F(x) = value.
inline DriftModel make_constant_drift(const VectorXd& value) {
  BasisDrift m;
  m.basis = constant_basis(static_cast<int>(value.size()));
  m.coefficients = value;
  return m;
}

}  // namespace driftlab
