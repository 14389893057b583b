#pragma once

#include <cmath>
#include <cstdint>
#include <iostream>
#include <string>

#include "driftlab/drift_model.hpp"
#include "driftlab/rng.hpp"

namespace driftlab {

// Uniformly sampled discretized path. Row t of `states` is x_{t*eta};
// row 0 is the initial condition.
struct Trajectory {
  double eta = 0.0;
  std::uint64_t seed = 0;
  MatrixXd states;

  int n_steps() const { return static_cast<int>(states.rows()) - 1; }
  int dim() const { return static_cast<int>(states.cols()); }
  double duration() const { return eta * n_steps(); }
};

inline constexpr double kDivergenceGuard = 1e8;

// Step-size defaults: 0.01/||A||_inf for linear drifts, 0.005 otherwise.
inline double default_eta(const DriftModel& model) {
  if (const auto* lin = std::get_if<LinearDrift>(&model)) {
    const double norm = lin->matrix.entries.cwiseAbs().rowwise().sum().maxCoeff();
    return norm > 0.0 ? 0.01 / norm : 0.01;
  }
  return 0.005;
}

// Streams Euler-Maruyama steps without storing the path:
//   x_{t+1} = x_t + F(x_t) eta + sqrt(eta) xi_t,
// unit Gaussian noise per coordinate; elastic networks get noise with
// amplitude sigma on velocity coordinates only.
class SdeStepper {
 public:
  SdeStepper(const DriftModel& model, VectorXd x0, double eta, std::uint64_t seed)
      : model_(&model),
        eval_(model),
        x_(std::move(x0)),
        drift_(state_dim(model)),
        eta_(eta),
        sqrt_eta_(std::sqrt(eta)),
        rng_(seed) {
    if (!(eta > 0.0)) throw config_error("step size must be positive");
    if (x_.size() != state_dim(model)) {
      throw config_error("initial condition dimension does not match the model");
    }
    if (const auto* ms = std::get_if<MassSpringDrift>(&model)) {
      noise_begin_ = ms->mass_count() * ms->spatial_dim;
      noise_amp_ = ms->sigma;
    } else {
      noise_begin_ = 0;
      noise_amp_ = 1.0;
    }
    check_state();
  }

  const VectorXd& state() const { return x_; }
  long step_index() const { return t_; }

  void step() {
    eval_(x_, drift_);
    x_.noalias() += eta_ * drift_;
    const double amp = noise_amp_ * sqrt_eta_;
    for (int i = noise_begin_; i < x_.size(); ++i) {
      x_[i] += amp * rng_.gaussian();
    }
    ++t_;
    check_state();
  }

 private:
  void check_state() const {
    if (!x_.allFinite() || x_.cwiseAbs().maxCoeff() > kDivergenceGuard) {
      throw numeric_error("state diverged at step " + std::to_string(t_) +
                          " (unstable drift or step size too large)");
    }
  }

  const DriftModel* model_;
  DriftEvaluator eval_;
  VectorXd x_;
  VectorXd drift_;
  double eta_;
  double sqrt_eta_;
  Rng rng_;
  int noise_begin_ = 0;
  double noise_amp_ = 1.0;
  long t_ = 0;
};

inline Trajectory simulate(const DriftModel& model, const VectorXd& x0, double eta,
                           int n_steps, std::uint64_t seed) {
  if (n_steps < 0) throw config_error("step count must be >= 0");
  if (const auto* lin = std::get_if<LinearDrift>(&model)) {
    const double norm = lin->matrix.entries.cwiseAbs().rowwise().sum().maxCoeff();
    if (eta * norm > 0.1) {
      std::cerr << "driftlab: warning: eta * ||A||_inf = " << eta * norm
                << " is large; the Euler step may be inaccurate\n";
    }
  }
  SdeStepper stepper(model, x0, eta, seed);
  Trajectory traj;
  traj.eta = eta;
  traj.seed = seed;
  traj.states.resize(n_steps + 1, x0.size());
  traj.states.row(0) = x0.transpose();
  for (int t = 0; t < n_steps; ++t) {
    stepper.step();
    traj.states.row(t + 1) = stepper.state().transpose();
  }
  return traj;
}

}  // namespace driftlab
