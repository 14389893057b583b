#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "driftlab/ensembles.hpp"
#include "driftlab/estimator.hpp"
#include "driftlab/parallel.hpp"
#include "driftlab/phase.hpp"

namespace driftlab {

struct SpringSweepConfig {
  std::vector<double> t_grid;
  int trials = 20;
  double success_level = 0.9;
  double eta = 0.005;
  std::optional<double> lambda;  // default l1_default_lambda(q, T, eta, lambda_c)
  double lambda_c = 1.0;
  double tau = 0.5;  // half the unit spring constant
  unsigned threads = 0;
  bool keep_sample_path = false;  // store trial 0's path up to the largest T

  void validate() const {
    if (t_grid.empty()) throw config_error("T grid must be nonempty");
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
      if (!(t_grid[i] > 0.0)) throw config_error("T grid must be positive");
      if (i > 0 && !(t_grid[i] > t_grid[i - 1])) {
        throw config_error("T grid must be strictly increasing");
      }
    }
    if (trials < 1) throw config_error("trials must be >= 1");
    if (!(eta > 0.0)) throw config_error("step size must be positive");
  }
};

struct SpringSweepOutcome {
  PhaseTable table;
  std::optional<double> t_star;
  int failed_trials = 0;
  MatrixXd truth_adjacency;
  std::vector<MatrixXi> sample_estimates;  // trial 0's estimated adjacency per grid T
  std::optional<Trajectory> sample_path;   // trial 0's path, when requested
};

namespace detail {

// Estimated adjacency from the coefficient matrix of the velocity-increment
// regression: edge (i, j) is declared present when any coefficient on the
// delta_ij feature block, in the velocity rows of mass i or mass j, exceeds
// tau in magnitude.
inline MatrixXi spring_edges_from_coeffs(const MatrixXd& coeffs, const MassSpringBasisLayout& lay,
                                         double tau) {
  MatrixXi edges = MatrixXi::Zero(lay.p, lay.p);
  for (int i = 0; i < lay.p; ++i) {
    for (int j = i + 1; j < lay.p; ++j) {
      const int pr = lay.pair_index(i, j);
      double stat = 0.0;
      for (int a = 0; a < lay.d; ++a) {
        for (int b = 0; b < lay.d; ++b) {
          stat = std::max(stat, std::abs(coeffs(i * lay.d + a, lay.delta_col(pr, b))));
          stat = std::max(stat, std::abs(coeffs(j * lay.d + a, lay.delta_col(pr, b))));
        }
      }
      if (stat > tau) {
        edges(i, j) = 1;
        edges(j, i) = 1;
      }
    }
  }
  return edges;
}

}  // namespace detail

// Structure-recovery sweep for the elastic network: simulate the damped
// noisy dynamics from the rest configuration, regress velocity increments on
// the nonlinear feature catalog, and score exact recovery of the spring set.
inline SpringSweepOutcome spring_sample_complexity(const NetworkSpec& spec,
                                                   const SpringSweepConfig& cfg,
                                                   std::uint64_t master_seed) {
  cfg.validate();
  const MassSpringNetwork network = mass_spring_network(spec, master_seed);
  const int p = network.drift.mass_count();
  const int d = network.drift.spatial_dim;
  const MassSpringBasisLayout lay{p, d};
  const Basis basis = mass_spring_basis(p, d);
  const int q = basis.size();
  const int pd = p * d;
  const int n_grid = static_cast<int>(cfg.t_grid.size());
  const MatrixXi truth = network.drift.adjacency.cast<int>();

  Eigen::Matrix<signed char, Eigen::Dynamic, Eigen::Dynamic> success(cfg.trials, n_grid);
  success.setZero();
  std::vector<signed char> failed(cfg.trials, 0);
  std::vector<MatrixXi> sample_estimates(n_grid);
  std::optional<Trajectory> sample_path;
  const std::uint64_t seed_path = derive_seed(master_seed, 11);

  std::vector<long> checkpoints(n_grid);
  for (int g = 0; g < n_grid; ++g) {
    checkpoints[g] = std::max<long>(2, std::lround(cfg.t_grid[g] / cfg.eta));
  }
  const long n_max = checkpoints.back();

  parallel_for_blocks(
      static_cast<std::size_t>(cfg.trials), 1, cfg.threads,
      [&](std::size_t, std::size_t trial_begin, std::size_t trial_end) {
        for (std::size_t trial = trial_begin; trial < trial_end; ++trial) {
          try {
            DriftModel model = network.drift;
            SdeStepper stepper(model, network.rest_state, cfg.eta,
                               derive_seed(seed_path, trial));
            const bool keep_path = cfg.keep_sample_path && trial == 0;
            Trajectory path;
            if (keep_path) {
              path.eta = cfg.eta;
              path.seed = derive_seed(seed_path, trial);
              path.states.resize(n_max + 1, 2 * pd);
              path.states.row(0) = network.rest_state.transpose();
            }

            constexpr long kChunk = 2048;
            MatrixXd feat(kChunk, q);
            MatrixXd incr(kChunk, pd);
            MatrixXd gram = MatrixXd::Zero(q, q);
            MatrixXd cross = MatrixXd::Zero(q, pd);
            std::vector<MatrixXd> gram_snap(n_grid);
            std::vector<MatrixXd> cross_snap(n_grid);
            VectorXd features_row(q);
            long done = 0;
            int next_cp = 0;
            while (done < n_max) {
              long stop = std::min(done + kChunk, n_max);
              if (next_cp < n_grid) stop = std::min(stop, checkpoints[next_cp]);
              const long rows = stop - done;
              for (long r = 0; r < rows; ++r) {
                const VectorXd x = stepper.state();
                basis.eval_into(x, features_row);
                feat.row(r) = features_row.transpose();
                stepper.step();
                incr.row(r) = (stepper.state().tail(pd) - x.tail(pd)).transpose();
                if (keep_path) path.states.row(done + r + 1) = stepper.state().transpose();
              }
              gram.selfadjointView<Eigen::Upper>().rankUpdate(feat.topRows(rows).transpose());
              cross.noalias() += feat.topRows(rows).transpose() * incr.topRows(rows);
              done = stop;
              while (next_cp < n_grid && checkpoints[next_cp] == done) {
                gram_snap[next_cp] = gram.selfadjointView<Eigen::Upper>();
                cross_snap[next_cp] = cross;
                ++next_cp;
              }
            }

            MatrixXd coeffs;
            for (int g = 0; g < n_grid; ++g) {
              RegressionStats stats;
              stats.gram = std::move(gram_snap[g]);
              stats.cross = std::move(cross_snap[g]);
              stats.n = checkpoints[g];
              stats.eta = cfg.eta;
              const double t_total = checkpoints[g] * cfg.eta;
              const double lambda =
                  cfg.lambda.value_or(l1_default_lambda(q, t_total, cfg.eta, cfg.lambda_c));
              coeffs = l1_estimate(stats, lambda, LassoOptions{}, nullptr,
                                   g == 0 ? nullptr : &coeffs);
              const MatrixXi est = detail::spring_edges_from_coeffs(coeffs, lay, cfg.tau);
              success(static_cast<int>(trial), g) = (est == truth) ? 1 : 0;
              if (trial == 0) sample_estimates[g] = est;
            }
            if (keep_path) sample_path = std::move(path);
          } catch (const numeric_error&) {
            failed[trial] = 1;
          }
        }
      });

  SpringSweepOutcome outcome;
  outcome.truth_adjacency = network.drift.adjacency;
  outcome.sample_estimates = std::move(sample_estimates);
  outcome.sample_path = std::move(sample_path);
  const double mean_degree =
      network.drift.adjacency.sum() / static_cast<double>(p);
  for (int g = 0; g < n_grid; ++g) {
    PhaseCell cell;
    cell.p = p;
    cell.regime = "mass-spring";
    cell.k_or_density = mean_degree;
    cell.t_total = cfg.t_grid[g];
    cell.trials = cfg.trials;
    cell.successes = 0;
    for (int t = 0; t < cfg.trials; ++t) cell.successes += success(t, g);
    cell.success_rate = static_cast<double>(cell.successes) / cfg.trials;
    cell.t_min_theory = 0.0;  // no closed-form evaluator for this model class
    outcome.table.rows.push_back(cell);
    if (!outcome.t_star && cell.success_rate >= cfg.success_level) {
      outcome.t_star = cell.t_total;
    }
  }
  for (const auto f : failed) outcome.failed_trials += f;
  return outcome;
}

}  // namespace driftlab
