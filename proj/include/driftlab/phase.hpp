#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "driftlab/ensembles.hpp"
#include "driftlab/estimator.hpp"
#include "driftlab/lyapunov.hpp"
#include "driftlab/parallel.hpp"
#include "driftlab/spectral_bounds.hpp"

namespace driftlab {

struct PhaseCell {
  int p = 0;
  std::string regime;
  double k_or_density = 0.0;
  double t_total = 0.0;
  int trials = 0;
  int successes = 0;
  double success_rate = 0.0;
  double t_min_theory = 0.0;
};

struct PhaseTable {
  std::vector<PhaseCell> rows;
};

struct RecoverySweepConfig {
  std::vector<double> t_grid;
  int trials = 50;
  double success_level = 0.9;
  std::optional<double> eta;     // default 0.01 / ||A||_inf per sample
  std::optional<double> lambda;  // default l1_default_lambda(q, T, eta, lambda_c)
  std::optional<double> tau;     // default: half the smallest nonzero |A_ij|
  double lambda_c = 1.0;
  unsigned threads = 0;

  void validate() const {
    if (t_grid.empty()) throw config_error("T grid must be nonempty");
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
      if (!(t_grid[i] > 0.0)) throw config_error("T grid must be positive");
      if (i > 0 && !(t_grid[i] > t_grid[i - 1])) {
        throw config_error("T grid must be strictly increasing");
      }
    }
    if (trials < 1) throw config_error("trials must be >= 1");
    if (!(success_level > 0.0 && success_level <= 1.0)) {
      throw config_error("success level must be in (0, 1]");
    }
  }
};

struct SweepOutcome {
  PhaseTable table;              // one row per grid T
  std::optional<double> t_star;  // smallest grid T reaching success_level
  int failed_trials = 0;         // aborted simulations, counted as failures
};

namespace detail {

struct EnsembleDraw {
  InteractionMatrix matrix;
  double entry_floor = 0.0;  // smallest nonzero coupling magnitude
};

// Shared trial loop: per trial, draw a matrix, start from the stationary law,
// stream an Euler path once up to the largest grid T while checkpointing the
// regression statistics at every grid time, then run the penalized estimator
// per checkpoint and score exact signed-support recovery.
inline SweepOutcome recovery_sweep(
    const std::function<EnsembleDraw(std::uint64_t)>& sample, int p, const std::string& regime,
    double k_or_density, double t_min_theory, const RecoverySweepConfig& cfg,
    std::uint64_t master_seed) {
  cfg.validate();
  const int n_grid = static_cast<int>(cfg.t_grid.size());
  Eigen::Matrix<signed char, Eigen::Dynamic, Eigen::Dynamic> success(cfg.trials, n_grid);
  success.setZero();
  std::vector<signed char> failed(cfg.trials, 0);
  const std::uint64_t seed_matrix = derive_seed(master_seed, 1);
  const std::uint64_t seed_x0 = derive_seed(master_seed, 2);
  const std::uint64_t seed_path = derive_seed(master_seed, 3);

  parallel_for_blocks(
      static_cast<std::size_t>(cfg.trials), 1, cfg.threads,
      [&](std::size_t, std::size_t trial_begin, std::size_t trial_end) {
        for (std::size_t trial = trial_begin; trial < trial_end; ++trial) {
          try {
            const EnsembleDraw draw = sample(derive_seed(seed_matrix, trial));
            const MatrixXd& a = draw.matrix.entries;
            const MatrixXi truth = signed_support(a, 0.0);
            const double eta =
                cfg.eta.value_or(0.01 / a.cwiseAbs().rowwise().sum().maxCoeff());
            std::vector<long> checkpoints(n_grid);
            for (int g = 0; g < n_grid; ++g) {
              checkpoints[g] = std::max<long>(2, std::lround(cfg.t_grid[g] / eta));
            }
            const long n_max = checkpoints.back();

            DriftModel model = LinearDrift{draw.matrix};
            SdeStepper stepper(model, sample_stationary(draw.matrix, derive_seed(seed_x0, trial)),
                               eta, derive_seed(seed_path, trial));

            const int q = p;
            constexpr long kChunk = 4096;
            MatrixXd feat(kChunk, q);
            MatrixXd incr(kChunk, p);
            MatrixXd gram = MatrixXd::Zero(q, q);
            MatrixXd cross = MatrixXd::Zero(q, p);
            std::vector<MatrixXd> gram_snap(n_grid);
            std::vector<MatrixXd> cross_snap(n_grid);
            long done = 0;
            int next_cp = 0;
            while (done < n_max) {
              long stop = std::min(done + kChunk, n_max);
              if (next_cp < n_grid) stop = std::min(stop, checkpoints[next_cp]);
              const long rows = stop - done;
              for (long r = 0; r < rows; ++r) {
                feat.row(r) = stepper.state().transpose();
                stepper.step();
                incr.row(r) = stepper.state().transpose() - feat.row(r);
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

            const double tau = cfg.tau.value_or(0.5 * draw.entry_floor);
            MatrixXd coeffs;
            for (int g = 0; g < n_grid; ++g) {
              RegressionStats stats;
              stats.gram = std::move(gram_snap[g]);
              stats.cross = std::move(cross_snap[g]);
              stats.n = checkpoints[g];
              stats.eta = eta;
              const double t_total = checkpoints[g] * eta;
              const double lambda =
                  cfg.lambda.value_or(l1_default_lambda(q, t_total, eta, cfg.lambda_c));
              coeffs = l1_estimate(stats, lambda, LassoOptions{}, nullptr,
                                   g == 0 ? nullptr : &coeffs);
              success(static_cast<int>(trial), g) =
                  (signed_support(coeffs, tau) == truth) ? 1 : 0;
            }
          } catch (const numeric_error&) {
            failed[trial] = 1;  // diverged or degenerate draw: scored as failure
          }
        }
      });

  SweepOutcome outcome;
  for (int g = 0; g < n_grid; ++g) {
    PhaseCell cell;
    cell.p = p;
    cell.regime = regime;
    cell.k_or_density = k_or_density;
    cell.t_total = cfg.t_grid[g];
    cell.trials = cfg.trials;
    cell.successes = 0;
    for (int t = 0; t < cfg.trials; ++t) cell.successes += success(t, g);
    cell.success_rate = static_cast<double>(cell.successes) / cfg.trials;
    cell.t_min_theory = t_min_theory;
    outcome.table.rows.push_back(cell);
    if (!outcome.t_star && cell.success_rate >= cfg.success_level) {
      outcome.t_star = cell.t_total;
    }
  }
  for (const auto f : failed) outcome.failed_trials += f;
  return outcome;
}

}  // namespace detail

// Empirical sample-complexity sweep for the sparse ensemble at one dimension.
inline SweepOutcome estimate_sample_complexity(const SparseEnsembleSpec& spec,
                                               const RecoverySweepConfig& cfg,
                                               std::uint64_t master_seed) {
  spec.validate();
  auto sampler = [spec](std::uint64_t seed) {
    return detail::EnsembleDraw{sparse_ensemble_sample(spec, seed), spec.a_min};
  };
  return detail::recovery_sweep(sampler, spec.p, "sparse", spec.k,
                                lower_bound_sparse(spec.p, spec.k, spec.a_min, spec.rho).t_min,
                                cfg, master_seed);
}

// Dense analog; couplings live at magnitude a_min / sqrt(p).
inline SweepOutcome estimate_sample_complexity(const DenseEnsembleSpec& spec,
                                               const RecoverySweepConfig& cfg,
                                               std::uint64_t master_seed) {
  spec.validate();
  auto sampler = [spec](std::uint64_t seed) {
    return detail::EnsembleDraw{dense_ensemble_sample(spec, seed),
                                spec.a_min / std::sqrt(static_cast<double>(spec.p))};
  };
  return detail::recovery_sweep(sampler, spec.p, "dense", 0.5,
                                lower_bound_dense(spec.p, spec.a_min, spec.rho).t_min, cfg,
                                master_seed);
}

}  // namespace driftlab
