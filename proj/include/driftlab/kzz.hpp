#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "driftlab/drift_model.hpp"
#include "driftlab/parallel.hpp"
#include "driftlab/rng.hpp"
#include "driftlab/simulate.hpp"

namespace driftlab {

// Finite prior over drift models sharing one state dimension. Candidates must
// have unit diffusion on every coordinate (linear or basis drifts), which is
// what the path likelihood ratio below assumes.
struct DiscretePrior {
  std::vector<DriftModel> candidates;
  VectorXd weights;

  int size() const { return static_cast<int>(candidates.size()); }
  int state_dim() const { return candidates.empty() ? 0 : driftlab::state_dim(candidates[0]); }

  void validate() const {
    if (candidates.empty()) throw config_error("prior needs at least one candidate");
    if (weights.size() != size()) throw config_error("one weight per candidate required");
    double total = 0.0;
    for (int i = 0; i < size(); ++i) {
      if (weights[i] < 0.0) throw config_error("prior weights must be >= 0");
      total += weights[i];
    }
    if (std::abs(total - 1.0) > 1e-9) throw config_error("prior weights must sum to 1");
    const int dim = state_dim();
    for (const auto& model : candidates) {
      if (driftlab::state_dim(model) != dim) {
        throw config_error("prior candidates must share one state dimension");
      }
      if (std::holds_alternative<MassSpringDrift>(model)) {
        throw config_error("prior candidates must have unit diffusion on all coordinates");
      }
    }
  }
};

// Exact log likelihood ratio of the Euler-discretized path measure of `model`
// against the driftless measure:
//   sum_t <F(x_t), dx_t> - (eta/2) |F(x_t)|^2.
inline double path_loglik(const Trajectory& traj, const DriftModel& model) {
  if (traj.dim() != state_dim(model)) {
    throw config_error("trajectory dimension does not match the model");
  }
  DriftEvaluator eval(model);
  VectorXd f(traj.dim());
  double ll = 0.0;
  for (int t = 0; t < traj.n_steps(); ++t) {
    const VectorXd x = traj.states.row(t).transpose();
    eval(x, f);
    const auto dx = traj.states.row(t + 1) - traj.states.row(t);
    ll += f.dot(dx.transpose()) - 0.5 * traj.eta * f.squaredNorm();
  }
  return ll;
}

// Posterior over the prior's candidates along one path, together with the
// conditional variance rate sum_i Var(F_i(x_t; A) | X^t).
struct PosteriorTrace {
  VectorXd times;
  MatrixXd log_weights;   // (n_steps+1) x candidates, normalized per row
  VectorXd variance_rate;
};

namespace detail {

// Incremental posterior state along a path: per-candidate log likelihoods and
// the drift values at the current state.
class KzzFilter {
 public:
  explicit KzzFilter(const DiscretePrior& prior)
      : prior_(&prior), m_(prior.size()), dim_(prior.state_dim()), loglik_(VectorXd::Zero(m_)) {
    log_prior_.resize(m_);
    for (int i = 0; i < m_; ++i) {
      log_prior_[i] = prior.weights[i] > 0.0 ? std::log(prior.weights[i])
                                             : -std::numeric_limits<double>::infinity();
    }
    evals_.reserve(m_);
    for (const auto& model : prior.candidates) evals_.emplace_back(model);
    drifts_.resize(m_, VectorXd(dim_));
    weights_.resize(m_);
  }

  // Evaluates all candidate drifts at x and refreshes the posterior weights.
  void at_state(const VectorXd& x) {
    for (int i = 0; i < m_; ++i) evals_[i](x, drifts_[i]);
    double max_lw = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < m_; ++i) {
      weights_[i] = log_prior_[i] + loglik_[i];
      max_lw = std::max(max_lw, weights_[i]);
    }
    double total = 0.0;
    for (int i = 0; i < m_; ++i) {
      weights_[i] = std::exp(weights_[i] - max_lw);
      total += weights_[i];
    }
    log_norm_ = max_lw + std::log(total);
    for (int i = 0; i < m_; ++i) weights_[i] /= total;
  }

  // Sum over coordinates of the posterior variance of the drift at the
  // current state.
  double variance_rate() const {
    double second = 0.0;
    VectorXd mean = VectorXd::Zero(dim_);
    for (int i = 0; i < m_; ++i) {
      if (weights_[i] == 0.0) continue;
      second += weights_[i] * drifts_[i].squaredNorm();
      mean.noalias() += weights_[i] * drifts_[i];
    }
    return std::max(0.0, second - mean.squaredNorm());
  }

  // Accumulates each candidate's log likelihood for the observed increment.
  void absorb_increment(const VectorXd& dx, double eta) {
    for (int i = 0; i < m_; ++i) {
      loglik_[i] += drifts_[i].dot(dx) - 0.5 * eta * drifts_[i].squaredNorm();
    }
  }

  const VectorXd& loglik() const { return loglik_; }
  const std::vector<double>& weights() const { return weights_; }
  const VectorXd& drift_of(int i) const { return drifts_[i]; }
  double log_normalizer() const { return log_norm_; }  // log sum_i pi_i exp(ll_i)
  double log_prior_of(int i) const { return log_prior_[i]; }

 private:
  const DiscretePrior* prior_;
  int m_;
  int dim_;
  VectorXd loglik_;
  std::vector<double> log_prior_;
  std::vector<DriftEvaluator> evals_;
  std::vector<VectorXd> drifts_;
  std::vector<double> weights_;
  double log_norm_ = 0.0;
};

}  // namespace detail

inline PosteriorTrace posterior_trace(const Trajectory& traj, const DiscretePrior& prior) {
  prior.validate();
  if (traj.dim() != prior.state_dim()) {
    throw config_error("trajectory dimension does not match the prior");
  }
  const int n = traj.n_steps();
  detail::KzzFilter filter(prior);
  PosteriorTrace trace;
  trace.times.resize(n + 1);
  trace.log_weights.resize(n + 1, prior.size());
  trace.variance_rate.resize(n + 1);
  for (int t = 0; t <= n; ++t) {
    const VectorXd x = traj.states.row(t).transpose();
    filter.at_state(x);
    trace.times[t] = t * traj.eta;
    for (int i = 0; i < prior.size(); ++i) {
      trace.log_weights(t, i) = filter.log_prior_of(i) + filter.loglik()[i] - filter.log_normalizer();
    }
    trace.variance_rate[t] = filter.variance_rate();
    if (t < n) {
      const VectorXd dx = (traj.states.row(t + 1) - traj.states.row(t)).transpose();
      filter.absorb_increment(dx, traj.eta);
    }
  }
  return trace;
}

// Monte-Carlo mutual-information estimate with its standard error.
struct MiEstimate {
  double value = 0.0;
  double std_error = 0.0;
  long n_paths = 0;
};

// Two estimates of I(X^T; A) from shared paths started at x0 = 0:
//  - direct: average log-likelihood-ratio of the sampled candidate against the
//    prior mixture;
//  - kzz: half the time integral (trapezoidal) of the posterior variance rate.
struct KzzReport {
  MiEstimate direct;
  MiEstimate kzz;
  double rel_diff = 0.0;
  bool pass = false;
};

namespace detail {

struct KzzPathOutcome {
  double direct = 0.0;
  double kzz = 0.0;
};

// Simulates one path from the prior mixture (x0 = 0) and returns both
// estimator contributions.
inline KzzPathOutcome kzz_one_path(const DiscretePrior& prior, double t_total, double eta,
                                   std::uint64_t seed) {
  const int dim = prior.state_dim();
  const long n = std::lround(t_total / eta);
  Rng rng(seed);
  // Draw the transmitted candidate from the prior.
  int chosen = prior.size() - 1;
  {
    const double u = rng.uniform();
    double acc = 0.0;
    for (int i = 0; i < prior.size(); ++i) {
      acc += prior.weights[i];
      if (u < acc) {
        chosen = i;
        break;
      }
    }
  }
  KzzFilter filter(prior);
  VectorXd x = VectorXd::Zero(dim);
  VectorXd dx(dim);
  const double sqrt_eta = std::sqrt(eta);
  double kzz_integral = 0.0;
  for (long t = 0; t <= n; ++t) {
    filter.at_state(x);
    const double h = (t == 0 || t == n) ? 0.5 * eta : eta;
    kzz_integral += h * filter.variance_rate();
    if (t == n) break;
    for (int i = 0; i < dim; ++i) dx[i] = sqrt_eta * rng.gaussian();
    dx.noalias() += eta * filter.drift_of(chosen);
    filter.absorb_increment(dx, eta);
    x += dx;
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > kDivergenceGuard) {
      throw numeric_error("path diverged during mutual-information estimation");
    }
  }
  KzzPathOutcome out;
  // log [ dP(X|A_c) / dP_mixture(X) ], both against the driftless measure.
  out.direct = filter.loglik()[chosen] - filter.log_normalizer();
  out.kzz = 0.5 * kzz_integral;
  return out;
}

struct MomentAccumulator {
  double sum = 0.0;
  double sum_sq = 0.0;
  long count = 0;

  void add(double v) {
    sum += v;
    sum_sq += v * v;
    ++count;
  }
  void merge(const MomentAccumulator& other) {
    sum += other.sum;
    sum_sq += other.sum_sq;
    count += other.count;
  }
  MiEstimate estimate() const {
    MiEstimate e;
    e.n_paths = count;
    if (count == 0) return e;
    e.value = sum / count;
    const double var = std::max(0.0, sum_sq / count - e.value * e.value);
    e.std_error = count > 1 ? std::sqrt(var / (count - 1)) : 0.0;
    return e;
  }
};

inline void kzz_monte_carlo(const DiscretePrior& prior, double t_total, double eta, long n_paths,
                            std::uint64_t seed, unsigned threads, MomentAccumulator& direct,
                            MomentAccumulator& kzz) {
  prior.validate();
  if (!(eta > 0.0) || !(t_total > 0.0)) throw config_error("kzz needs positive T and eta");
  if (n_paths < 1) throw config_error("kzz needs at least one path");
  // Fixed block partition: the combine order below never depends on threads.
  const std::size_t block = 256;
  const std::size_t n_blocks = (static_cast<std::size_t>(n_paths) + block - 1) / block;
  std::vector<MomentAccumulator> block_direct(n_blocks);
  std::vector<MomentAccumulator> block_kzz(n_blocks);
  parallel_for_blocks(static_cast<std::size_t>(n_paths), block, threads,
                      [&](std::size_t b, std::size_t begin, std::size_t end) {
                        for (std::size_t i = begin; i < end; ++i) {
                          const auto out = kzz_one_path(prior, t_total, eta, derive_seed(seed, i));
                          block_direct[b].add(out.direct);
                          block_kzz[b].add(out.kzz);
                        }
                      });
  for (std::size_t b = 0; b < n_blocks; ++b) {
    direct.merge(block_direct[b]);
    kzz.merge(block_kzz[b]);
  }
}

}  // namespace detail

inline MiEstimate mi_direct(const DiscretePrior& prior, double t_total, double eta, long n_paths,
                            std::uint64_t seed, unsigned threads = 0) {
  detail::MomentAccumulator direct, kzz;
  detail::kzz_monte_carlo(prior, t_total, eta, n_paths, seed, threads, direct, kzz);
  return direct.estimate();
}

inline MiEstimate mi_kzz(const DiscretePrior& prior, double t_total, double eta, long n_paths,
                         std::uint64_t seed, unsigned threads = 0) {
  detail::MomentAccumulator direct, kzz;
  detail::kzz_monte_carlo(prior, t_total, eta, n_paths, seed, threads, direct, kzz);
  return kzz.estimate();
}

// Shared-path comparison of the two estimators. Passes when the gap is within
// max(2% of the direct estimate, 3 combined standard errors).
inline KzzReport verify_kzz(const DiscretePrior& prior, double t_total, double eta, long n_paths,
                            std::uint64_t seed, unsigned threads = 0) {
  detail::MomentAccumulator direct, kzz;
  detail::kzz_monte_carlo(prior, t_total, eta, n_paths, seed, threads, direct, kzz);
  KzzReport report;
  report.direct = direct.estimate();
  report.kzz = kzz.estimate();
  const double gap = std::abs(report.direct.value - report.kzz.value);
  const double denom = std::max(std::abs(report.direct.value), 1e-300);
  report.rel_diff = gap / denom;
  const double se = std::sqrt(report.direct.std_error * report.direct.std_error +
                              report.kzz.std_error * report.kzz.std_error);
  report.pass = gap <= std::max(0.02 * std::abs(report.direct.value), 3.0 * se);
  return report;
}

}  // namespace driftlab
