#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "driftlab/ensembles.hpp"
#include "driftlab/estimator.hpp"
#include "driftlab/io.hpp"
#include "driftlab/kzz.hpp"
#include "driftlab/lyapunov.hpp"
#include "driftlab/phase.hpp"
#include "driftlab/serialize.hpp"
#include "driftlab/simulate.hpp"
#include "driftlab/spectral_bounds.hpp"
#include "driftlab/spring_recovery.hpp"

namespace driftlab {

enum class RunMode { kSimulate, kBound, kEstimate, kPhase, kKzz, kReproduceSpring };

inline const char* to_string(RunMode m) {
  switch (m) {
    case RunMode::kSimulate: return "simulate";
    case RunMode::kBound: return "bound";
    case RunMode::kEstimate: return "estimate";
    case RunMode::kPhase: return "phase";
    case RunMode::kKzz: return "kzz";
    case RunMode::kReproduceSpring: return "reproduce-spring";
  }
  return "simulate";
}

inline RunMode run_mode_from_string(const std::string& s) {
  if (s == "simulate") return RunMode::kSimulate;
  if (s == "bound") return RunMode::kBound;
  if (s == "estimate") return RunMode::kEstimate;
  if (s == "phase") return RunMode::kPhase;
  if (s == "kzz") return RunMode::kKzz;
  if (s == "reproduce-spring") return RunMode::kReproduceSpring;
  throw config_error("unknown mode: " + s);
}

// One experiment: a mode, the shared knobs, and the mode's parameter block.
struct ExperimentConfig {
  RunMode mode = RunMode::kBound;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  unsigned threads = 0;
  json params;  // mode-specific block

  json to_json() const {
    return json{{"mode", driftlab::to_string(mode)},
                {"seed", seed},
                {"out", out_dir},
                {"threads", threads},
                {"params", params}};
  }

  static ExperimentConfig from_json(const json& j) {
    ExperimentConfig cfg;
    cfg.mode = run_mode_from_string(j.at("mode").get<std::string>());
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.out_dir = j.value("out", std::string{"out"});
    cfg.threads = j.value("threads", 0u);
    cfg.params = j.value("params", json::object());
    return cfg;
  }
};

struct RunResult {
  json primary;                        // the main report, also written to disk
  std::vector<std::string> artifacts;  // paths written, in order
};

namespace detail {

inline const json& require_field(const json& j, const char* key) {
  if (!j.contains(key)) throw config_error(std::string("missing config field: ") + key);
  return j.at(key);
}

inline double require_number(const json& j, const char* key) {
  const json& v = require_field(j, key);
  if (!v.is_number()) throw config_error(std::string("config field must be numeric: ") + key);
  return v.get<double>();
}

inline int require_int(const json& j, const char* key) {
  const json& v = require_field(j, key);
  if (!v.is_number_integer()) {
    throw config_error(std::string("config field must be an integer: ") + key);
  }
  return v.get<int>();
}

inline std::vector<double> require_grid(const json& j, const char* key) {
  const json& v = require_field(j, key);
  if (!v.is_array() || v.empty()) {
    throw config_error(std::string("config field must be a nonempty array: ") + key);
  }
  std::vector<double> grid;
  for (const auto& x : v) {
    if (!x.is_number()) throw config_error(std::string("grid entries must be numeric: ") + key);
    grid.push_back(x.get<double>());
  }
  return grid;
}

inline void write_json_artifact(const std::filesystem::path& path, json payload,
                                const ExperimentConfig& cfg, RunResult& result) {
  payload["config"] = cfg.to_json();
  write_text_file(path, payload.dump(2) + "\n");
  result.artifacts.push_back(path.string());
}

// CSV artifacts keep their pinned column format; the resolved config travels
// in a sidecar.
inline void write_csv_artifact(const std::filesystem::path& path, const std::string& csv,
                               const ExperimentConfig& cfg, RunResult& result) {
  write_text_file(path, csv);
  result.artifacts.push_back(path.string());
  const std::filesystem::path meta = path.string() + ".meta.json";
  write_text_file(meta, json{{"config", cfg.to_json()}}.dump(2) + "\n");
  result.artifacts.push_back(meta.string());
}

inline DriftModel model_from_config(const json& m, std::uint64_t seed, VectorXd* x0_rest) {
  const std::string type = require_field(m, "type").get<std::string>();
  if (type == "linear") {
    const std::string file = require_field(m, "matrix_file").get<std::string>();
    return make_linear(read_matrix_coord(file));
  }
  if (type == "sparse-ensemble") {
    SparseEnsembleSpec spec{require_int(m, "p"), require_int(m, "k"),
                            require_number(m, "a_min"), require_number(m, "rho")};
    return LinearDrift{sparse_ensemble_sample(spec, seed)};
  }
  if (type == "dense-ensemble") {
    DenseEnsembleSpec spec{require_int(m, "p"), require_number(m, "a_min"),
                           require_number(m, "rho")};
    return LinearDrift{dense_ensemble_sample(spec, seed)};
  }
  if (type == "mass-spring") {
    NetworkSpec spec;
    spec.rows = require_int(m, "rows");
    spec.cols = require_int(m, "cols");
    spec.topology = grid_topology_from_string(m.value("topology", std::string{"grid"}));
    spec.rest_length = m.value("rest_length", 1.0);
    spec.gamma_damp = m.value("gamma", 2.0);
    spec.sigma = m.contains("sigma2") ? std::sqrt(m.at("sigma2").get<double>())
                                      : m.value("sigma", 0.5);
    spec.spatial_dim = m.value("d", 2);
    MassSpringNetwork network = mass_spring_network(spec, seed);
    if (x0_rest) *x0_rest = network.rest_state;
    return network.drift;
  }
  throw config_error("unknown model type: " + type);
}

inline RunResult run_simulate(const ExperimentConfig& cfg) {
  const json& p = cfg.params;
  VectorXd rest;
  DriftModel model = model_from_config(require_field(p, "model"), derive_seed(cfg.seed, 100), &rest);
  const double eta = p.contains("eta") ? p.at("eta").get<double>() : default_eta(model);
  long n_steps = 0;
  if (p.contains("n_steps")) {
    n_steps = p.at("n_steps").get<long>();
  } else {
    n_steps = std::lround(require_number(p, "T") / eta);
  }
  if (n_steps < 1) throw config_error("simulate needs n_steps >= 1");

  VectorXd x0 = VectorXd::Zero(state_dim(model));
  const json x0_spec = p.value("x0", json("zero"));
  if (x0_spec.is_array()) {
    if (static_cast<int>(x0_spec.size()) != state_dim(model)) {
      throw config_error("x0 dimension does not match the model");
    }
    for (int i = 0; i < x0.size(); ++i) x0[i] = x0_spec.at(i).get<double>();
  } else if (x0_spec == "stationary") {
    const auto* lin = std::get_if<LinearDrift>(&model);
    if (!lin) throw config_error("stationary start requires a linear model");
    x0 = sample_stationary(lin->matrix, derive_seed(cfg.seed, 101));
  } else if (x0_spec == "rest") {
    if (rest.size() == 0) throw config_error("rest start requires a mass-spring model");
    x0 = rest;
  } else if (x0_spec != "zero") {
    throw config_error("x0 must be \"zero\", \"stationary\", \"rest\", or an array");
  }

  const Trajectory traj =
      simulate(model, x0, eta, static_cast<int>(n_steps), derive_seed(cfg.seed, 102));
  RunResult result;
  const auto path = std::filesystem::path(cfg.out_dir) / "trajectory.csv";
  write_trajectory_csv(path, traj);
  result.artifacts.push_back(path.string());
  write_text_file(path.string() + ".meta.json", json{{"config", cfg.to_json()}}.dump(2) + "\n");
  result.artifacts.push_back(path.string() + ".meta.json");
  result.primary = json{{"trajectory", path.string()},
                        {"eta", eta},
                        {"n_steps", n_steps},
                        {"dim", traj.dim()},
                        {"seed", traj.seed}};
  return result;
}

inline RunResult run_bound(const ExperimentConfig& cfg) {
  const json& p = cfg.params;
  const std::string regime = require_field(p, "regime").get<std::string>();
  BoundReport report;
  if (regime == "sparse") {
    report = lower_bound_sparse(require_int(p, "p"), require_int(p, "k"),
                                require_number(p, "a_min"), require_number(p, "rho"));
  } else if (regime == "dense") {
    report = lower_bound_dense(require_int(p, "p"), require_number(p, "a_min"),
                               require_number(p, "rho"));
  } else if (regime == "nonlinear") {
    NonlinearClassParams params;
    params.p = require_int(p, "p");
    params.k = require_int(p, "k");
    params.var_bound_b = require_number(p, "B");
    params.cov_floor_l = require_number(p, "L");
    params.lipschitz_d = require_number(p, "D");
    params.drift_at_mean_c = require_number(p, "C");
    report = lower_bound_nonlinear(params);
  } else if (regime == "generic") {
    report = general_bound(require_number(p, "entropy_per_p"), require_number(p, "mi_x0_per_p"),
                           require_number(p, "variance_rate_per_p"));
  } else {
    throw config_error("unknown bound regime: " + regime);
  }
  RunResult result;
  result.primary = to_json(report);
  write_json_artifact(std::filesystem::path(cfg.out_dir) / "bound.json", result.primary, cfg,
                      result);
  return result;
}

inline RunResult run_estimate(const ExperimentConfig& cfg) {
  const json& p = cfg.params;
  Trajectory traj = read_trajectory_csv(require_field(p, "trajectory").get<std::string>());
  const MatrixXd truth = read_matrix_coord(require_field(p, "matrix").get<std::string>());
  std::optional<Basis> basis;
  if (p.value("basis", std::string{"linear"}) == "mass-spring") {
    basis = mass_spring_basis(require_int(p, "masses"), require_int(p, "d"));
  }
  const RegressionData data = build_regression(traj, basis);
  const double lambda = p.contains("lambda")
                            ? p.at("lambda").get<double>()
                            : l1_default_lambda(static_cast<int>(data.features.cols()),
                                                traj.duration(), traj.eta);
  const MatrixXd coeffs = l1_drift_estimate(data, lambda);
  double tau = 0.0;
  if (p.contains("tau")) {
    tau = p.at("tau").get<double>();
  } else if (p.contains("a_min")) {
    tau = 0.5 * p.at("a_min").get<double>();
  } else {
    tau = tau_by_largest_gap(coeffs);
  }
  const RecoveryResult recovery =
      compare_signed_support(signed_support(coeffs, tau), signed_support(truth, 0.0), lambda, tau);
  RunResult result;
  result.primary = to_json(recovery);
  write_json_artifact(std::filesystem::path(cfg.out_dir) / "recovery.json", result.primary, cfg,
                      result);
  return result;
}

inline RunResult run_phase(const ExperimentConfig& cfg) {
  const json& p = cfg.params;
  const std::string regime = require_field(p, "regime").get<std::string>();
  RecoverySweepConfig sweep;
  sweep.t_grid = require_grid(p, "T_grid");
  sweep.trials = p.value("trials", 50);
  sweep.success_level = p.value("success_level", 0.9);
  if (p.contains("eta")) sweep.eta = p.at("eta").get<double>();
  if (p.contains("lambda")) sweep.lambda = p.at("lambda").get<double>();
  if (p.contains("tau")) sweep.tau = p.at("tau").get<double>();
  sweep.lambda_c = p.value("lambda_c", 1.0);
  sweep.threads = cfg.threads;

  std::vector<int> p_grid;
  for (const auto& v : require_field(p, "p_grid")) p_grid.push_back(v.get<int>());
  const double a_min = require_number(p, "a_min");
  const double rho = require_number(p, "rho");

  PhaseTable table;
  int failed = 0;
  for (std::size_t i = 0; i < p_grid.size(); ++i) {
    const std::uint64_t seed = derive_seed(cfg.seed, 1000 + i);
    SweepOutcome outcome;
    if (regime == "sparse") {
      if (p_grid[i] > 64) throw config_error("phase mode caps sparse p at 64");
      SparseEnsembleSpec spec{p_grid[i], require_int(p, "k"), a_min, rho};
      outcome = estimate_sample_complexity(spec, sweep, seed);
    } else if (regime == "dense") {
      if (p_grid[i] > 32) throw config_error("phase mode caps dense p at 32");
      DenseEnsembleSpec spec{p_grid[i], a_min, rho};
      outcome = estimate_sample_complexity(spec, sweep, seed);
    } else {
      throw config_error("phase regime must be sparse or dense");
    }
    failed += outcome.failed_trials;
    for (auto& row : outcome.table.rows) table.rows.push_back(std::move(row));
  }

  RunResult result;
  write_csv_artifact(std::filesystem::path(cfg.out_dir) / "phase.csv", phase_table_csv(table),
                     cfg, result);
  json summary = phase_summary_json(table, sweep.success_level);
  summary["failed_trials"] = failed;
  result.primary = summary;
  write_json_artifact(std::filesystem::path(cfg.out_dir) / "phase_summary.json", summary, cfg,
                      result);
  return result;
}

inline DiscretePrior kzz_prior_from_config(const json& p) {
  DiscretePrior prior;
  const std::string preset = p.value("preset", std::string{});
  if (preset == "constant-pm1") {
    prior.candidates.push_back(make_constant_drift(VectorXd::Constant(1, 1.0)));
    prior.candidates.push_back(make_constant_drift(VectorXd::Constant(1, -1.0)));
    prior.weights = VectorXd::Constant(2, 0.5);
    return prior;
  }
  if (preset == "linear-p2-quad") {
    // Sign flips of the off-diagonal couplings of a stable symmetric matrix.
    for (const double s1 : {1.0, -1.0}) {
      for (const double s2 : {1.0, -1.0}) {
        MatrixXd a(2, 2);
        a << -1.0, 0.5 * s1, 0.5 * s2, -1.0;
        prior.candidates.push_back(make_linear(a));
      }
    }
    prior.weights = VectorXd::Constant(4, 0.25);
    return prior;
  }
  if (!preset.empty()) throw config_error("unknown kzz preset: " + preset);
  if (!p.contains("candidates")) {
    throw config_error("kzz needs a preset or an explicit candidate list");
  }
  const json& cands = p.at("candidates");
  for (const auto& c : cands) {
    const std::string type = require_field(c, "type").get<std::string>();
    if (type == "constant") {
      const auto& vals = require_field(c, "values");
      VectorXd v(static_cast<int>(vals.size()));
      for (int i = 0; i < v.size(); ++i) v[i] = vals.at(i).get<double>();
      prior.candidates.push_back(make_constant_drift(v));
    } else if (type == "linear") {
      prior.candidates.push_back(
          make_linear(read_matrix_coord(require_field(c, "matrix_file").get<std::string>())));
    } else {
      throw config_error("kzz candidate type must be constant or linear");
    }
  }
  if (p.contains("weights")) {
    const auto& w = p.at("weights");
    prior.weights.resize(static_cast<int>(w.size()));
    for (int i = 0; i < prior.weights.size(); ++i) prior.weights[i] = w.at(i).get<double>();
  } else {
    prior.weights =
        VectorXd::Constant(prior.size(), 1.0 / static_cast<double>(prior.size()));
  }
  return prior;
}

inline RunResult run_kzz(const ExperimentConfig& cfg) {
  const json& p = cfg.params;
  const DiscretePrior prior = kzz_prior_from_config(p);
  const double t_total = require_number(p, "T");
  const double eta = p.value("eta", 1e-3);
  const long paths = p.value("paths", 100000L);
  const KzzReport report = verify_kzz(prior, t_total, eta, paths, cfg.seed, cfg.threads);
  RunResult result;
  result.primary = to_json(report);
  write_json_artifact(std::filesystem::path(cfg.out_dir) / "kzz.json", result.primary, cfg,
                      result);
  return result;
}

inline RunResult run_reproduce_spring(const ExperimentConfig& cfg) {
  const json& p = cfg.params;
  NetworkSpec spec;
  spec.rows = p.value("rows", 3);
  spec.cols = p.value("cols", 3);
  spec.topology = grid_topology_from_string(p.value("topology", std::string{"grid"}));
  spec.rest_length = p.value("rest_length", 1.0);
  spec.gamma_damp = p.value("gamma", 2.0);
  spec.sigma = p.contains("sigma2") ? std::sqrt(p.at("sigma2").get<double>())
                                    : p.value("sigma", 0.5);
  spec.spatial_dim = p.value("d", 2);

  SpringSweepConfig sweep;
  sweep.t_grid = require_grid(p, "T_grid");
  sweep.trials = p.value("trials", 20);
  sweep.success_level = p.value("success_level", 0.9);
  sweep.eta = p.value("eta", 0.005);
  if (p.contains("lambda")) sweep.lambda = p.at("lambda").get<double>();
  sweep.lambda_c = p.value("lambda_c", 1.0);
  sweep.tau = p.value("tau", 0.5);
  sweep.threads = cfg.threads;
  sweep.keep_sample_path = p.value("write_trajectory", true);

  const SpringSweepOutcome outcome = spring_sample_complexity(spec, sweep, cfg.seed);

  RunResult result;
  write_csv_artifact(std::filesystem::path(cfg.out_dir) / "spring_phase.csv",
                     phase_table_csv(outcome.table), cfg, result);

  const MatrixXi truth = outcome.truth_adjacency.cast<int>();
  json recoveries = json::array();
  for (std::size_t g = 0; g < outcome.sample_estimates.size(); ++g) {
    const double t_total = sweep.t_grid[g];
    const double lambda =
        sweep.lambda.value_or(l1_default_lambda(0, t_total, sweep.eta, sweep.lambda_c));
    RecoveryResult r = compare_signed_support(outcome.sample_estimates[g], truth, lambda,
                                              sweep.tau);
    json entry = to_json(r);
    entry["T"] = t_total;
    recoveries.push_back(entry);
  }
  json report{{"recoveries", recoveries},
              {"summary", phase_summary_json(outcome.table, sweep.success_level)},
              {"failed_trials", outcome.failed_trials}};
  result.primary = report;
  write_json_artifact(std::filesystem::path(cfg.out_dir) / "spring_recovery.json", report, cfg,
                      result);

  if (outcome.sample_path) {
    const auto path = std::filesystem::path(cfg.out_dir) / "spring_trajectory.csv";
    write_trajectory_csv(path, *outcome.sample_path);
    result.artifacts.push_back(path.string());
    write_text_file(path.string() + ".meta.json",
                    json{{"config", cfg.to_json()}}.dump(2) + "\n");
    result.artifacts.push_back(path.string() + ".meta.json");
  }
  return result;
}

}  // namespace detail

// Runs one experiment, writing artifacts under the configured output
// directory. Throws config_error / numeric_error / io_error; the CLI maps
// those to exit codes 2 / 3 / 4.
inline RunResult run(const ExperimentConfig& cfg) {
  switch (cfg.mode) {
    case RunMode::kSimulate: return detail::run_simulate(cfg);
    case RunMode::kBound: return detail::run_bound(cfg);
    case RunMode::kEstimate: return detail::run_estimate(cfg);
    case RunMode::kPhase: return detail::run_phase(cfg);
    case RunMode::kKzz: return detail::run_kzz(cfg);
    case RunMode::kReproduceSpring: return detail::run_reproduce_spring(cfg);
  }
  throw config_error("unknown mode");
}

}  // namespace driftlab
