// Command-line front end: each subcommand assembles an experiment config
// (optionally seeded from --config JSON, with flags overriding), runs it, and
// prints the primary report. Exit codes: 2 bad config, 3 numeric failure,
// 4 I/O failure.

#include <CLI11.hpp>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "driftlab/driftlab.hpp"

namespace {

using driftlab::ExperimentConfig;
using driftlab::json;

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw driftlab::io_error("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw driftlab::config_error("config file is not valid JSON: " + std::string(e.what()));
  }
  return j;
}

std::vector<double> parse_grid(const std::string& csv) {
  std::vector<double> grid;
  std::istringstream in(csv);
  std::string cell;
  while (std::getline(in, cell, ',')) {
    try {
      grid.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw driftlab::config_error("bad grid entry: " + cell);
    }
  }
  if (grid.empty()) throw driftlab::config_error("empty grid");
  return grid;
}

struct GlobalFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<unsigned> threads;
};

// Layer the config sources: file (if any), then explicit flags on top.
ExperimentConfig assemble(const GlobalFlags& flags, const std::string& mode, json params) {
  json base;
  if (!flags.config_path.empty()) base = load_config_file(flags.config_path);
  base["mode"] = mode;
  if (!base.contains("params")) base["params"] = json::object();
  for (auto& [key, value] : params.items()) {
    if (!value.is_null()) base["params"][key] = value;
  }
  if (flags.seed) base["seed"] = *flags.seed;
  if (flags.out_dir) base["out"] = *flags.out_dir;
  if (flags.threads) base["threads"] = *flags.threads;
  return ExperimentConfig::from_json(base);
}

int dispatch(const ExperimentConfig& cfg) {
  const driftlab::RunResult result = driftlab::run(cfg);
  std::cout << result.primary.dump(2) << "\n";
  for (const auto& artifact : result.artifacts) {
    std::cerr << "wrote " << artifact << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for drift estimation in stochastic differential equations"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand name

  GlobalFlags flags;
  app.add_option("--config", flags.config_path, "JSON config file; flags override its fields");
  app.add_option("--seed", flags.seed, "master seed");
  app.add_option("--out", flags.out_dir, "output directory");
  app.add_option("--threads", flags.threads, "worker threads (0 = hardware)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "integrate an SDE and write the path as CSV");
  std::string sim_matrix, sim_model_type = "linear", sim_x0 = "zero", sim_grid;
  std::optional<double> sim_eta, sim_T;
  std::optional<long> sim_steps;
  std::optional<int> sim_p, sim_k;
  std::optional<double> sim_amin, sim_rho, sim_gamma, sim_sigma2, sim_rest;
  sim->add_option("--model", sim_model_type, "linear | sparse-ensemble | dense-ensemble | mass-spring");
  sim->add_option("--matrix", sim_matrix, "coordinate-format drift matrix (linear model)");
  sim->add_option("--grid", sim_grid, "RxC mass grid (mass-spring model)");
  sim->add_option("--p", sim_p, "ensemble dimension");
  sim->add_option("--k", sim_k, "sparse row degree");
  sim->add_option("--a-min", sim_amin, "coupling magnitude");
  sim->add_option("--rho", sim_rho, "stability margin");
  sim->add_option("--gamma", sim_gamma, "damping coefficient");
  sim->add_option("--sigma2", sim_sigma2, "noise variance");
  sim->add_option("--rest-length", sim_rest, "spring rest length");
  sim->add_option("--eta", sim_eta, "step size");
  sim->add_option("--T", sim_T, "total time");
  sim->add_option("--steps", sim_steps, "step count (overrides --T)");
  sim->add_option("--x0", sim_x0, "zero | stationary | rest");

  // bound
  auto* bound = app.add_subcommand("bound", "evaluate an observation-time lower bound");
  std::string bound_regime;
  std::optional<int> bound_p, bound_k;
  std::optional<double> bound_amin, bound_rho, bound_B, bound_L, bound_D, bound_C;
  std::optional<double> bound_entropy, bound_mi, bound_rate;
  bound->add_option("--regime", bound_regime, "sparse | dense | nonlinear | generic")->required();
  bound->add_option("--p", bound_p, "dimension");
  bound->add_option("--k", bound_k, "row degree / Jacobian sparsity");
  bound->add_option("--a-min", bound_amin, "minimum coupling");
  bound->add_option("--rho", bound_rho, "stability margin");
  bound->add_option("--B", bound_B, "per-coordinate stationary variance bound");
  bound->add_option("--L", bound_L, "covariance eigenvalue floor");
  bound->add_option("--D", bound_D, "Lipschitz bound on the partials");
  bound->add_option("--C", bound_C, "drift-at-mean constant");
  bound->add_option("--entropy", bound_entropy, "entropy per dimension (generic)");
  bound->add_option("--mi", bound_mi, "initial-state information per dimension (generic)");
  bound->add_option("--rate", bound_rate, "variance rate per dimension (generic)");

  // estimate
  auto* est = app.add_subcommand("estimate", "recover a signed support from a stored path");
  std::string est_traj, est_matrix, est_basis = "linear";
  std::optional<double> est_lambda, est_tau, est_amin;
  std::optional<int> est_masses, est_d;
  est->add_option("--traj", est_traj, "trajectory CSV")->required();
  est->add_option("--matrix", est_matrix, "ground-truth matrix (coordinate format)")->required();
  est->add_option("--basis", est_basis, "linear | mass-spring");
  est->add_option("--masses", est_masses, "mass count (mass-spring basis)");
  est->add_option("--d", est_d, "spatial dimension (mass-spring basis)");
  est->add_option("--lambda", est_lambda, "l1 penalty");
  est->add_option("--tau", est_tau, "sign threshold");
  est->add_option("--a-min", est_amin, "known coupling floor (sets tau = a_min/2)");

  // phase
  auto* phase = app.add_subcommand("phase", "sample-complexity sweep over (p, T)");
  std::string phase_regime, phase_pgrid, phase_tgrid;
  std::optional<int> phase_k, phase_trials;
  std::optional<double> phase_amin, phase_rho, phase_level, phase_lambda, phase_tau, phase_c,
      phase_eta;
  phase->add_option("--regime", phase_regime, "sparse | dense")->required();
  phase->add_option("--p", phase_pgrid, "comma-separated dimensions")->required();
  phase->add_option("--T-grid", phase_tgrid, "comma-separated observation times")->required();
  phase->add_option("--k", phase_k, "sparse row degree");
  phase->add_option("--a-min", phase_amin, "coupling magnitude");
  phase->add_option("--rho", phase_rho, "stability margin");
  phase->add_option("--trials", phase_trials, "trials per (p, T)");
  phase->add_option("--success-level", phase_level, "success threshold for T*");
  phase->add_option("--lambda", phase_lambda, "fixed l1 penalty");
  phase->add_option("--tau", phase_tau, "fixed sign threshold");
  phase->add_option("--lambda-c", phase_c, "penalty constant c");
  phase->add_option("--eta", phase_eta, "fixed step size");

  // kzz
  auto* kzz = app.add_subcommand("kzz", "verify the mutual-information identity by Monte Carlo");
  std::string kzz_preset;
  std::optional<double> kzz_T, kzz_eta;
  std::optional<long> kzz_paths;
  kzz->add_option("--preset", kzz_preset, "constant-pm1 | linear-p2-quad");
  kzz->add_option("--T", kzz_T, "observation time")->required();
  kzz->add_option("--eta", kzz_eta, "step size");
  kzz->add_option("--paths", kzz_paths, "Monte-Carlo paths");

  // reproduce-spring
  auto* spring = app.add_subcommand("reproduce-spring",
                                    "mass-spring structure recovery across observation times");
  std::string spring_grid = "3x3", spring_tgrid, spring_topology = "grid";
  std::optional<int> spring_trials, spring_d;
  std::optional<double> spring_gamma, spring_sigma2, spring_rest, spring_lambda, spring_c,
      spring_tau, spring_eta, spring_level;
  spring->add_option("--grid", spring_grid, "RxC mass grid");
  spring->add_option("--T-grid", spring_tgrid, "comma-separated observation times")->required();
  spring->add_option("--topology", spring_topology, "grid | grid-with-diagonals");
  spring->add_option("--trials", spring_trials, "trials per T");
  spring->add_option("--d", spring_d, "spatial dimension");
  spring->add_option("--gamma", spring_gamma, "damping coefficient");
  spring->add_option("--sigma2", spring_sigma2, "noise variance");
  spring->add_option("--rest-length", spring_rest, "spring rest length");
  spring->add_option("--lambda", spring_lambda, "fixed l1 penalty");
  spring->add_option("--lambda-c", spring_c, "penalty constant c");
  spring->add_option("--tau", spring_tau, "edge threshold");
  spring->add_option("--eta", spring_eta, "step size");
  spring->add_option("--success-level", spring_level, "success threshold for T*");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      json model{{"type", sim_model_type}};
      if (!sim_matrix.empty()) model["matrix_file"] = sim_matrix;
      if (!sim_grid.empty()) {
        const auto x = sim_grid.find('x');
        if (x == std::string::npos) throw driftlab::config_error("--grid expects RxC");
        model["rows"] = std::stoi(sim_grid.substr(0, x));
        model["cols"] = std::stoi(sim_grid.substr(x + 1));
        if (sim_model_type == "linear") model["type"] = "mass-spring";
      }
      if (sim_p) model["p"] = *sim_p;
      if (sim_k) model["k"] = *sim_k;
      if (sim_amin) model["a_min"] = *sim_amin;
      if (sim_rho) model["rho"] = *sim_rho;
      if (sim_gamma) model["gamma"] = *sim_gamma;
      if (sim_sigma2) model["sigma2"] = *sim_sigma2;
      if (sim_rest) model["rest_length"] = *sim_rest;
      json params{{"model", model}, {"x0", sim_x0}};
      if (sim_eta) params["eta"] = *sim_eta;
      if (sim_T) params["T"] = *sim_T;
      if (sim_steps) params["n_steps"] = *sim_steps;
      return dispatch(assemble(flags, "simulate", params));
    }
    if (bound->parsed()) {
      json params{{"regime", bound_regime}};
      if (bound_p) params["p"] = *bound_p;
      if (bound_k) params["k"] = *bound_k;
      if (bound_amin) params["a_min"] = *bound_amin;
      if (bound_rho) params["rho"] = *bound_rho;
      if (bound_B) params["B"] = *bound_B;
      if (bound_L) params["L"] = *bound_L;
      if (bound_D) params["D"] = *bound_D;
      if (bound_C) params["C"] = *bound_C;
      if (bound_entropy) params["entropy_per_p"] = *bound_entropy;
      if (bound_mi) params["mi_x0_per_p"] = *bound_mi;
      if (bound_rate) params["variance_rate_per_p"] = *bound_rate;
      return dispatch(assemble(flags, "bound", params));
    }
    if (est->parsed()) {
      json params{{"trajectory", est_traj}, {"matrix", est_matrix}, {"basis", est_basis}};
      if (est_masses) params["masses"] = *est_masses;
      if (est_d) params["d"] = *est_d;
      if (est_lambda) params["lambda"] = *est_lambda;
      if (est_tau) params["tau"] = *est_tau;
      if (est_amin) params["a_min"] = *est_amin;
      return dispatch(assemble(flags, "estimate", params));
    }
    if (phase->parsed()) {
      json p_grid = json::array();
      for (const double v : parse_grid(phase_pgrid)) p_grid.push_back(static_cast<int>(v));
      json params{{"regime", phase_regime}, {"p_grid", p_grid},
                  {"T_grid", parse_grid(phase_tgrid)}};
      if (phase_k) params["k"] = *phase_k;
      if (phase_amin) params["a_min"] = *phase_amin;
      if (phase_rho) params["rho"] = *phase_rho;
      if (phase_trials) params["trials"] = *phase_trials;
      if (phase_level) params["success_level"] = *phase_level;
      if (phase_lambda) params["lambda"] = *phase_lambda;
      if (phase_tau) params["tau"] = *phase_tau;
      if (phase_c) params["lambda_c"] = *phase_c;
      if (phase_eta) params["eta"] = *phase_eta;
      return dispatch(assemble(flags, "phase", params));
    }
    if (kzz->parsed()) {
      json params;
      if (!kzz_preset.empty()) params["preset"] = kzz_preset;
      if (kzz_T) params["T"] = *kzz_T;
      if (kzz_eta) params["eta"] = *kzz_eta;
      if (kzz_paths) params["paths"] = *kzz_paths;
      return dispatch(assemble(flags, "kzz", params));
    }
    if (spring->parsed()) {
      const auto x = spring_grid.find('x');
      if (x == std::string::npos) throw driftlab::config_error("--grid expects RxC");
      json params{{"rows", std::stoi(spring_grid.substr(0, x))},
                  {"cols", std::stoi(spring_grid.substr(x + 1))},
                  {"topology", spring_topology},
                  {"T_grid", parse_grid(spring_tgrid)}};
      if (spring_trials) params["trials"] = *spring_trials;
      if (spring_d) params["d"] = *spring_d;
      if (spring_gamma) params["gamma"] = *spring_gamma;
      if (spring_sigma2) params["sigma2"] = *spring_sigma2;
      if (spring_rest) params["rest_length"] = *spring_rest;
      if (spring_lambda) params["lambda"] = *spring_lambda;
      if (spring_c) params["lambda_c"] = *spring_c;
      if (spring_tau) params["tau"] = *spring_tau;
      if (spring_eta) params["eta"] = *spring_eta;
      if (spring_level) params["success_level"] = *spring_level;
      return dispatch(assemble(flags, "reproduce-spring", params));
    }
  } catch (const driftlab::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const driftlab::numeric_error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const driftlab::io_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
