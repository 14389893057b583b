#pragma once

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "driftlab/estimator.hpp"
#include "driftlab/io.hpp"
#include "driftlab/kzz.hpp"
#include "driftlab/phase.hpp"
#include "driftlab/spectral_bounds.hpp"

namespace driftlab {

using nlohmann::json;

inline json to_json(const BoundReport& report) {
  return json{{"regime", to_string(report.regime)},
              {"entropy_per_p", report.entropy_per_p},
              {"mi_x0_per_p", report.mi_x0_per_p},
              {"variance_rate_per_p", report.variance_rate_per_p},
              {"t_min", report.t_min}};
}

inline BoundReport bound_report_from_json(const json& j) {
  BoundReport report;
  report.regime = bound_regime_from_string(j.at("regime").get<std::string>());
  report.entropy_per_p = j.at("entropy_per_p").get<double>();
  report.mi_x0_per_p = j.at("mi_x0_per_p").get<double>();
  report.variance_rate_per_p = j.at("variance_rate_per_p").get<double>();
  report.t_min = j.at("t_min").get<double>();
  report.vacuous = report.entropy_per_p - 2.0 * report.mi_x0_per_p <= 0.0;
  return report;
}

inline json to_json(const KzzReport& report) {
  return json{{"I_direct", report.direct.value}, {"se_direct", report.direct.std_error},
              {"I_kzz", report.kzz.value},       {"se_kzz", report.kzz.std_error},
              {"rel_diff", report.rel_diff},     {"pass", report.pass}};
}

inline json sign_matrix_to_json(const MatrixXi& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

inline MatrixXi sign_matrix_from_json(const json& j) {
  const int rows = static_cast<int>(j.size());
  if (rows == 0) return MatrixXi();
  const int cols = static_cast<int>(j.at(0).size());
  MatrixXi m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int c = 0; c < cols; ++c) m(i, c) = j.at(i).at(c).get<int>();
  }
  return m;
}

inline json to_json(const RecoveryResult& r) {
  json row_errors = json::array();
  for (int i = 0; i < r.row_errors.size(); ++i) row_errors.push_back(r.row_errors[i]);
  return json{{"estimated_sign", sign_matrix_to_json(r.estimated_sign)},
              {"truth_sign", sign_matrix_to_json(r.truth_sign)},
              {"success", r.success},
              {"row_errors", row_errors},
              {"lambda", r.lambda},
              {"threshold", r.threshold}};
}

inline RecoveryResult recovery_from_json(const json& j) {
  RecoveryResult r;
  r.estimated_sign = sign_matrix_from_json(j.at("estimated_sign"));
  r.truth_sign = sign_matrix_from_json(j.at("truth_sign"));
  r.success = j.at("success").get<bool>();
  const auto& errs = j.at("row_errors");
  r.row_errors.resize(static_cast<int>(errs.size()));
  for (int i = 0; i < r.row_errors.size(); ++i) r.row_errors[i] = errs.at(i).get<int>();
  r.lambda = j.at("lambda").get<double>();
  r.threshold = j.at("threshold").get<double>();
  return r;
}

// Phase CSV columns: p,regime,k_or_density,T,trials,successes,success_rate,
// t_min_theory — sorted by (regime, p, T).
inline std::string phase_table_csv(PhaseTable table) {
  std::sort(table.rows.begin(), table.rows.end(), [](const PhaseCell& a, const PhaseCell& b) {
    if (a.regime != b.regime) return a.regime < b.regime;
    if (a.p != b.p) return a.p < b.p;
    return a.t_total < b.t_total;
  });
  std::ostringstream out;
  out << "p,regime,k_or_density,T,trials,successes,success_rate,t_min_theory\n";
  for (const auto& c : table.rows) {
    out << c.p << "," << c.regime << "," << format_double(c.k_or_density) << ","
        << format_double(c.t_total) << "," << c.trials << "," << c.successes << ","
        << format_double(c.success_rate) << "," << format_double(c.t_min_theory) << "\n";
  }
  return out.str();
}

inline PhaseTable phase_table_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("p,regime,", 0) != 0) {
    throw io_error("bad phase table header");
  }
  PhaseTable table;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    PhaseCell c;
    std::getline(row, cell, ',');
    c.p = std::stoi(cell);
    std::getline(row, c.regime, ',');
    std::getline(row, cell, ',');
    c.k_or_density = std::stod(cell);
    std::getline(row, cell, ',');
    c.t_total = std::stod(cell);
    std::getline(row, cell, ',');
    c.trials = std::stoi(cell);
    std::getline(row, cell, ',');
    c.successes = std::stoi(cell);
    std::getline(row, cell, ',');
    c.success_rate = std::stod(cell);
    if (!std::getline(row, cell, ',')) throw io_error("short phase table row");
    c.t_min_theory = std::stod(cell);
    table.rows.push_back(std::move(c));
  }
  return table;
}

// Per-dimension summary: the smallest grid T reaching the success level, with
// the matching theoretical floor.
inline json phase_summary_json(const PhaseTable& table, double success_level) {
  struct Key {
    std::string regime;
    int p;
  };
  std::vector<std::pair<std::string, int>> keys;
  for (const auto& c : table.rows) {
    const auto key = std::make_pair(c.regime, c.p);
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  std::sort(keys.begin(), keys.end());
  json per_p = json::array();
  for (const auto& [regime, p] : keys) {
    std::vector<const PhaseCell*> cells;
    for (const auto& c : table.rows) {
      if (c.regime == regime && c.p == p) cells.push_back(&c);
    }
    std::sort(cells.begin(), cells.end(),
              [](const PhaseCell* a, const PhaseCell* b) { return a->t_total < b->t_total; });
    json entry{{"regime", regime}, {"p", p}, {"t_min_theory", cells.front()->t_min_theory}};
    entry["t_star"] = nullptr;
    for (const auto* c : cells) {
      if (c->success_rate >= success_level) {
        entry["t_star"] = c->t_total;
        break;
      }
    }
    if (entry["t_star"].is_null()) entry["t_star"] = "not reached";
    per_p.push_back(entry);
  }
  return json{{"success_level", success_level}, {"per_p", per_p}};
}

}  // namespace driftlab
