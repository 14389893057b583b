#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "driftlab/errors.hpp"
#include "driftlab/simulate.hpp"

namespace driftlab {

// All numeric text is written at 17 significant digits so doubles round-trip
// exactly.
inline std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out) throw io_error("cannot open for writing: " + path.string());
  return out;
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open for reading: " + path.string());
  return in;
}

// Coordinate text format: header line "p <dim>", then one line "i j value"
// per nonzero entry, indices 0-based.
inline void write_matrix_coord(const std::filesystem::path& path, const MatrixXd& m) {
  if (m.rows() != m.cols()) throw config_error("coordinate format stores square matrices");
  auto out = open_output(path);
  out << "p " << m.rows() << "\n";
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      if (m(i, j) != 0.0) {
        out << i << " " << j << " " << format_double(m(i, j)) << "\n";
      }
    }
  }
  if (!out) throw io_error("write failed: " + path.string());
}

inline MatrixXd read_matrix_coord(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::string tag;
  int dim = 0;
  if (!(in >> tag >> dim) || tag != "p" || dim <= 0) {
    throw io_error("bad coordinate header in " + path.string());
  }
  MatrixXd m = MatrixXd::Zero(dim, dim);
  int i = 0;
  int j = 0;
  double value = 0.0;
  while (in >> i >> j >> value) {
    if (i < 0 || j < 0 || i >= dim || j >= dim) {
      throw io_error("entry out of range in " + path.string());
    }
    m(i, j) = value;
  }
  if (!in.eof()) throw io_error("malformed entry line in " + path.string());
  return m;
}

// Trajectory CSV: header "t,x_0,...,x_{dim-1}", one row per stored state,
// time in column 0.
inline void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
  auto out = open_output(path);
  out << "t";
  for (int j = 0; j < traj.dim(); ++j) out << ",x_" << j;
  out << "\n";
  for (int t = 0; t < traj.states.rows(); ++t) {
    out << format_double(t * traj.eta);
    for (int j = 0; j < traj.dim(); ++j) out << "," << format_double(traj.states(t, j));
    out << "\n";
  }
  if (!out) throw io_error("write failed: " + path.string());
}

inline Trajectory read_trajectory_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,", 0) != 0) {
    throw io_error("bad trajectory header in " + path.string());
  }
  int dim = 0;
  for (char c : line) {
    if (c == ',') ++dim;
  }
  std::vector<double> times;
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    int col = 0;
    while (std::getline(row, cell, ',')) {
      const double v = std::stod(cell);
      if (col == 0) {
        times.push_back(v);
      } else {
        values.push_back(v);
      }
      ++col;
    }
    if (col != dim + 1) throw io_error("inconsistent row width in " + path.string());
  }
  if (times.size() < 2) throw io_error("trajectory needs at least 2 rows: " + path.string());
  Trajectory traj;
  traj.eta = times[1] - times[0];
  traj.states.resize(static_cast<int>(times.size()), dim);
  for (int t = 0; t < traj.states.rows(); ++t) {
    for (int j = 0; j < dim; ++j) {
      traj.states(t, j) = values[static_cast<std::size_t>(t) * dim + j];
    }
  }
  return traj;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  auto out = open_output(path);
  out << content;
  if (!out) throw io_error("write failed: " + path.string());
}

}  // namespace driftlab
