#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "qpert/types.hpp"

namespace qpert {

// Matrix file format (part of the CLI contract): a JSON document with
// fields "rows", "cols" and "entries", the latter a flat row-major array
// of [re, im] pairs.

class MatrixFileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline nlohmann::json matrix_to_json(const ComplexMatrix& m) {
  nlohmann::json entries = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      entries.push_back({m(r, c).real(), m(r, c).imag()});
    }
  }
  return nlohmann::json{
      {"rows", m.rows()}, {"cols", m.cols()}, {"entries", entries}};
}

inline ComplexMatrix matrix_from_json(const nlohmann::json& j,
                                      const std::string& origin) {
  for (const char* field : {"rows", "cols", "entries"}) {
    if (!j.contains(field)) {
      throw MatrixFileError(origin + ": missing field '" + field + "'");
    }
  }
  if (!j["rows"].is_number_integer() || !j["cols"].is_number_integer()) {
    throw MatrixFileError(origin + ": 'rows'/'cols' must be integers");
  }
  const Eigen::Index rows = j["rows"].get<Eigen::Index>();
  const Eigen::Index cols = j["cols"].get<Eigen::Index>();
  if (rows < 1 || cols < 1) {
    throw MatrixFileError(origin + ": 'rows'/'cols' must be positive");
  }
  const auto& entries = j["entries"];
  if (!entries.is_array() ||
      entries.size() != static_cast<std::size_t>(rows * cols)) {
    throw MatrixFileError(origin +
                          ": 'entries' must hold rows*cols [re, im] pairs");
  }
  ComplexMatrix m(rows, cols);
  std::size_t idx = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c, ++idx) {
      const auto& e = entries[idx];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() ||
          !e[1].is_number()) {
        throw MatrixFileError(origin + ": entry " + std::to_string(idx) +
                              " is not a [re, im] pair");
      }
      m(r, c) = Complex(e[0].get<double>(), e[1].get<double>());
    }
  }
  if (!m.allFinite()) {
    throw MatrixFileError(origin + ": non-finite entries");
  }
  return m;
}

inline ComplexMatrix load_complex_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw MatrixFileError("cannot open matrix file '" + path + "'");
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& err) {
    throw MatrixFileError("matrix file '" + path + "': " + err.what());
  }
  return matrix_from_json(j, "matrix file '" + path + "'");
}

inline void save_complex_matrix(const std::string& path,
                                const ComplexMatrix& m) {
  std::ofstream out(path);
  if (!out) {
    throw MatrixFileError("cannot write matrix file '" + path + "'");
  }
  out << matrix_to_json(m).dump(2) << '\n';
}

/// Column vectors use the same format with cols = 1.
inline ComplexVector load_complex_vector(const std::string& path) {
  const ComplexMatrix m = load_complex_matrix(path);
  if (m.cols() != 1) {
    throw MatrixFileError("vector file '" + path + "': expected cols = 1");
  }
  return m.col(0);
}

}  // namespace qpert
