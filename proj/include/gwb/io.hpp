#pragma once

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gwb/error.hpp"
#include "gwb/matrix.hpp"
#include "gwb/spaces.hpp"

namespace gwb {

using json = nlohmann::json;

/// Shortest representation that round-trips through a double.
inline std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

namespace detail {

inline double parse_double(const std::string& field, const std::string& path,
                           std::size_t line, std::size_t col) {
  const char* first = field.data();
  const char* last = first + field.size();
  while (first != last && (*first == ' ' || *first == '\t')) ++first;
  while (last != first && (*(last - 1) == ' ' || *(last - 1) == '\t' ||
                           *(last - 1) == '\r'))
    --last;
  double value = 0.0;
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last)
    throw io_error(path + ":" + std::to_string(line) + ": field " +
                   std::to_string(col) + ": not a number: '" + field + "'");
  return value;
}

}  // namespace detail

/// Reads a rectangular numeric CSV (no header). Parse errors report
/// path:line and the 1-based field index.
inline Matrix read_csv_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    std::size_t start = 0;
    std::size_t col = 0;
    while (start <= line.size()) {
      const std::size_t comma = line.find(',', start);
      const std::size_t end = comma == std::string::npos ? line.size() : comma;
      ++col;
      row.push_back(
          detail::parse_double(line.substr(start, end - start), path, lineno, col));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw io_error(path + ":" + std::to_string(lineno) + ": expected " +
                     std::to_string(rows.front().size()) + " fields, got " +
                     std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw io_error(path + ": empty file");
  return Matrix::from_rows(rows);
}

inline void write_csv_matrix(std::ostream& out, const Matrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

inline void write_csv_matrix(const std::string& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write " + path);
  write_csv_matrix(out, m);
  if (!out) throw io_error("write failed: " + path);
}

inline json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw io_error(path + ": " + e.what());
  }
}

inline void save_json(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw io_error("write failed: " + path);
}

/// A space loaded from disk; features are present only for structured inputs.
struct SpaceFile {
  MmSpace space;
  std::optional<Matrix> features;
};

namespace detail {

inline Matrix matrix_from_json(const json& rows, const std::string& what) {
  if (!rows.is_array() || rows.empty())
    throw io_error(what + ": expected a nonempty array of rows");
  std::vector<std::vector<double>> data;
  data.reserve(rows.size());
  for (const auto& r : rows) {
    if (!r.is_array()) throw io_error(what + ": expected array rows");
    data.push_back(r.get<std::vector<double>>());
  }
  try {
    return Matrix::from_rows(data);
  } catch (const validation_error& e) {
    throw io_error(what + ": " + e.what());
  }
}

}  // namespace detail

/// Space JSON: {"distances": [[...]], "weights": [...]?, "features": [[...]]?}.
inline SpaceFile space_from_json(const json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("distances"))
    throw io_error(path + ": expected an object with a 'distances' key");
  Matrix d = detail::matrix_from_json(j["distances"], path + ": distances");
  std::vector<double> w;
  if (j.contains("weights")) w = j["weights"].get<std::vector<double>>();
  SpaceFile out{MmSpace(std::move(d), std::move(w)), std::nullopt};
  if (j.contains("features")) {
    Matrix f = detail::matrix_from_json(j["features"], path + ": features");
    if (f.rows() != out.space.size())
      throw validation_error(errc::feature_rows,
                             path + ": " + std::to_string(f.rows()) +
                                 " feature rows for n=" +
                                 std::to_string(out.space.size()));
    out.features = std::move(f);
  }
  return out;
}

/// Loads a space from .csv (bare distance matrix, uniform weights) or .json.
inline SpaceFile load_space(const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv")
    return SpaceFile{MmSpace(read_csv_matrix(path)), std::nullopt};
  return space_from_json(load_json(path), path);
}

inline json space_to_json(const MmSpace& space,
                          const std::optional<Matrix>& features = std::nullopt) {
  json j;
  auto& rows = j["distances"] = json::array();
  for (std::size_t i = 0; i < space.size(); ++i) {
    json row = json::array();
    for (std::size_t k = 0; k < space.size(); ++k) row.push_back(space.distances(i, k));
    rows.push_back(std::move(row));
  }
  j["weights"] = space.weights;
  if (features) {
    auto& frows = j["features"] = json::array();
    for (std::size_t i = 0; i < features->rows(); ++i) {
      json row = json::array();
      for (std::size_t k = 0; k < features->cols(); ++k)
        row.push_back((*features)(i, k));
      frows.push_back(std::move(row));
    }
  }
  return j;
}

inline void save_space(const std::string& path, const MmSpace& space,
                       const std::optional<Matrix>& features = std::nullopt) {
  save_json(path, space_to_json(space, features));
}

}  // namespace gwb
