#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "valuesim/error.hpp"
#include "valuesim/matrix.hpp"

namespace valuesim {

/// Shortest-free fixed format: every real is written with 17 significant digits.
inline std::string format_real(double x) {
  if (std::isnan(x)) return "NaN";
  if (std::isinf(x)) return x > 0 ? "Infinity" : "-Infinity";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace detail {
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

inline void dump_json(const nlohmann::json& j, std::string& out, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad + nlohmann::json(it.key()).dump() + ": ";
        dump_json(it.value(), out, indent, depth + 1);
      }
      out += "\n" + close_pad + "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        dump_json(j[i], out, indent, depth + 1);
      }
      out += "\n" + close_pad + "]";
      return;
    }
    case nlohmann::json::value_t::number_float: {
      const double x = j.get<double>();
      // JSON has no non-finite numbers.
      out += std::isfinite(x) ? format_real(x) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}
}  // namespace detail

/// Pretty JSON with reals at 17 significant digits and keys in sorted order.
inline std::string dump_json_17(const nlohmann::json& j) {
  std::string out;
  detail::dump_json(j, out, 2, 0);
  out += '\n';
  return out;
}

inline void write_matrix_csv(std::ostream& os, const std::vector<std::string>& row_labels,
                             const std::vector<std::string>& col_labels, const Matrix& m) {
  os << "label";
  for (const auto& c : col_labels) os << ',' << detail::csv_field(c);
  os << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    os << detail::csv_field(row_labels[i]);
    for (std::size_t j = 0; j < m.cols(); ++j) os << ',' << format_real(m(i, j));
    os << '\n';
  }
}

inline void write_matrix_csv(std::ostream& os, const CorrelationMatrix& c) {
  write_matrix_csv(os, c.row_labels, c.col_labels, c.cells);
}

/// Reads a labeled matrix. Square matrices with matching axes that are
/// symmetric are flagged symmetric.
inline CorrelationMatrix read_matrix_csv(std::istream& is, const std::string& origin = "<csv>") {
  std::string line;
  if (!std::getline(is, line)) fail(Errc::MalformedDocument, origin + ": empty matrix file");
  auto header = detail::split_csv_line(line);
  if (header.size() < 2) fail(Errc::MalformedDocument, origin + ": header needs at least one column");
  CorrelationMatrix c;
  c.col_labels.assign(header.begin() + 1, header.end());
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto fields = detail::split_csv_line(line);
    if (fields.size() != header.size())
      fail(Errc::MalformedDocument, origin + ":" + std::to_string(lineno) + ": expected " +
                                        std::to_string(header.size()) + " fields");
    c.row_labels.push_back(fields[0]);
    std::vector<double> row;
    for (std::size_t k = 1; k < fields.size(); ++k) {
      try {
        std::size_t pos = 0;
        row.push_back(std::stod(fields[k], &pos));
        if (pos != fields[k].size()) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        fail(Errc::MalformedDocument, origin + ":" + std::to_string(lineno) + ": bad number '" + fields[k] + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  c.cells = Matrix::from_rows(rows);
  if (rows.empty()) c.cells = Matrix(0, c.col_labels.size());
  c.symmetric = c.row_labels == c.col_labels && c.cells.is_symmetric(1e-12);
  return c;
}

inline CorrelationMatrix read_matrix_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoError, "cannot open matrix '" + path + "'");
  return read_matrix_csv(in, path);
}

inline std::string matrix_csv_string(const std::vector<std::string>& row_labels,
                                     const std::vector<std::string>& col_labels, const Matrix& m) {
  std::ostringstream os;
  write_matrix_csv(os, row_labels, col_labels, m);
  return os.str();
}

}  // namespace valuesim
