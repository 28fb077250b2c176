#include "qbcmr/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qbcmr/errors.hpp"

namespace qbcmr {

std::string format_g17(double v) {
  if (!std::isfinite(v)) throw numerical_error("format_g17: non-finite value in output");
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out(path);
  if (!out) throw config_error("write_csv: cannot open " + path.string());
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i > 0) out << ',';
    out << table.header[i];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size())
      throw invalid_argument_error("write_csv: row width does not match header");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out << ',';
      out << format_g17(row[i]);
    }
    out << '\n';
  }
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw config_error("read_csv: cannot open " + path.string());
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw config_error("read_csv: empty file " + path.string());
  std::stringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) table.header.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::vector<double> row;
    while (std::getline(ls, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw config_error("read_csv: non-numeric cell '" + cell + "' in " + path.string());
      }
    }
    if (row.size() != table.header.size())
      throw config_error("read_csv: ragged row in " + path.string());
    table.rows.push_back(std::move(row));
  }
  return table;
}

namespace {
std::string escape_json(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}
}  // namespace

std::string to_json_line(const JsonRecord& record) {
  std::string out = "{";
  bool first = true;
  for (const auto& [key, value] : record) {
    if (!first) out += ",";
    first = false;
    out += "\"" + escape_json(key) + "\":";
    std::visit(
        [&out](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, double>)
            out += format_g17(v);
          else if constexpr (std::is_same_v<T, bool>)
            out += v ? "true" : "false";
          else if constexpr (std::is_same_v<T, std::string>)
            out += "\"" + escape_json(v) + "\"";
          else
            out += std::to_string(v);
        },
        value);
  }
  out += "}";
  return out;
}

void write_results(const std::vector<JsonRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw config_error("write_results: cannot open " + path.string());
  for (const auto& rec : records) out << to_json_line(rec) << '\n';
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& data) {
  data.validate();
  CsvTable table;
  for (Eigen::Index j = 0; j < data.X.cols(); ++j)
    table.header.push_back("X" + std::to_string(j + 1));
  table.header.push_back("Y");
  for (Eigen::Index j = 0; j < data.W.cols(); ++j)
    table.header.push_back("W" + std::to_string(j + 1));
  table.rows.reserve(data.n());
  for (int i = 0; i < data.n(); ++i) {
    std::vector<double> row;
    row.reserve(table.header.size());
    for (Eigen::Index j = 0; j < data.X.cols(); ++j) row.push_back(data.X(i, j));
    row.push_back(data.Y[i]);
    for (Eigen::Index j = 0; j < data.W.cols(); ++j) row.push_back(data.W(i, j));
    table.rows.push_back(std::move(row));
  }
  write_csv(path, table);
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  int dx = 0, dw = 0;
  int y_col = -1;
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    const std::string& name = table.header[j];
    if (name.rfind("X", 0) == 0)
      ++dx;
    else if (name == "Y")
      y_col = static_cast<int>(j);
    else if (name.rfind("W", 0) == 0)
      ++dw;
    else
      throw config_error("read_dataset_csv: unexpected column '" + name + "'");
  }
  if (dx < 1 || dw < 1 || y_col != dx)
    throw config_error("read_dataset_csv: expected header X1..Xd,Y,W1..Wdw");
  const int n = static_cast<int>(table.rows.size());
  if (n < 1) throw config_error("read_dataset_csv: no observations");
  Dataset data;
  data.X.resize(n, dx);
  data.Y.resize(n);
  data.W.resize(n, dw);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < dx; ++j) data.X(i, j) = table.rows[i][j];
    data.Y[i] = table.rows[i][dx];
    for (int j = 0; j < dw; ++j) data.W(i, j) = table.rows[i][dx + 1 + j];
  }
  data.validate();
  return data;
}

}  // namespace qbcmr
