#include "aniso/run_record.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace aniso {

void RunRecord::add_row(std::vector<std::optional<double>> row) {
  if (row.size() != columns.size()) {
    throw std::invalid_argument("row width does not match columns");
  }
  rows.push_back(std::move(row));
}

std::string RunRecord::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  for (size_t i = 0; i < columns.size(); ++i) {
    out << columns[i] << (i + 1 < columns.size() ? "," : "");
  }
  out << "\n";
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (row[i]) out << *row[i];
      if (i + 1 < row.size()) out << ",";
    }
    out << "\n";
  }
  return out.str();
}

void RunRecord::write_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << to_csv();
}

std::optional<double> RunRecord::last(const std::string& column) const {
  size_t col = columns.size();
  for (size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == column) col = i;
  }
  if (col == columns.size()) throw std::invalid_argument("no column " + column);
  for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
    if ((*it)[col]) return (*it)[col];
  }
  return std::nullopt;
}

}  // namespace aniso
