#pragma once

#include <optional>
#include <string>
#include <vector>

namespace aniso {

/// Per-iteration time series of a run. Cells are optional: a metric that
/// was not computed at an iteration is written as an empty CSV field.
struct RunRecord {
  std::vector<std::string> columns;
  std::vector<std::vector<std::optional<double>>> rows;

  void add_row(std::vector<std::optional<double>> row);
  std::string to_csv() const;
  void write_csv(const std::string& path) const;
  /// Last non-blank value in the named column.
  std::optional<double> last(const std::string& column) const;
};

}  // namespace aniso
