#pragma once

#include <iosfwd>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracvar/variational.hpp"

namespace fracvar::cli {

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Column-major numeric table. The header row is optional on input.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
};

/// Reals round-trip exactly (17 significant digits); singular nodes are
/// written as "NaN". Output does not depend on the locale.
std::string format_real(double v);

CsvTable read_csv(std::istream& in, const std::string& source = "<input>");
CsvTable read_csv_file(const std::filesystem::path& path);
void write_csv(std::ostream& out, const CsvTable& table);

/// Grid taken from the x column (first column).
Grid grid_from_csv(const CsvTable& table);

/// `x,value` table for a sampled function and back.
CsvTable to_csv(const SampledFunction& f);
SampledFunction function_from_csv(const CsvTable& table);

/// `x,y1,...,yN` table for a trajectory and back. The x column must match
/// `grid` when one is given.
CsvTable to_csv(const SampledTrajectory& y);
SampledTrajectory trajectory_from_csv(const CsvTable& table, const Grid& grid,
                                      std::size_t n_components);

}  // namespace fracvar::cli
