#include "fracvar_cli/csv.hpp"

#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

namespace fracvar::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = line.find(',');
    out.push_back(trim(line.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    line = line.substr(comma + 1);
  }
  return out;
}

bool parse_real(std::string_view s, double& v) {
  if (s == "nan" || s == "NaN" || s == "-nan") {
    v = std::numeric_limits<double>::quiet_NaN();
    return true;
  }
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

}  // namespace

std::string format_real(double v) {
  if (std::isnan(v)) return "NaN";
  return fmt::format("{:.16e}", v);
}

CsvTable read_csv(std::istream& in, const std::string& source) {
  CsvTable t;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    const auto fields = split(line);
    double probe = 0.0;
    if (t.columns.empty() && t.header.empty() && !parse_real(fields.front(), probe)) {
      for (auto f : fields) t.header.emplace_back(f);
      continue;
    }
    if (t.columns.empty()) {
      if (!t.header.empty() && fields.size() != t.header.size()) {
        throw CsvError(source + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(t.header.size()) + " fields, got " +
                       std::to_string(fields.size()));
      }
      t.columns.resize(fields.size());
    } else if (fields.size() != t.columns.size()) {
      throw CsvError(source + ":" + std::to_string(line_no) + ": expected " +
                     std::to_string(t.columns.size()) + " fields, got " +
                     std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      double v = 0.0;
      if (!parse_real(fields[c], v)) {
        throw CsvError(source + ":" + std::to_string(line_no) + ": field " +
                       std::to_string(c + 1) + " is not a number: '" + std::string(fields[c]) +
                       "'");
      }
      t.columns[c].push_back(v);
    }
  }
  if (t.columns.empty()) throw CsvError(source + ": no data rows");
  return t;
}

CsvTable read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CsvError("cannot open '" + path.string() + "'");
  return read_csv(in, path.string());
}

void write_csv(std::ostream& out, const CsvTable& table) {
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    out << (c ? "," : "") << table.header[c];
  }
  if (!table.header.empty()) out << '\n';
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      out << (c ? "," : "") << format_real(table.columns[c][r]);
    }
    out << '\n';
  }
}

Grid grid_from_csv(const CsvTable& table) {
  const auto& x = table.columns.front();
  if (x.size() < 3) throw CsvError("at least 3 rows are needed to define a grid");
  Grid grid(x.front(), x.back(), x.size());
  const double tol = 1e-9 * grid.length();
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(std::abs(x[k] - grid.node(k)) <= tol)) {
      throw CsvError("x column is not a uniform grid (row " + std::to_string(k + 1) + ")");
    }
  }
  return grid;
}

CsvTable to_csv(const SampledFunction& f) {
  const auto nodes = f.grid().nodes();
  CsvTable t{{"x", "value"}, {nodes, std::vector<double>(f.values().begin(), f.values().end())}};
  return t;
}

SampledFunction function_from_csv(const CsvTable& table) {
  if (table.columns.size() != 2) throw CsvError("expected two columns: x,value");
  const Grid grid = grid_from_csv(table);
  return SampledFunction(grid, table.columns[1]);
}

CsvTable to_csv(const SampledTrajectory& y) {
  CsvTable t;
  t.header.push_back("x");
  t.columns.push_back(y.grid().nodes());
  for (std::size_t i = 0; i < y.n_components(); ++i) {
    t.header.push_back("y" + std::to_string(i + 1));
    t.columns.emplace_back(y[i].values().begin(), y[i].values().end());
  }
  return t;
}

SampledTrajectory trajectory_from_csv(const CsvTable& table, const Grid& grid,
                                      std::size_t n_components) {
  if (table.columns.size() != n_components + 1) {
    throw CsvError("expected " + std::to_string(n_components + 1) + " columns: x,y1..y" +
                   std::to_string(n_components));
  }
  if (table.rows() != grid.size()) {
    throw CsvError("trajectory has " + std::to_string(table.rows()) + " rows, grid has " +
                   std::to_string(grid.size()) + " nodes");
  }
  const double tol = 1e-9 * grid.length();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!(std::abs(table.columns[0][k] - grid.node(k)) <= tol)) {
      throw CsvError("trajectory x column does not match the problem grid (row " +
                     std::to_string(k + 1) + ")");
    }
  }
  std::vector<SampledFunction> comps;
  for (std::size_t i = 0; i < n_components; ++i) comps.emplace_back(grid, table.columns[i + 1]);
  return SampledTrajectory(std::move(comps));
}

}  // namespace fracvar::cli
