#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "fracvar/variational.hpp"

namespace fracvar::cli {

/// Malformed problem file. what() reads "line N: ..."; line 0 means the
/// file could not be read and carries no prefix.
class ProblemFileError : public std::runtime_error {
 public:
  ProblemFileError(std::size_t line, const std::string& msg);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Parses the line-oriented problem format:
///
///   # comment
///   [problem]
///   a = 0
///   b = 1
///   alpha = 0.5
///   beta = 0.5
///   gamma = 1
///   n_components = 1
///   grid_points = 501
///   lagrangian = "0.5*D[y1]^2"
///   y_a = [0]
///   y_b = [1]          # or [free], [cap:0.5]
///
///   [constraint]       # zero or more
///   integrand = "y1"
///   mode = eq          # or le
///   value = 0.25
Problem parse_problem_file(std::string_view text);

/// Reads and parses a file; I/O failures get line 0.
Problem load_problem_file(const std::filesystem::path& path);

}  // namespace fracvar::cli
