#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fracvar/variational.hpp"

namespace fracvar::cli {

/// Process exit codes. These are a stable contract.
enum ExitCode : int {
  exit_ok = 0,
  exit_domain = 1,         // numeric domain error
  exit_input = 2,          // bad flags, unreadable or malformed input
  exit_check_failed = 3,
  exit_not_converged = 4,
};

/// Runs one command line (without the program name). Data goes to `out`,
/// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct RandomSearchResult {
  double best_objective = 0.0;
  std::size_t evaluated = 0;  // samples whose integrand was finite
};

/// Best objective over `samples` random feasible trajectories: free nodal
/// values drawn uniformly from [lo - 1, hi + 1], lo/hi spanning the boundary
/// data; capped ends stay below their cap. Deterministic in `seed`.
RandomSearchResult random_search(const Problem& p, std::uint64_t seed, std::size_t samples);

/// Multipliers `lam` with constant slack sqrt(max(0, (l - int G)/(b - a)))
/// for every inequality constraint, evaluated at `y`.
MultiplierVector multipliers_with_slack(const Problem& p, const SampledTrajectory& y,
                                        std::vector<double> lam);

}  // namespace fracvar::cli
