#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fracvar/variational.hpp"

namespace fracvar {

enum class DescentDirection {
  newton,            // damped Newton on the free nodal values
  steepest_descent,  // raw negative gradient
};

struct ArmijoParameters {
  double initial_step = 1.0;
  double shrink = 0.5;
  double slope_fraction = 1e-4;
};

struct SolveOptions {
  std::size_t max_iterations = 5000;
  double gradient_tolerance = 1e-8;
  ArmijoParameters step_control;
  double multiplier_tolerance = 1e-8;
  std::size_t max_outer_iterations = 50;
  DescentDirection direction = DescentDirection::newton;

  /// Throws DomainError unless every field is positive and shrink < 1.
  void validate() const;
};

struct SolveReport {
  SampledTrajectory trajectory;
  std::optional<MultiplierVector> multipliers{};
  double objective = 0.0;
  /// Sup-norm of the projected discrete gradient over free unknowns.
  double gradient_norm = 0.0;
  std::size_t iterations = 0;
  /// Interior discrete L2 norm of the (augmented) Euler-Lagrange residual.
  double el_residual_norm = 0.0;
  /// Grid-dependent bound the residual norm is certified against.
  double el_residual_bound = 0.0;
  std::vector<TransversalityReport> transversality{};
  /// int G_j - l_j for every constraint.
  std::vector<double> constraint_residuals{};
  std::optional<double> regularity_determinant{};
  bool regularity_warning = false;
  double complementarity = 0.0;
  std::vector<double> objective_history{};
  bool converged = false;
  std::string diagnostics{};
};

/// Gradient of the discretized functional with respect to the nodal values,
/// via the transpose of the combined Caputo weights applied to dL/dDy plus
/// trapezoid-weighted dL/dy. Entries at fixed nodes are zero.
SampledTrajectory discrete_gradient(const Problem& p, const SampledTrajectory& y);

/// Gradient of int F with F = augmented_integrand(p) at multipliers lam.
SampledTrajectory discrete_gradient(const Problem& p, const SampledTrajectory& y,
                                    std::span<const double> lam);

/// Linear interpolant of the boundary data. Free right ends start at the
/// left value; capped ones at min(left value, cap).
SampledTrajectory initial_trajectory(const Problem& p);

/// Minimizes the discretized functional of an unconstrained problem by a
/// deterministic line-search descent with Armijo backtracking, projecting
/// capped right ends onto y_l(b) <= cap.
SolveReport solve(const Problem& p, const SolveOptions& opts = {});

/// Isoperimetric problems: multiplier iteration (secant / Broyden) wrapped
/// around the unconstrained solver applied to F, with an active set for
/// inequality constraints.
SolveReport solve_isoperimetric(const Problem& p, const SolveOptions& opts = {});

/// Directions sin(k pi (x - a) / (b - a)) on component (j mod N),
/// k = 1 + j / N, j = 0..count-1. They vanish at both ends.
std::vector<SampledTrajectory> bump_directions(const Grid& grid, std::size_t n_components,
                                               std::size_t count);

}  // namespace fracvar
