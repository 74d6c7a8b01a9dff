#pragma once

#include <optional>
#include <span>
#include <vector>

#include "fracvar/expr.hpp"
#include "fracvar/grid.hpp"
#include "fracvar/operators.hpp"

namespace fracvar {

/// Right-end condition of one component.
struct EndCondition {
  enum class Kind { fixed, free, capped };
  Kind kind = Kind::fixed;
  double value = 0.0;  // fixed value or upper bound; unused when free

  static EndCondition fixed(double v) { return {Kind::fixed, v}; }
  static EndCondition free() { return {Kind::free, 0.0}; }
  static EndCondition capped(double upper) { return {Kind::capped, upper}; }
};

struct BoundaryConditions {
  std::vector<double> left;
  std::vector<EndCondition> right;
};

enum class ConstraintMode { equality, inequality };

/// Integral constraint  int_a^b G(x, y, D y) dx  (= or <=)  target.
struct Constraint {
  Expr integrand;
  double target = 0.0;
  ConstraintMode mode = ConstraintMode::equality;
};

struct Problem {
  Grid grid;
  FracOrder alpha;
  FracOrder beta;
  double gamma = 1.0;
  std::size_t n_components = 1;
  Expr lagrangian;
  BoundaryConditions bcs;
  std::vector<Constraint> constraints;

  /// Throws DomainError / PreconditionError when gamma, dimensions or the
  /// variables used by the expressions are inconsistent.
  void validate() const;
};

/// N sampled components on one grid.
class SampledTrajectory {
 public:
  explicit SampledTrajectory(std::vector<SampledFunction> components);
  SampledTrajectory(const Grid& grid, std::size_t n_components);

  const Grid& grid() const noexcept { return components_.front().grid(); }
  std::size_t n_components() const noexcept { return components_.size(); }
  const SampledFunction& operator[](std::size_t i) const { return components_[i]; }
  SampledFunction& operator[](std::size_t i) { return components_[i]; }
  const std::vector<SampledFunction>& components() const noexcept { return components_; }

  /// this + s * other, node-wise.
  SampledTrajectory axpy(double s, const SampledTrajectory& other) const;
  bool is_zero() const;

 private:
  std::vector<SampledFunction> components_;
};

/// Isoperimetric multipliers and, for inequality constraints, the slack
/// functions phi_j. slack[j] is empty for equality constraints.
struct MultiplierVector {
  std::vector<double> lam;
  std::vector<std::optional<SampledFunction>> slack;
};

/// An integrand K(x, y, D y, lam) with its first partials precomputed.
class Integrand {
 public:
  Integrand(Expr k, std::size_t n_components);

  const Expr& expr() const noexcept { return expr_; }
  std::size_t n_components() const noexcept { return d_y_.size(); }
  /// Partial with respect to y<i+1>.
  const Expr& partial_y(std::size_t i) const { return d_y_[i]; }
  /// Partial with respect to D[y<i+1>].
  const Expr& partial_dy(std::size_t i) const { return d_dy_[i]; }

 private:
  Expr expr_;
  std::vector<Expr> d_y_;
  std::vector<Expr> d_dy_;
};

/// Combined Caputo derivative of every component.
std::vector<SampledFunction> fractional_derivatives(const Problem& p,
                                                    const SampledTrajectory& y);

/// Samples an expression along the trajectory. `dy` must come from
/// fractional_derivatives. Evaluation errors are rethrown as EvalError
/// naming the node.
SampledFunction sample_expression(const Expr& e, const SampledTrajectory& y,
                                  std::span<const SampledFunction> dy,
                                  std::span<const double> lam = {});

/// F = L - sum lam_j G_j for equality constraints and
/// F = L + sum lam_j (G_j - l_j/(b-a) + phi_j^2) for inequality ones. The
/// constant and slack terms do not depend on y or D y, so the returned tree
/// keeps only L -/+ lam_j G_j; its partials are exact. Multiplier j is
/// the variable lam<j+1>.
Expr augmented_integrand(const Problem& p);

/// J(y) = int_a^b L[y](x) dx by the trapezoid rule.
double evaluate_functional(const Problem& p, const SampledTrajectory& y);

/// int_a^b G_j[y](x) dx.
double constraint_integral(const Problem& p, const SampledTrajectory& y,
                           std::size_t j);

/// int (G_j - l_j/(b-a)) dx + int phi_j^2 dx; zero when the slack function
/// exactly absorbs the inequality gap.
double slack_constraint_residual(const Problem& p, const SampledTrajectory& y,
                                 std::size_t j, const SampledFunction& slack);

enum class VariationMode { analytic, finite_difference };

/// First (Gateaux) variation of J at y in direction h. Analytic mode
/// integrates sum_i dL/dy_i h_i + dL/dDy_i D h_i; finite-difference mode is
/// (J(y + eps h) - J(y - eps h)) / (2 eps). Throws DomainError for h == 0
/// or eps <= 0.
double first_variation(const Problem& p, const SampledTrajectory& y,
                       const SampledTrajectory& h, VariationMode mode,
                       double eps = 1e-5);

/// Node-wise Euler-Lagrange residual dL/dy_i + D_dual(dL/dDy_i) for an
/// unconstrained problem. Singular markers from the dual operator survive.
SampledTrajectory el_residual(const Problem& p, const SampledTrajectory& y);

/// Same residual for F = L -/+ sum lam_j G_j (see augmented_integrand).
SampledTrajectory augmented_el_residual(const Problem& p,
                                        const SampledTrajectory& y,
                                        const MultiplierVector& m);

/// |LHS - RHS| of the combined integration-by-parts rule
///   int g cD f = gamma [f xI_b^{1-alpha} g]_a^b
///              - (1-gamma) [f aI_x^{1-beta} g]_a^b + int f D_dual g.
/// The singular boundary part of each Riemann-Liouville derivative,
/// g(anchor) |x - anchor|^{-q} / Gamma(1-q), is integrated against f with the
/// product-trapezoid rule; the remaining integrals are trapezoidal.
double ibp_residual(FracOrder alpha, FracOrder beta, double gamma,
                    const SampledFunction& f, const SampledFunction& g);

enum class TransversalityForm {
  consistent,  // both terms act on dL/dD y_l, as in the boundary bracket
  literal,     // first term acts on dL/dy_l, as printed for the free end
};

struct TransversalityReport {
  enum class Status { free, interior, active };

  std::size_t component = 0;
  /// [gamma xI_b^{1-alpha} K1 - (1-gamma) aI_x^{1-beta} K2] at x = b.
  double value = 0.0;
  Status status = Status::free;
  /// Active cap: value <= 0. Free or interior: always true.
  bool sign_ok = true;
  /// (y_l(b) - cap) * value for capped components, 0 otherwise.
  double complementary_product = 0.0;
  /// |value| for free/interior ends, max(value, 0) for an active cap.
  double residual() const;
};

/// Transversality condition at the right end of component l (0-based).
/// Throws PreconditionError when that component is fixed at both ends.
TransversalityReport transversality_residual(
    const Problem& p, const SampledTrajectory& y, std::size_t component,
    TransversalityForm form = TransversalityForm::consistent);

/// Same, for the augmented integrand F with multipliers lam.
TransversalityReport transversality_residual(
    const Problem& p, const SampledTrajectory& y, std::size_t component,
    std::span<const double> lam, TransversalityForm form);

/// max_{j inequality, x} |lam_j phi_j(x)|; 0 when no inequality
/// constraints exist.
double complementarity_residual(const Problem& p, const MultiplierVector& m);

/// det[ dG^i(y; h^j) ], i, j = 1..r, analytic first variations. Every
/// direction must be non-zero and vanish at both ends.
double regularity_determinant(const Problem& p, const SampledTrajectory& y,
                              std::span<const SampledTrajectory> dirs);

/// max_x |y(x)|_2 + max_x |cD y(x)|_2 over non-singular nodes.
double norm_1inf(const Problem& p, const SampledTrajectory& y);

/// Discrete L2 norm sqrt(h sum_k |r(x_k)|^2) over nodes 2..n-3, where the
/// Riemann-Liouville endpoint layers are excluded.
double interior_l2_norm(const SampledTrajectory& r);

/// max_{k in 2..n-3} |r(x_k)|_2.
double interior_max_norm(const SampledTrajectory& r);

}  // namespace fracvar
