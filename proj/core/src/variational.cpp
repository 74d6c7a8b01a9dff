#include "fracvar/variational.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "fracvar/errors.hpp"

namespace fracvar {

namespace {

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (!(a == b)) throw PreconditionError(std::string(what) + ": grid mismatch");
}

void require_shape(const Problem& p, const SampledTrajectory& y, const char* what) {
  require_same_grid(p.grid, y.grid(), what);
  if (y.n_components() != p.n_components) {
    throw PreconditionError(std::string(what) + ": trajectory has " +
                            std::to_string(y.n_components()) + " components, problem has " +
                            std::to_string(p.n_components));
  }
}

// Node-wise environment assembly.
class NodeEnv {
 public:
  NodeEnv(const SampledTrajectory& y, std::span<const SampledFunction> dy,
          std::span<const double> lam)
      : y_(y), dy_(dy), yv_(y.n_components()), dyv_(y.n_components()), lam_(lam) {}

  EvalEnv at(std::size_t k) {
    for (std::size_t i = 0; i < yv_.size(); ++i) {
      yv_[i] = y_[i][k];
      dyv_[i] = dy_[i][k];
    }
    return EvalEnv{y_.grid().node(k), yv_, dyv_, lam_};
  }

 private:
  const SampledTrajectory& y_;
  std::span<const SampledFunction> dy_;
  std::vector<double> yv_;
  std::vector<double> dyv_;
  std::span<const double> lam_;
};

double variation_analytic(const Integrand& k, const Problem& p,
                          const SampledTrajectory& y, const SampledTrajectory& h,
                          std::span<const double> lam) {
  const auto dy = fractional_derivatives(p, y);
  const auto dh = fractional_derivatives(p, h);
  double total = 0.0;
  for (std::size_t i = 0; i < p.n_components; ++i) {
    const SampledFunction ky = sample_expression(k.partial_y(i), y, dy, lam);
    const SampledFunction kd = sample_expression(k.partial_dy(i), y, dy, lam);
    total += trapezoid_product(ky, h[i]) + trapezoid_product(kd, dh[i]);
  }
  return total;
}

SampledTrajectory el_residual_for(const Integrand& k, const Problem& p,
                                  const SampledTrajectory& y,
                                  std::span<const double> lam) {
  const auto dy = fractional_derivatives(p, y);
  std::vector<SampledFunction> out;
  for (std::size_t i = 0; i < p.n_components; ++i) {
    SampledFunction r = sample_expression(k.partial_y(i), y, dy, lam);
    const SampledFunction kd = sample_expression(k.partial_dy(i), y, dy, lam);
    const SampledFunction dual = combined_rlfd(p.alpha, p.beta, p.gamma, kd);
    for (std::size_t n = 0; n < r.size(); ++n) r[n] += dual[n];
    out.push_back(std::move(r));
  }
  return SampledTrajectory(std::move(out));
}

void require_nonzero_direction(const SampledTrajectory& h) {
  if (h.is_zero()) throw DomainError("variation direction must be non-zero");
}

}  // namespace

// ---------------------------------------------------------------------------

void Problem::validate() const {
  check_gamma(gamma);
  if (n_components == 0) throw PreconditionError("problem needs at least one component");
  if (bcs.left.size() != n_components || bcs.right.size() != n_components) {
    throw PreconditionError("boundary conditions must list one value per component");
  }
  auto check_expr = [&](const Expr& e, const std::string& what) {
    if (e.max_index(VarKind::y) > n_components || e.max_index(VarKind::dy) > n_components) {
      throw PreconditionError(what + " refers to a component beyond n_components");
    }
    if (e.max_index(VarKind::lam) > 0) {
      throw PreconditionError(what + " must not refer to multipliers");
    }
  };
  check_expr(lagrangian, "lagrangian");
  for (std::size_t j = 0; j < constraints.size(); ++j) {
    check_expr(constraints[j].integrand, "constraint " + std::to_string(j + 1));
  }
}

SampledTrajectory::SampledTrajectory(std::vector<SampledFunction> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw PreconditionError("trajectory needs at least one component");
  for (const auto& c : components_) {
    require_same_grid(components_.front().grid(), c.grid(), "trajectory");
  }
}

SampledTrajectory::SampledTrajectory(const Grid& grid, std::size_t n_components)
    : components_(n_components, SampledFunction(grid)) {
  if (n_components == 0) throw PreconditionError("trajectory needs at least one component");
}

SampledTrajectory SampledTrajectory::axpy(double s, const SampledTrajectory& other) const {
  require_same_grid(grid(), other.grid(), "axpy");
  if (other.n_components() != n_components()) throw PreconditionError("axpy: component mismatch");
  SampledTrajectory out = *this;
  for (std::size_t i = 0; i < n_components(); ++i) {
    for (std::size_t k = 0; k < grid().size(); ++k) out[i][k] += s * other[i][k];
  }
  return out;
}

bool SampledTrajectory::is_zero() const {
  return std::all_of(components_.begin(), components_.end(), [](const SampledFunction& f) {
    const auto v = f.values();
    return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
  });
}

Integrand::Integrand(Expr k, std::size_t n_components) : expr_(std::move(k)) {
  for (std::size_t i = 1; i <= n_components; ++i) {
    d_y_.push_back(partial(expr_, VarId::y(i)));
    d_dy_.push_back(partial(expr_, VarId::dy(i)));
  }
}

std::vector<SampledFunction> fractional_derivatives(const Problem& p,
                                                    const SampledTrajectory& y) {
  std::vector<SampledFunction> out;
  out.reserve(y.n_components());
  for (const auto& c : y.components()) {
    out.push_back(combined_cfd(p.alpha, p.beta, p.gamma, c));
  }
  return out;
}

SampledFunction sample_expression(const Expr& e, const SampledTrajectory& y,
                                  std::span<const SampledFunction> dy,
                                  std::span<const double> lam) {
  const Grid& grid = y.grid();
  SampledFunction out(grid);
  if (const auto* c = std::get_if<Constant>(&e.node().v)) {
    std::fill(out.values().begin(), out.values().end(), c->value);
    return out;
  }
  NodeEnv env(y, dy, lam);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    try {
      out[k] = eval(e, env.at(k));
    } catch (const EvalError& err) {
      throw EvalError(std::string(err.what()) + " at node " + std::to_string(k) +
                      " (x=" + std::to_string(grid.node(k)) + ")");
    }
  }
  return out;
}

Expr augmented_integrand(const Problem& p) {
  Expr f = p.lagrangian;
  for (std::size_t j = 0; j < p.constraints.size(); ++j) {
    const Constraint& c = p.constraints[j];
    Expr term = Expr::binary(BinaryOp::mul, Expr::variable(VarId::lam(j + 1)), c.integrand);
    f = Expr::binary(c.mode == ConstraintMode::equality ? BinaryOp::sub : BinaryOp::add, f, term);
  }
  return f;
}

double evaluate_functional(const Problem& p, const SampledTrajectory& y) {
  require_shape(p, y, "evaluate_functional");
  const auto dy = fractional_derivatives(p, y);
  return trapezoid(sample_expression(p.lagrangian, y, dy));
}

double constraint_integral(const Problem& p, const SampledTrajectory& y, std::size_t j) {
  require_shape(p, y, "constraint_integral");
  if (j >= p.constraints.size()) throw PreconditionError("constraint index out of range");
  const auto dy = fractional_derivatives(p, y);
  return trapezoid(sample_expression(p.constraints[j].integrand, y, dy));
}

double slack_constraint_residual(const Problem& p, const SampledTrajectory& y,
                                 std::size_t j, const SampledFunction& slack) {
  require_same_grid(p.grid, slack.grid(), "slack_constraint_residual");
  const auto dy = fractional_derivatives(p, y);
  SampledFunction shifted = sample_expression(p.constraints[j].integrand, y, dy);
  const double spread = p.constraints[j].target / p.grid.length();
  for (std::size_t k = 0; k < shifted.size(); ++k) shifted[k] -= spread;
  return trapezoid(shifted) + trapezoid_product(slack, slack);
}

double first_variation(const Problem& p, const SampledTrajectory& y,
                       const SampledTrajectory& h, VariationMode mode, double eps) {
  require_shape(p, y, "first_variation");
  require_shape(p, h, "first_variation");
  require_nonzero_direction(h);
  if (mode == VariationMode::finite_difference) {
    if (!(eps > 0.0)) throw DomainError("finite-difference step must be positive");
    const double plus = evaluate_functional(p, y.axpy(eps, h));
    const double minus = evaluate_functional(p, y.axpy(-eps, h));
    return (plus - minus) / (2.0 * eps);
  }
  return variation_analytic(Integrand(p.lagrangian, p.n_components), p, y, h, {});
}

SampledTrajectory el_residual(const Problem& p, const SampledTrajectory& y) {
  require_shape(p, y, "el_residual");
  if (!p.constraints.empty()) {
    throw PreconditionError("el_residual is for unconstrained problems; use augmented_el_residual");
  }
  return el_residual_for(Integrand(p.lagrangian, p.n_components), p, y, {});
}

SampledTrajectory augmented_el_residual(const Problem& p, const SampledTrajectory& y,
                                        const MultiplierVector& m) {
  require_shape(p, y, "augmented_el_residual");
  const std::size_t r = p.constraints.size();
  if (r == 0) throw PreconditionError("augmented_el_residual needs at least one constraint");
  if (m.lam.size() != r) {
    throw PreconditionError("multiplier count mismatch: got " + std::to_string(m.lam.size()) +
                            ", expected " + std::to_string(r));
  }
  for (std::size_t j = 0; j < r; ++j) {
    if (p.constraints[j].mode == ConstraintMode::inequality &&
        (m.slack.size() != r || !m.slack[j].has_value())) {
      throw PreconditionError("slack samples missing for inequality constraint " +
                              std::to_string(j + 1));
    }
  }
  return el_residual_for(Integrand(augmented_integrand(p), p.n_components), p, y, m.lam);
}

double ibp_residual(FracOrder alpha, FracOrder beta, double gamma, const SampledFunction& f,
                    const SampledFunction& g) {
  check_gamma(gamma);
  require_same_grid(f.grid(), g.grid(), "ibp_residual");
  if (f.has_singular() || g.has_singular()) {
    throw PreconditionError("ibp_residual: inputs must be finite");
  }
  const std::size_t last = f.size() - 1;
  const double lhs = trapezoid_product(g, combined_cfd(alpha, beta, gamma, f));

  double rhs = 0.0;
  if (gamma != 0.0) {
    // gamma [f xI_b^{1-alpha} g]_a^b + gamma int f xD_b^alpha g
    const FracOrder q(1.0 - alpha.value());
    const SampledFunction ig = rlfi(Side::right, q, g);
    const double bracket = f[last] * ig[last] - f[0] * ig[0];
    const double smooth = trapezoid_product(f, cfd(Side::right, alpha, g));
    const double singular = g[last] * rlfi(Side::left, q, f)[last];
    rhs += gamma * (bracket + smooth + singular);
  }
  if (gamma != 1.0) {
    // -(1-gamma) [f aI_x^{1-beta} g]_a^b + (1-gamma) int f aD_x^beta g
    const FracOrder q(1.0 - beta.value());
    const SampledFunction ig = rlfi(Side::left, q, g);
    const double bracket = -(f[last] * ig[last] - f[0] * ig[0]);
    const double smooth = trapezoid_product(f, cfd(Side::left, beta, g));
    const double singular = g[0] * rlfi(Side::right, q, f)[0];
    rhs += (1.0 - gamma) * (bracket + smooth + singular);
  }
  return std::abs(lhs - rhs);
}

double TransversalityReport::residual() const {
  if (status == Status::active) return std::max(value, 0.0);
  return std::abs(value);
}

TransversalityReport transversality_residual(const Problem& p, const SampledTrajectory& y,
                                             std::size_t component,
                                             TransversalityForm form) {
  return transversality_residual(p, y, component, {}, form);
}

TransversalityReport transversality_residual(const Problem& p, const SampledTrajectory& y,
                                             std::size_t component,
                                             std::span<const double> lam,
                                             TransversalityForm form) {
  require_shape(p, y, "transversality_residual");
  if (component >= p.n_components) throw PreconditionError("component index out of range");
  const EndCondition& end = p.bcs.right[component];
  if (end.kind == EndCondition::Kind::fixed) {
    throw PreconditionError("component " + std::to_string(component + 1) +
                            " is fixed at both ends");
  }
  const Integrand k(lam.empty() ? p.lagrangian : augmented_integrand(p), p.n_components);
  const auto dy = fractional_derivatives(p, y);
  const SampledFunction kd = sample_expression(k.partial_dy(component), y, dy, lam);
  const std::size_t last = p.grid.size() - 1;

  double value = 0.0;
  if (p.gamma != 0.0) {
    const SampledFunction first =
        form == TransversalityForm::literal
            ? sample_expression(k.partial_y(component), y, dy, lam)
            : kd;
    value += p.gamma * rlfi(Side::right, FracOrder(1.0 - p.alpha.value()), first)[last];
  }
  if (p.gamma != 1.0) {
    value -= (1.0 - p.gamma) * rlfi(Side::left, FracOrder(1.0 - p.beta.value()), kd)[last];
  }

  TransversalityReport rep;
  rep.component = component;
  rep.value = value;
  if (end.kind == EndCondition::Kind::free) return rep;

  const double yb = y[component][last];
  const double slack_tol = 1e-9 * std::max(1.0, std::abs(end.value));
  rep.status = yb < end.value - slack_tol ? TransversalityReport::Status::interior
                                          : TransversalityReport::Status::active;
  rep.sign_ok = rep.status == TransversalityReport::Status::interior || value <= 0.0;
  rep.complementary_product = (yb - end.value) * value;
  return rep;
}

double complementarity_residual(const Problem& p, const MultiplierVector& m) {
  double worst = 0.0;
  for (std::size_t j = 0; j < p.constraints.size(); ++j) {
    if (p.constraints[j].mode != ConstraintMode::inequality) continue;
    if (j >= m.lam.size()) throw PreconditionError("multiplier count mismatch");
    if (j >= m.slack.size() || !m.slack[j].has_value()) {
      throw PreconditionError("slack samples missing for inequality constraint " +
                              std::to_string(j + 1));
    }
    for (double phi : m.slack[j]->values()) {
      worst = std::max(worst, std::abs(m.lam[j] * phi));
    }
  }
  return worst;
}

double regularity_determinant(const Problem& p, const SampledTrajectory& y,
                              std::span<const SampledTrajectory> dirs) {
  require_shape(p, y, "regularity_determinant");
  const std::size_t r = p.constraints.size();
  if (r == 0) throw PreconditionError("regularity_determinant needs at least one constraint");
  if (dirs.size() != r) {
    throw PreconditionError("regularity_determinant: " + std::to_string(dirs.size()) +
                            " directions for " + std::to_string(r) + " constraints");
  }
  const std::size_t last = p.grid.size() - 1;
  for (const auto& h : dirs) {
    require_shape(p, h, "regularity_determinant");
    require_nonzero_direction(h);
    for (const auto& c : h.components()) {
      if (c[0] != 0.0 || c[last] != 0.0) {
        throw PreconditionError("regularity directions must vanish at both endpoints");
      }
    }
  }
  Eigen::MatrixXd m(r, r);
  for (std::size_t i = 0; i < r; ++i) {
    const Integrand g(p.constraints[i].integrand, p.n_components);
    for (std::size_t j = 0; j < r; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          variation_analytic(g, p, y, dirs[j], {});
    }
  }
  if (r == 1) return m(0, 0);
  return m.partialPivLu().determinant();
}

double norm_1inf(const Problem& p, const SampledTrajectory& y) {
  require_shape(p, y, "norm_1inf");
  const auto dy = fractional_derivatives(p, y);
  double max_y = 0.0;
  double max_dy = 0.0;
  for (std::size_t k = 0; k < p.grid.size(); ++k) {
    double sy = 0.0;
    double sd = 0.0;
    bool singular = false;
    for (std::size_t i = 0; i < p.n_components; ++i) {
      sy += y[i][k] * y[i][k];
      if (dy[i].singular(k)) singular = true;
      sd += dy[i][k] * dy[i][k];
    }
    max_y = std::max(max_y, std::sqrt(sy));
    if (!singular) max_dy = std::max(max_dy, std::sqrt(sd));
  }
  return max_y + max_dy;
}

double interior_l2_norm(const SampledTrajectory& r) {
  const Grid& g = r.grid();
  double sum = 0.0;
  for (std::size_t k = 2; k + 3 <= g.size(); ++k) {
    for (const auto& c : r.components()) {
      if (!c.singular(k)) sum += c[k] * c[k];
    }
  }
  return std::sqrt(g.step() * sum);
}

double interior_max_norm(const SampledTrajectory& r) {
  const Grid& g = r.grid();
  double worst = 0.0;
  for (std::size_t k = 2; k + 3 <= g.size(); ++k) {
    double s = 0.0;
    for (const auto& c : r.components()) {
      if (!c.singular(k)) s += c[k] * c[k];
    }
    worst = std::max(worst, std::sqrt(s));
  }
  return worst;
}

}  // namespace fracvar
