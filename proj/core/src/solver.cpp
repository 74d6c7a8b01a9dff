#include "fracvar/solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fracvar/errors.hpp"

namespace fracvar {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

bool is_fixed_node(const Problem& p, std::size_t i, std::size_t k) {
  const std::size_t n = p.grid.size();
  if (k == 0) return true;
  if (k + 1 == n) return p.bcs.right[i].kind == EndCondition::Kind::fixed;
  return false;
}

bool is_capped_end(const Problem& p, std::size_t i, std::size_t k) {
  return k + 1 == p.grid.size() && p.bcs.right[i].kind == EndCondition::Kind::capped;
}

// Flat index of unknown (component i, node k).
std::size_t flat(const Problem& p, std::size_t i, std::size_t k) { return i * p.grid.size() + k; }

SampledTrajectory gradient_of(const Integrand& k, const Problem& p, const SampledTrajectory& y,
                              std::span<const double> lam) {
  const Grid& grid = p.grid;
  const std::size_t n = grid.size();
  const auto dy = fractional_derivatives(p, y);
  std::vector<SampledFunction> out;
  for (std::size_t i = 0; i < p.n_components; ++i) {
    const SampledFunction ky = sample_expression(k.partial_y(i), y, dy, lam);
    SampledFunction kd = sample_expression(k.partial_dy(i), y, dy, lam);
    for (std::size_t m = 0; m < n; ++m) kd[m] *= grid.weight(m);
    const std::vector<double> adj =
        combined_cfd_transpose(p.alpha, p.beta, p.gamma, grid, kd.values());
    SampledFunction g(grid);
    for (std::size_t m = 0; m < n; ++m) {
      g[m] = is_fixed_node(p, i, m) ? 0.0 : grid.weight(m) * ky[m] + adj[m];
    }
    out.push_back(std::move(g));
  }
  return SampledTrajectory(std::move(out));
}

double objective_of(const Expr& f, const Problem& p, const SampledTrajectory& y,
                    std::span<const double> lam) {
  const auto dy = fractional_derivatives(p, y);
  return trapezoid(sample_expression(f, y, dy, lam));
}

// Second partials of an integrand, indexed over (y1..yN, D[y1]..D[yN]).
class HessianModel {
 public:
  HessianModel(const Expr& f, const Problem& p) : p_(p), n_vars_(2 * p.n_components) {
    std::vector<VarId> vars;
    for (std::size_t i = 1; i <= p.n_components; ++i) vars.push_back(VarId::y(i));
    for (std::size_t i = 1; i <= p.n_components; ++i) vars.push_back(VarId::dy(i));
    for (std::size_t a = 0; a < n_vars_; ++a) {
      const Expr first = partial(f, vars[a]);
      for (std::size_t b = 0; b < n_vars_; ++b) second_.push_back(partial(first, vars[b]));
    }
    const auto c = combined_cfd_matrix(p.alpha, p.beta, p.gamma, p.grid);
    const auto n = static_cast<Eigen::Index>(p.grid.size());
    cmat_ = Eigen::Map<const RowMatrix>(c.data(), n, n);
  }

  // Full Hessian of the discretized functional over all nodal values.
  Eigen::MatrixXd assemble(const SampledTrajectory& y, std::span<const double> lam) const {
    const std::size_t n = p_.grid.size();
    const std::size_t nc = p_.n_components;
    const auto dy = fractional_derivatives(p_, y);
    const auto en = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(en * static_cast<Eigen::Index>(nc),
                                              en * static_cast<Eigen::Index>(nc));
    Eigen::VectorXd w(en);
    for (std::size_t k = 0; k < n; ++k) w(static_cast<Eigen::Index>(k)) = p_.grid.weight(k);

    auto weighted = [&](const Expr& e) -> std::optional<Eigen::VectorXd> {
      if (const auto* c = std::get_if<Constant>(&e.node().v); c && c->value == 0.0) {
        return std::nullopt;
      }
      const SampledFunction s = sample_expression(e, y, dy, lam);
      Eigen::VectorXd v(en);
      for (std::size_t k = 0; k < n; ++k) {
        v(static_cast<Eigen::Index>(k)) = w(static_cast<Eigen::Index>(k)) * s[k];
      }
      return v;
    };

    for (std::size_t i = 0; i < nc; ++i) {
      for (std::size_t j = 0; j < nc; ++j) {
        Eigen::MatrixXd block = Eigen::MatrixXd::Zero(en, en);
        if (auto v = weighted(second(i, j))) block.diagonal() += *v;
        if (auto v = weighted(second(i, nc + j))) block += v->asDiagonal() * cmat_;
        if (auto v = weighted(second(nc + i, j))) block += cmat_.transpose() * v->asDiagonal();
        if (auto v = weighted(second(nc + i, nc + j))) {
          block += cmat_.transpose() * (v->asDiagonal() * cmat_);
        }
        h.block(static_cast<Eigen::Index>(i) * en, static_cast<Eigen::Index>(j) * en, en, en) =
            block;
      }
    }
    return h;
  }

 private:
  const Expr& second(std::size_t a, std::size_t b) const { return second_[a * n_vars_ + b]; }

  const Problem& p_;
  std::size_t n_vars_;
  std::vector<Expr> second_;
  Eigen::MatrixXd cmat_;
};

struct InnerResult {
  SampledTrajectory y;
  double objective = 0.0;
  double gradient_norm = 0.0;
  std::size_t iterations = 0;
  std::vector<double> history;
  bool converged = false;
  std::string diagnostics;
};

// Projected gradient: a capped end sitting on its bound with a negative
// gradient (descent would push it above the cap) is frozen.
std::vector<bool> frozen_mask(const Problem& p, const SampledTrajectory& y,
                              const SampledTrajectory& g) {
  const std::size_t n = p.grid.size();
  std::vector<bool> frozen(p.n_components * n, false);
  for (std::size_t i = 0; i < p.n_components; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      if (is_fixed_node(p, i, k)) {
        frozen[flat(p, i, k)] = true;
      } else if (is_capped_end(p, i, k) && y[i][k] >= p.bcs.right[i].value && g[i][k] < 0.0) {
        frozen[flat(p, i, k)] = true;
      }
    }
  }
  return frozen;
}

void project(const Problem& p, SampledTrajectory& y) {
  const std::size_t last = p.grid.size() - 1;
  for (std::size_t i = 0; i < p.n_components; ++i) {
    if (p.bcs.right[i].kind == EndCondition::Kind::capped) {
      y[i][last] = std::min(y[i][last], p.bcs.right[i].value);
    }
  }
}

std::optional<Eigen::VectorXd> newton_direction(const Eigen::MatrixXd& hff,
                                                const Eigen::VectorXd& gf) {
  Eigen::LLT<Eigen::MatrixXd> llt(hff);
  if (llt.info() == Eigen::Success) {
    Eigen::VectorXd d = llt.solve(-gf);
    if (d.allFinite() && gf.dot(d) < 0.0) return d;
  }
  const double scale = std::max(1.0, hff.diagonal().cwiseAbs().maxCoeff());
  double shift = 1e-8 * scale;
  for (int attempt = 0; attempt < 30; ++attempt, shift *= 10.0) {
    Eigen::MatrixXd shifted = hff;
    shifted.diagonal().array() += shift;
    Eigen::LLT<Eigen::MatrixXd> s(shifted);
    if (s.info() != Eigen::Success) continue;
    Eigen::VectorXd d = s.solve(-gf);
    if (d.allFinite() && gf.dot(d) < 0.0) return d;
  }
  return std::nullopt;
}

InnerResult minimize(const Problem& p, const Expr& f, std::span<const double> lam,
                     SampledTrajectory y, const SolveOptions& opts) {
  const Integrand k(f, p.n_components);
  const std::size_t n = p.grid.size();
  const std::size_t total = p.n_components * n;
  std::optional<HessianModel> hessian;
  if (opts.direction == DescentDirection::newton) hessian.emplace(f, p);

  InnerResult res{y, 0.0, 0.0, 0, {}, false, {}};
  project(p, y);
  double obj = objective_of(f, p, y, lam);
  res.history.push_back(obj);

  std::size_t it = 0;
  for (;; ++it) {
    const SampledTrajectory g = gradient_of(k, p, y, lam);
    const std::vector<bool> frozen = frozen_mask(p, y, g);
    Eigen::VectorXd gv(static_cast<Eigen::Index>(total));
    double gnorm = 0.0;
    std::vector<std::size_t> free_idx;
    for (std::size_t i = 0; i < p.n_components; ++i) {
      for (std::size_t m = 0; m < n; ++m) {
        const std::size_t q = flat(p, i, m);
        gv(static_cast<Eigen::Index>(q)) = g[i][m];
        if (!frozen[q]) {
          free_idx.push_back(q);
          gnorm = std::max(gnorm, std::abs(g[i][m]));
        }
      }
    }
    res.gradient_norm = gnorm;
    if (gnorm <= opts.gradient_tolerance) {
      res.converged = true;
      break;
    }
    if (it >= opts.max_iterations) {
      res.diagnostics = "iteration limit reached with gradient norm " + std::to_string(gnorm);
      break;
    }

    const auto nf = static_cast<Eigen::Index>(free_idx.size());
    Eigen::VectorXd gf(nf);
    for (Eigen::Index a = 0; a < nf; ++a) gf(a) = gv(static_cast<Eigen::Index>(free_idx[a]));

    Eigen::VectorXd dir = -gf;
    if (hessian) {
      const Eigen::MatrixXd h = hessian->assemble(y, lam);
      Eigen::MatrixXd hff(nf, nf);
      for (Eigen::Index a = 0; a < nf; ++a) {
        for (Eigen::Index b = 0; b < nf; ++b) {
          hff(a, b) = h(static_cast<Eigen::Index>(free_idx[a]),
                        static_cast<Eigen::Index>(free_idx[b]));
        }
      }
      if (auto d = newton_direction(hff, gf)) dir = *d;
    }

    // Armijo backtracking along the projected path.
    bool accepted = false;
    double step = opts.step_control.initial_step;
    for (int tries = 0; tries < 200 && step > 0.0; ++tries, step *= opts.step_control.shrink) {
      SampledTrajectory trial = y;
      for (Eigen::Index a = 0; a < nf; ++a) {
        const std::size_t q = free_idx[a];
        trial[q / n][q % n] += step * dir(a);
      }
      project(p, trial);
      double slope = 0.0;
      for (Eigen::Index a = 0; a < nf; ++a) {
        const std::size_t q = free_idx[a];
        slope += gf(a) * (trial[q / n][q % n] - y[q / n][q % n]);
      }
      double trial_obj = 0.0;
      try {
        trial_obj = objective_of(f, p, trial, lam);
      } catch (const EvalError&) {
        continue;  // left the integrand's domain; shorten the step
      }
      if (trial_obj <= obj + opts.step_control.slope_fraction * slope) {
        y = std::move(trial);
        obj = trial_obj;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      res.diagnostics = "line search could not decrease the objective (gradient norm " +
                        std::to_string(gnorm) + ")";
      break;
    }
    res.history.push_back(obj);
  }
  res.y = std::move(y);
  res.objective = obj;
  res.iterations = it;
  return res;
}

// Same problem with every constraint treated as an equality, so that
// augmented_integrand yields L - sum mu_j G_j uniformly.
Problem with_equality_signs(const Problem& p) {
  Problem q = p;
  for (auto& c : q.constraints) c.mode = ConstraintMode::equality;
  return q;
}

double bound_for(const Problem& p, const SampledTrajectory& y, std::span<const double> lam) {
  // The Riemann-Liouville dual of a sampled dL/dDy carries a boundary layer
  // of width O(h) whose interior L2 mass scales like sqrt(h) times the
  // boundary magnitude of dL/dDy.
  const Integrand k(lam.empty() ? p.lagrangian : augmented_integrand(p), p.n_components);
  const auto dy = fractional_derivatives(p, y);
  double scale = 1.0;
  for (std::size_t i = 0; i < p.n_components; ++i) {
    const SampledFunction kd = sample_expression(k.partial_dy(i), y, dy, lam);
    for (double v : kd.values()) scale = std::max(scale, std::abs(v));
  }
  return std::sqrt(p.grid.step()) * scale;
}

void fill_transversality(const Problem& p, SolveReport& rep, std::span<const double> lam) {
  for (std::size_t i = 0; i < p.n_components; ++i) {
    if (p.bcs.right[i].kind == EndCondition::Kind::fixed) continue;
    rep.transversality.push_back(
        transversality_residual(p, rep.trajectory, i, lam, TransversalityForm::consistent));
  }
}

}  // namespace

void SolveOptions::validate() const {
  if (max_iterations == 0 || max_outer_iterations == 0) {
    throw DomainError("iteration limits must be positive");
  }
  if (!(gradient_tolerance > 0.0) || !(multiplier_tolerance > 0.0)) {
    throw DomainError("tolerances must be positive");
  }
  if (!(step_control.initial_step > 0.0) || !(step_control.shrink > 0.0) ||
      !(step_control.shrink < 1.0) || !(step_control.slope_fraction > 0.0)) {
    throw DomainError("Armijo parameters must be positive with shrink < 1");
  }
}

SampledTrajectory discrete_gradient(const Problem& p, const SampledTrajectory& y) {
  p.validate();
  return gradient_of(Integrand(p.lagrangian, p.n_components), p, y, {});
}

SampledTrajectory discrete_gradient(const Problem& p, const SampledTrajectory& y,
                                    std::span<const double> lam) {
  p.validate();
  if (lam.size() != p.constraints.size()) throw PreconditionError("multiplier count mismatch");
  return gradient_of(Integrand(augmented_integrand(p), p.n_components), p, y, lam);
}

SampledTrajectory initial_trajectory(const Problem& p) {
  const Grid& grid = p.grid;
  std::vector<SampledFunction> comps;
  for (std::size_t i = 0; i < p.n_components; ++i) {
    const double ya = p.bcs.left[i];
    const EndCondition& end = p.bcs.right[i];
    double yb = ya;
    if (end.kind == EndCondition::Kind::fixed) yb = end.value;
    if (end.kind == EndCondition::Kind::capped) yb = std::min(ya, end.value);
    SampledFunction c(grid);
    const std::size_t last = grid.size() - 1;
    for (std::size_t k = 0; k <= last; ++k) {
      const double t = static_cast<double>(k) / static_cast<double>(last);
      c[k] = ya + (yb - ya) * t;
    }
    c[last] = yb;
    comps.push_back(std::move(c));
  }
  return SampledTrajectory(std::move(comps));
}

std::vector<SampledTrajectory> bump_directions(const Grid& grid, std::size_t n_components,
                                               std::size_t count) {
  std::vector<SampledTrajectory> dirs;
  const std::size_t last = grid.size() - 1;
  for (std::size_t j = 0; j < count; ++j) {
    SampledTrajectory h(grid, n_components);
    const double freq = static_cast<double>(1 + j / n_components);
    for (std::size_t k = 1; k < last; ++k) {
      const double t = (grid.node(k) - grid.a()) / grid.length();
      h[j % n_components][k] = std::sin(freq * std::numbers::pi * t);
    }
    dirs.push_back(std::move(h));
  }
  return dirs;
}

SolveReport solve(const Problem& p, const SolveOptions& opts) {
  p.validate();
  opts.validate();
  if (!p.constraints.empty()) {
    throw PreconditionError("solve handles unconstrained problems; use solve_isoperimetric");
  }
  InnerResult inner = minimize(p, p.lagrangian, {}, initial_trajectory(p), opts);

  SolveReport rep{.trajectory = inner.y};
  rep.objective = inner.objective;
  rep.gradient_norm = inner.gradient_norm;
  rep.iterations = inner.iterations;
  rep.objective_history = std::move(inner.history);
  rep.converged = inner.converged;
  rep.diagnostics = inner.diagnostics;
  rep.el_residual_norm = interior_l2_norm(el_residual(p, rep.trajectory));
  rep.el_residual_bound = bound_for(p, rep.trajectory, {});
  fill_transversality(p, rep, {});
  return rep;
}

SolveReport solve_isoperimetric(const Problem& p, const SolveOptions& opts) {
  p.validate();
  opts.validate();
  const std::size_t r = p.constraints.size();
  if (r == 0) throw PreconditionError("solve_isoperimetric needs at least one constraint");

  const Problem uniform = with_equality_signs(p);
  const Expr f = augmented_integrand(uniform);

  std::vector<bool> active(r, false);
  for (std::size_t j = 0; j < r; ++j) {
    active[j] = p.constraints[j].mode == ConstraintMode::equality;
  }
  std::vector<double> mu(r, 0.0);
  SampledTrajectory y = initial_trajectory(p);
  std::size_t total_iterations = 0;
  std::vector<double> history;
  bool inner_ok = true;
  bool multipliers_ok = true;
  std::string diagnostics;
  double objective = 0.0;
  double gradient_norm = 0.0;

  auto inner_solve = [&](const std::vector<double>& m, const SampledTrajectory& start) {
    InnerResult res = minimize(p, f, m, start, opts);
    total_iterations += res.iterations;
    history.insert(history.end(), res.history.begin(), res.history.end());
    if (!res.converged) {
      inner_ok = false;
      diagnostics = "inner solve: " + res.diagnostics;
    }
    return res;
  };
  auto residuals = [&](const SampledTrajectory& yy, const std::vector<std::size_t>& idx) {
    Eigen::VectorXd c(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t a = 0; a < idx.size(); ++a) {
      c(static_cast<Eigen::Index>(a)) =
          constraint_integral(p, yy, idx[a]) - p.constraints[idx[a]].target;
    }
    return c;
  };

  bool active_set_stable = false;
  for (std::size_t round = 0; round < 2 * r + 2; ++round) {
    std::vector<std::size_t> idx;
    for (std::size_t j = 0; j < r; ++j) {
      if (active[j]) {
        idx.push_back(j);
      } else {
        mu[j] = 0.0;
      }
    }

    InnerResult cur = inner_solve(mu, y);
    multipliers_ok = true;
    if (!idx.empty()) {
      const auto na = static_cast<Eigen::Index>(idx.size());
      Eigen::VectorXd c0 = residuals(cur.y, idx);
      if (c0.cwiseAbs().maxCoeff() > opts.multiplier_tolerance) {
        // Finite-difference Jacobian to seed Broyden's secant updates.
        Eigen::MatrixXd jac(na, na);
        for (Eigen::Index a = 0; a < na; ++a) {
          std::vector<double> probe = mu;
          const double delta = 1e-3 * std::max(1.0, std::abs(mu[idx[a]]));
          probe[idx[a]] += delta;
          const InnerResult pr = inner_solve(probe, cur.y);
          jac.col(a) = (residuals(pr.y, idx) - c0) / delta;
        }
        multipliers_ok = false;
        for (std::size_t outer = 0; outer < opts.max_outer_iterations; ++outer) {
          const Eigen::VectorXd step = jac.fullPivLu().solve(-c0);
          if (!step.allFinite()) break;
          std::vector<double> next = mu;
          for (Eigen::Index a = 0; a < na; ++a) next[idx[a]] += step(a);
          InnerResult nr = inner_solve(next, cur.y);
          const Eigen::VectorXd c1 = residuals(nr.y, idx);
          const Eigen::VectorXd dc = c1 - c0;
          if (step.squaredNorm() > 0.0) {
            jac += ((dc - jac * step) * step.transpose()) / step.squaredNorm();
          }
          mu = std::move(next);
          cur = std::move(nr);
          c0 = c1;
          if (c0.cwiseAbs().maxCoeff() <= opts.multiplier_tolerance) {
            multipliers_ok = true;
            break;
          }
        }
        if (!multipliers_ok) diagnostics = "multiplier iteration did not meet its tolerance";
      }
    }
    y = cur.y;
    objective = evaluate_functional(p, y);
    gradient_norm = cur.gradient_norm;

    bool changed = false;
    const double tol = std::max(opts.multiplier_tolerance, 1e-12);
    for (std::size_t j = 0; j < r; ++j) {
      if (p.constraints[j].mode != ConstraintMode::inequality) continue;
      if (!active[j] && constraint_integral(p, y, j) - p.constraints[j].target > tol) {
        active[j] = true;
        changed = true;
      } else if (active[j] && -mu[j] < -tol) {
        active[j] = false;
        mu[j] = 0.0;
        changed = true;
      }
    }
    if (!changed) {
      active_set_stable = true;
      break;
    }
  }

  SolveReport rep{.trajectory = y};
  rep.objective = objective;
  rep.gradient_norm = gradient_norm;
  rep.iterations = total_iterations;
  rep.objective_history = std::move(history);

  MultiplierVector m;
  m.lam.resize(r);
  m.slack.resize(r);
  for (std::size_t j = 0; j < r; ++j) {
    const Constraint& c = p.constraints[j];
    rep.constraint_residuals.push_back(constraint_integral(p, y, j) - c.target);
    if (c.mode == ConstraintMode::equality) {
      m.lam[j] = mu[j];
    } else {
      m.lam[j] = active[j] ? -mu[j] : 0.0;
      const double gap = active[j] ? 0.0 : -rep.constraint_residuals[j] / p.grid.length();
      SampledFunction phi(p.grid);
      std::fill(phi.values().begin(), phi.values().end(), std::sqrt(std::max(0.0, gap)));
      m.slack[j] = std::move(phi);
    }
  }
  rep.complementarity = complementarity_residual(p, m);

  std::vector<std::size_t> idx;
  for (std::size_t j = 0; j < r; ++j) {
    if (active[j]) idx.push_back(j);
  }
  if (!idx.empty()) {
    Problem sub = p;
    sub.constraints.clear();
    for (std::size_t j : idx) sub.constraints.push_back(p.constraints[j]);
    const auto dirs = bump_directions(p.grid, p.n_components, idx.size());
    rep.regularity_determinant = regularity_determinant(sub, y, dirs);
    rep.regularity_warning = std::abs(*rep.regularity_determinant) < 1e-12;
  }

  rep.el_residual_norm = interior_l2_norm(augmented_el_residual(p, y, m));
  rep.el_residual_bound = bound_for(p, y, m.lam);
  fill_transversality(p, rep, m.lam);
  rep.multipliers = std::move(m);

  rep.converged = inner_ok && multipliers_ok && active_set_stable;
  if (!active_set_stable) diagnostics = "active set did not settle";
  if (rep.regularity_warning) {
    diagnostics += diagnostics.empty() ? "" : "; ";
    diagnostics += "regularity determinant is numerically zero";
  }
  rep.diagnostics = diagnostics;
  return rep;
}

}  // namespace fracvar
