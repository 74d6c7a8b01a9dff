#include "fracvar_cli/commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <ostream>
#include <random>

#include "fracvar/errors.hpp"
#include "fracvar/expr.hpp"
#include "fracvar/operators.hpp"
#include "fracvar/solver.hpp"
#include "fracvar_cli/csv.hpp"
#include "fracvar_cli/problem_file.hpp"

namespace fracvar::cli {

namespace {

constexpr double kRegularityThreshold = 1e-12;

std::string num(double v) { return fmt::format("{:.11e}", v); }

void line(std::ostream& out, std::string_view name, double v) {
  out << name << " = " << num(v) << '\n';
}

int verdict(std::ostream& out, bool pass) {
  out << "status = " << (pass ? "pass" : "fail") << '\n';
  return pass ? exit_ok : exit_check_failed;
}

SampledFunction sample_in_x(const std::string& text, const Grid& grid) {
  const Expr e = parse(text, 0, 0);
  return SampledFunction::sample(grid, [&](double x) { return eval(e, EvalEnv{x, {}, {}, {}}); });
}

// A sampled input given either as a CSV file or an expression on a grid.
struct FunctionSource {
  std::string csv;
  std::string expr;

  SampledFunction load(const std::optional<Grid>& grid, std::string_view what) const {
    if (!csv.empty()) return function_from_csv(read_csv_file(csv));
    if (!grid) throw PreconditionError(std::string(what) + ": --grid is needed with an expression");
    return sample_in_x(expr, *grid);
  }
};

struct GridArgs {
  double a = 0.0;
  double b = 1.0;
  std::size_t points = 0;

  std::optional<Grid> grid() const {
    if (points == 0) return std::nullopt;
    return Grid(a, b, points);
  }
};

struct OperatorArgs {
  std::string kind;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  FunctionSource input;
  GridArgs grid;
  CLI::Option* beta_opt = nullptr;
  CLI::Option* gamma_opt = nullptr;
};

struct CheckArgs {
  std::string problem;
  std::string trajectory;
  std::vector<double> lambda;
  double tol = 1e-2;
  // ibp
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  FunctionSource f;
  FunctionSource g;
  GridArgs grid;
  // el
  std::string norm = "max";
  // transversality
  std::string form = "consistent";
  // regularity
  std::vector<std::string> directions;
  // oracle
  std::uint64_t seed = 42;
  std::size_t samples = 10000;
};

struct SolveArgs {
  std::string problem;
  std::string out;
  std::size_t max_iter = SolveOptions{}.max_iterations;
  double tol = SolveOptions{}.gradient_tolerance;
  std::string direction = "newton";
};

int cmd_operator(const OperatorArgs& a, std::ostream& out) {
  const OperatorKind kind = parse_operator_kind(a.kind);
  const bool combined = kind == OperatorKind::combined_cfd || kind == OperatorKind::combined_rlfd;
  if (combined && a.gamma_opt->count() == 0) {
    throw PreconditionError("--gamma is required for " + a.kind);
  }
  const FracOrder alpha(a.alpha);
  const FracOrder beta(a.beta_opt->count() ? a.beta : a.alpha);
  const OperatorSpec spec{kind, alpha, beta, combined ? a.gamma : 1.0};
  const SampledFunction f = a.input.load(a.grid.grid(), "operator");
  write_csv(out, to_csv(apply(spec, f)));
  return exit_ok;
}

std::pair<Problem, SampledTrajectory> load_state(const CheckArgs& a) {
  Problem p = load_problem_file(a.problem);
  SampledTrajectory y = trajectory_from_csv(read_csv_file(a.trajectory), p.grid, p.n_components);
  return {std::move(p), std::move(y)};
}

std::vector<double> lambda_or_zero(const Problem& p, const std::vector<double>& lam) {
  if (lam.empty()) return std::vector<double>(p.constraints.size(), 0.0);
  if (lam.size() != p.constraints.size()) {
    throw PreconditionError("--lambda has " + std::to_string(lam.size()) + " values for " +
                            std::to_string(p.constraints.size()) + " constraints");
  }
  return lam;
}

int check_ibp(const CheckArgs& a, std::ostream& out) {
  const auto grid = a.grid.grid();
  const SampledFunction f = a.f.load(grid, "ibp");
  const SampledFunction g = a.g.load(grid, "ibp");
  const double r = ibp_residual(FracOrder(a.alpha), FracOrder(a.beta), a.gamma, f, g);
  line(out, "ibp_residual", r);
  return verdict(out, r <= a.tol);
}

int check_el(const CheckArgs& a, std::ostream& out) {
  if (a.norm != "max" && a.norm != "l2") throw PreconditionError("--norm must be max or l2");
  const auto [p, y] = load_state(a);
  const SampledTrajectory r =
      p.constraints.empty()
          ? el_residual(p, y)
          : augmented_el_residual(p, y, multipliers_with_slack(p, y, lambda_or_zero(p, a.lambda)));
  const double max_norm = interior_max_norm(r);
  const double l2_norm = interior_l2_norm(r);
  line(out, "el_residual_interior_max", max_norm);
  line(out, "el_residual_interior_l2", l2_norm);
  return verdict(out, (a.norm == "max" ? max_norm : l2_norm) <= a.tol);
}

std::string_view status_name(TransversalityReport::Status s) {
  switch (s) {
    case TransversalityReport::Status::free:
      return "free";
    case TransversalityReport::Status::interior:
      return "interior";
    case TransversalityReport::Status::active:
      return "active";
  }
  return "free";
}

int check_transversality(const CheckArgs& a, std::ostream& out) {
  TransversalityForm form{};
  if (a.form == "consistent") {
    form = TransversalityForm::consistent;
  } else if (a.form == "literal") {
    form = TransversalityForm::literal;
  } else {
    throw PreconditionError("--form must be consistent or literal");
  }
  const auto [p, y] = load_state(a);
  const std::vector<double> lam = lambda_or_zero(p, a.lambda);
  bool any = false;
  bool pass = true;
  for (std::size_t i = 0; i < p.n_components; ++i) {
    if (p.bcs.right[i].kind == EndCondition::Kind::fixed) continue;
    any = true;
    const auto rep = transversality_residual(p, y, i, lam, form);
    const std::string tag = "[y" + std::to_string(i + 1) + "]";
    line(out, "transversality" + tag, rep.value);
    out << "end_status" << tag << " = " << status_name(rep.status) << '\n';
    if (p.bcs.right[i].kind == EndCondition::Kind::capped) {
      out << "sign_ok" << tag << " = " << (rep.sign_ok ? "true" : "false") << '\n';
      line(out, "complementary_product" + tag, rep.complementary_product);
    }
    pass = pass && rep.residual() <= a.tol && rep.sign_ok;
  }
  if (!any) throw PreconditionError("every component is fixed at both ends");
  return verdict(out, pass);
}

int check_regularity(const CheckArgs& a, std::ostream& out) {
  const auto [p, y] = load_state(a);
  std::vector<SampledTrajectory> dirs;
  if (a.directions.empty()) {
    dirs = bump_directions(p.grid, p.n_components, p.constraints.size());
  } else {
    for (const std::string& path : a.directions) {
      dirs.push_back(trajectory_from_csv(read_csv_file(path), p.grid, p.n_components));
    }
  }
  const double det = regularity_determinant(p, y, dirs);
  line(out, "regularity_determinant", det);
  return verdict(out, std::abs(det) >= kRegularityThreshold);
}

int check_complementarity(const CheckArgs& a, std::ostream& out) {
  const auto [p, y] = load_state(a);
  const MultiplierVector m = multipliers_with_slack(p, y, lambda_or_zero(p, a.lambda));
  const double r = complementarity_residual(p, m);
  line(out, "complementarity_residual", r);
  return verdict(out, r <= a.tol);
}

int check_oracle(const CheckArgs& a, std::ostream& out) {
  const Problem p = load_problem_file(a.problem);
  const SolveReport rep = solve(p);
  const RandomSearchResult rs = random_search(p, a.seed, a.samples);
  line(out, "solver_objective", rep.objective);
  line(out, "random_best_objective", rs.best_objective);
  out << "random_samples = " << rs.evaluated << '\n';
  if (!rep.converged) {
    out << "status = not converged\n";
    return exit_not_converged;
  }
  return verdict(out, rep.objective <= rs.best_objective + 1e-6);
}

int cmd_solve(const SolveArgs& a, std::ostream& out, std::ostream& err) {
  SolveOptions opts;
  opts.max_iterations = a.max_iter;
  opts.gradient_tolerance = a.tol;
  if (a.direction == "newton") {
    opts.direction = DescentDirection::newton;
  } else if (a.direction == "steepest") {
    opts.direction = DescentDirection::steepest_descent;
  } else {
    throw PreconditionError("--direction must be newton or steepest");
  }
  const Problem p = load_problem_file(a.problem);
  const SolveReport rep = p.constraints.empty() ? solve(p, opts) : solve_isoperimetric(p, opts);

  // Without --out the trajectory goes to standard output and the report to
  // standard error, so the data stream stays plain CSV.
  std::ostream& report = a.out.empty() ? err : out;
  if (a.out.empty()) {
    write_csv(out, to_csv(rep.trajectory));
  } else {
    std::ofstream file(a.out, std::ios::binary);
    if (!file) throw CsvError("cannot write '" + a.out + "'");
    write_csv(file, to_csv(rep.trajectory));
  }

  report << "converged = " << (rep.converged ? "true" : "false") << '\n';
  line(report, "objective", rep.objective);
  line(report, "gradient_norm", rep.gradient_norm);
  report << "iterations = " << rep.iterations << '\n';
  line(report, "el_residual_norm", rep.el_residual_norm);
  line(report, "el_residual_bound", rep.el_residual_bound);
  for (const auto& t : rep.transversality) {
    line(report, "transversality[y" + std::to_string(t.component + 1) + "]", t.value);
  }
  if (rep.multipliers) {
    for (std::size_t j = 0; j < rep.multipliers->lam.size(); ++j) {
      const std::string tag = "[" + std::to_string(j + 1) + "]";
      line(report, "lambda" + tag, rep.multipliers->lam[j]);
      line(report, "constraint_residual" + tag, rep.constraint_residuals[j]);
    }
    line(report, "complementarity", rep.complementarity);
  }
  if (rep.regularity_determinant) {
    line(report, "regularity_determinant", *rep.regularity_determinant);
  }
  if (!rep.diagnostics.empty()) report << "diagnostics = " << rep.diagnostics << '\n';
  return rep.converged ? exit_ok : exit_not_converged;
}

void add_grid(CLI::App* app, GridArgs& g) {
  app->add_option("--a", g.a, "left end of the interval")->capture_default_str();
  app->add_option("--b", g.b, "right end of the interval")->capture_default_str();
  app->add_option("--grid", g.points, "number of grid points for expression input");
}

void add_state(CLI::App* app, CheckArgs& c) {
  app->add_option("--problem", c.problem, "problem file")->required();
  app->add_option("--trajectory", c.trajectory, "trajectory CSV (x,y1..yN)")->required();
}

void add_lambda(CLI::App* app, CheckArgs& c) {
  app->add_option("--lambda", c.lambda, "multipliers, comma separated (default 0)")
      ->delimiter(',');
}

void add_tol(CLI::App* app, CheckArgs& c) {
  app->add_option("--tol", c.tol, "pass threshold")->capture_default_str();
}

// The deepest subcommand that was named on the command line.
const CLI::App* active_app(const CLI::App& app) {
  for (const CLI::App* sub : app.get_subcommands()) return active_app(*sub);
  return &app;
}

}  // namespace

MultiplierVector multipliers_with_slack(const Problem& p, const SampledTrajectory& y,
                                        std::vector<double> lam) {
  MultiplierVector m;
  m.lam = std::move(lam);
  m.slack.resize(p.constraints.size());
  for (std::size_t j = 0; j < p.constraints.size(); ++j) {
    if (p.constraints[j].mode != ConstraintMode::inequality) continue;
    const double gap = (p.constraints[j].target - constraint_integral(p, y, j)) / p.grid.length();
    SampledFunction phi(p.grid);
    std::fill(phi.values().begin(), phi.values().end(), std::sqrt(std::max(0.0, gap)));
    m.slack[j] = std::move(phi);
  }
  return m;
}

RandomSearchResult random_search(const Problem& p, std::uint64_t seed, std::size_t samples) {
  p.validate();
  double lo = 0.0;
  double hi = 0.0;
  for (std::size_t i = 0; i < p.n_components; ++i) {
    lo = std::min(lo, p.bcs.left[i]);
    hi = std::max(hi, p.bcs.left[i]);
    if (p.bcs.right[i].kind != EndCondition::Kind::free) {
      lo = std::min(lo, p.bcs.right[i].value);
      hi = std::max(hi, p.bcs.right[i].value);
    }
  }
  lo -= 1.0;
  hi += 1.0;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t last = p.grid.size() - 1;
  SampledTrajectory y = initial_trajectory(p);
  RandomSearchResult best{std::numeric_limits<double>::infinity(), 0};
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t i = 0; i < p.n_components; ++i) {
      for (std::size_t k = 1; k < last; ++k) y[i][k] = lo + (hi - lo) * unit(rng);
      const EndCondition& end = p.bcs.right[i];
      if (end.kind == EndCondition::Kind::free) {
        y[i][last] = lo + (hi - lo) * unit(rng);
      } else if (end.kind == EndCondition::Kind::capped) {
        y[i][last] = lo + (std::max(end.value, lo) - lo) * unit(rng);
      }
    }
    try {
      const double v = evaluate_functional(p, y);
      best.best_objective = std::min(best.best_objective, v);
      ++best.evaluated;
    } catch (const DomainError&) {
      // outside the integrand's domain; not a feasible sample
    }
  }
  return best;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fractional variational calculus: operators, optimality checks and a direct solver",
               "fracvar"};
  app.require_subcommand(1);

  OperatorArgs op_args;
  CLI::App* op = app.add_subcommand("operator", "apply a fractional operator, print x,value CSV");
  op->add_option("--kind", op_args.kind,
                 "rlfi-left|rlfi-right|rlfd-left|rlfd-right|cfd-left|cfd-right|combined-cfd|"
                 "combined-rlfd")
      ->required();
  op->add_option("--alpha", op_args.alpha, "order of the left operator")->required();
  op_args.beta_opt = op->add_option("--beta", op_args.beta, "order of the right operator");
  op_args.gamma_opt = op->add_option("--gamma", op_args.gamma, "weight of the left operator");
  auto* input = op->add_option("--input", op_args.input.csv, "input x,value CSV file");
  auto* expr = op->add_option("--expr", op_args.input.expr, "input as an expression in x");
  input->excludes(expr);
  add_grid(op, op_args.grid);

  CheckArgs ck;
  CLI::App* check = app.add_subcommand("check", "evaluate an optimality or identity residual");
  check->require_subcommand(1);

  CLI::App* ibp = check->add_subcommand("ibp", "fractional integration by parts residual");
  ibp->add_option("--alpha", ck.alpha)->required();
  ibp->add_option("--beta", ck.beta)->required();
  ibp->add_option("--gamma", ck.gamma)->required();
  auto* f_csv = ibp->add_option("--f", ck.f.csv, "f as an x,value CSV file");
  auto* f_expr = ibp->add_option("--f-expr", ck.f.expr, "f as an expression in x");
  f_csv->excludes(f_expr);
  auto* g_csv = ibp->add_option("--g", ck.g.csv, "g as an x,value CSV file");
  auto* g_expr = ibp->add_option("--g-expr", ck.g.expr, "g as an expression in x");
  g_csv->excludes(g_expr);
  add_grid(ibp, ck.grid);
  add_tol(ibp, ck);

  CLI::App* el = check->add_subcommand("el", "Euler-Lagrange residual of a trajectory");
  add_state(el, ck);
  add_lambda(el, ck);
  el->add_option("--norm", ck.norm, "max|l2 over interior nodes")->capture_default_str();
  add_tol(el, ck);

  CLI::App* tr = check->add_subcommand("transversality", "right-end transversality condition");
  add_state(tr, ck);
  add_lambda(tr, ck);
  tr->add_option("--form", ck.form, "consistent|literal")->capture_default_str();
  add_tol(tr, ck);

  CLI::App* reg = check->add_subcommand("regularity", "constraint regularity determinant");
  add_state(reg, ck);
  reg->add_option("--direction", ck.directions, "direction CSV, once per constraint");

  CLI::App* comp = check->add_subcommand("complementarity", "multiplier-slack complementarity");
  add_state(comp, ck);
  add_lambda(comp, ck);
  add_tol(comp, ck);

  CLI::App* oracle = check->add_subcommand("oracle", "compare solve with seeded random search");
  oracle->add_option("--problem", ck.problem, "problem file")->required();
  oracle->add_option("--seed", ck.seed)->capture_default_str();
  oracle->add_option("--samples", ck.samples)->capture_default_str();

  SolveArgs sv;
  CLI::App* solve_cmd = app.add_subcommand("solve", "minimize the discretized functional");
  solve_cmd->add_option("problem", sv.problem, "problem file")->required();
  solve_cmd->add_option("--out", sv.out, "trajectory CSV path (default: standard output)");
  solve_cmd->add_option("--max-iter", sv.max_iter)->capture_default_str();
  solve_cmd->add_option("--tol", sv.tol, "gradient tolerance")->capture_default_str();
  solve_cmd->add_option("--direction", sv.direction, "newton|steepest")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return exit_ok;
    }
    err << "error: " << e.what() << '\n' << active_app(app)->help();
    return exit_input;
  }

  const bool solving = solve_cmd->parsed();
  try {
    if (op->parsed()) {
      if (op_args.input.csv.empty() && op_args.input.expr.empty()) {
        throw PreconditionError("one of --input or --expr is required");
      }
      return cmd_operator(op_args, out);
    }
    if (solving) return cmd_solve(sv, out, err);
    if (ibp->parsed()) {
      if ((ck.f.csv.empty() && ck.f.expr.empty()) || (ck.g.csv.empty() && ck.g.expr.empty())) {
        throw PreconditionError("ibp needs f and g (--f/--f-expr, --g/--g-expr)");
      }
      return check_ibp(ck, out);
    }
    if (el->parsed()) return check_el(ck, out);
    if (tr->parsed()) return check_transversality(ck, out);
    if (reg->parsed()) return check_regularity(ck, out);
    if (comp->parsed()) return check_complementarity(ck, out);
    if (oracle->parsed()) return check_oracle(ck, out);
  } catch (const ProblemFileError& e) {
    err << "error: " << e.what() << '\n';
    return exit_input;
  } catch (const CsvError& e) {
    err << "error: " << e.what() << '\n';
    return exit_input;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return exit_input;
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << '\n';
    return exit_input;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return solving ? exit_input : exit_domain;
  }
  err << "error: no command given\n";
  return exit_input;
}

}  // namespace fracvar::cli
