#include "fracvar/operators.hpp"

#include <cmath>
#include <string>

#include "fracvar/errors.hpp"
#include "fracvar/gamma.hpp"

namespace fracvar {

namespace {

// (m + 1)^p - m^p without cancellation for large m.
double forward_power_difference(std::size_t m, double p) {
  if (m == 0) return 1.0;
  const double md = static_cast<double>(m);
  return std::pow(md, p) * std::expm1(p * std::log1p(1.0 / md));
}

// (m + 1)^p - 2 m^p + (m - 1)^p for m >= 1.
double central_power_difference(std::size_t m, double p) {
  const double md = static_cast<double>(m);
  return std::pow(md, p) * (std::expm1(p * std::log1p(1.0 / md)) +
                            std::expm1(p * std::log1p(-1.0 / md)));
}

// Product-trapezoid weights of the fractional integral of order q, in
// units of h^q / Gamma(q + 2). interior[m] weighs a node at distance m
// from the evaluation point; anchor[K] weighs the anchor node when the
// evaluation point lies K cells away from it.
struct IntegralWeights {
  std::vector<double> interior;
  std::vector<double> anchor;
  double scale;
};

IntegralWeights integral_weights(double q, const Grid& grid) {
  const std::size_t n = grid.size();
  IntegralWeights w;
  w.interior.assign(n, 0.0);
  w.anchor.assign(n, 0.0);
  for (std::size_t m = 1; m < n; ++m) {
    w.interior[m] = central_power_difference(m, q + 1.0);
    const double kd = static_cast<double>(m);
    // (K - 1)^(q+1) - (K - 1 - q) K^q, rearranged around K^q.
    const double shrink = std::expm1(q * std::log1p(-1.0 / kd));
    w.anchor[m] = std::pow(kd, q) * ((kd - 1.0) * shrink + q);
  }
  w.scale = std::pow(grid.step(), q) / gamma_fn(q + 2.0);
  return w;
}

// L1 weights b_m = (m + 1)^(1-q) - m^(1-q), scaled by h^-q / Gamma(2 - q).
struct DerivativeWeights {
  std::vector<double> b;
  double scale;
};

DerivativeWeights derivative_weights(double q, const Grid& grid) {
  DerivativeWeights w;
  w.b.resize(grid.size());
  for (std::size_t m = 0; m < grid.size(); ++m) {
    w.b[m] = forward_power_difference(m, 1.0 - q);
  }
  w.scale = std::pow(grid.step(), -q) / gamma_fn(2.0 - q);
  return w;
}

void require_finite(const SampledFunction& f, const char* op) {
  if (f.has_singular()) {
    throw PreconditionError(std::string(op) +
                            ": input carries singular markers");
  }
}

// Entry (k, m) of the one-sided L1 matrix.
double l1_entry(Side side, const DerivativeWeights& w, std::size_t n,
                std::size_t k, std::size_t m) {
  double e = 0.0;
  if (side == Side::left) {
    if (k == 0 || m > k) return 0.0;
    if (m >= 1) e += w.b[k - m];
    if (m + 1 <= k) e -= w.b[k - 1 - m];
  } else {
    if (k + 1 == n || m < k) return 0.0;
    if (m + 2 <= n) e += w.b[m - k];
    if (m >= k + 1) e -= w.b[m - 1 - k];
  }
  return w.scale * e;
}

std::vector<double> l1_matrix(Side side, FracOrder order, const Grid& grid) {
  const std::size_t n = grid.size();
  const DerivativeWeights w = derivative_weights(order.value(), grid);
  std::vector<double> m(n * n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < n; ++j) m[k * n + j] = l1_entry(side, w, n, k, j);
  }
  return m;
}

std::vector<double> l1_transpose(Side side, FracOrder order, const Grid& grid,
                                 std::span<const double> v) {
  const std::size_t n = grid.size();
  const DerivativeWeights w = derivative_weights(order.value(), grid);
  std::vector<double> out(n, 0.0);
  for (std::size_t m = 0; m < n; ++m) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += l1_entry(side, w, n, k, m) * v[k];
    out[m] = s;
  }
  return out;
}

}  // namespace

void check_gamma(double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw DomainError("gamma must lie in [0,1]");
  }
}

OperatorKind parse_operator_kind(std::string_view name) {
  for (OperatorKind k :
       {OperatorKind::rlfi_left, OperatorKind::rlfi_right,
        OperatorKind::rlfd_left, OperatorKind::rlfd_right,
        OperatorKind::cfd_left, OperatorKind::cfd_right,
        OperatorKind::combined_cfd, OperatorKind::combined_rlfd}) {
    if (to_string(k) == name) return k;
  }
  throw PreconditionError("unknown operator kind '" + std::string(name) + "'");
}

std::string_view to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::rlfi_left: return "rlfi-left";
    case OperatorKind::rlfi_right: return "rlfi-right";
    case OperatorKind::rlfd_left: return "rlfd-left";
    case OperatorKind::rlfd_right: return "rlfd-right";
    case OperatorKind::cfd_left: return "cfd-left";
    case OperatorKind::cfd_right: return "cfd-right";
    case OperatorKind::combined_cfd: return "combined-cfd";
    case OperatorKind::combined_rlfd: return "combined-rlfd";
  }
  return "unknown";
}

SampledFunction rlfi(Side side, FracOrder order, const SampledFunction& f) {
  require_finite(f, "rlfi");
  const Grid& grid = f.grid();
  const std::size_t n = grid.size();
  const IntegralWeights w = integral_weights(order.value(), grid);
  SampledFunction out(grid);
  if (side == Side::left) {
    for (std::size_t k = 1; k < n; ++k) {
      double s = w.anchor[k] * f[0];
      for (std::size_t j = 1; j < k; ++j) s += w.interior[k - j] * f[j];
      s += f[k];
      out[k] = w.scale * s;
    }
  } else {
    for (std::size_t k = 0; k + 1 < n; ++k) {
      double s = f[k];
      for (std::size_t j = k + 1; j + 1 < n; ++j) s += w.interior[j - k] * f[j];
      s += w.anchor[n - 1 - k] * f[n - 1];
      out[k] = w.scale * s;
    }
  }
  return out;
}

SampledFunction cfd(Side side, FracOrder order, const SampledFunction& f) {
  require_finite(f, "cfd");
  const Grid& grid = f.grid();
  const std::size_t n = grid.size();
  const DerivativeWeights w = derivative_weights(order.value(), grid);
  SampledFunction out(grid);
  if (side == Side::left) {
    for (std::size_t k = 1; k < n; ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j < k; ++j) s += w.b[k - 1 - j] * (f[j + 1] - f[j]);
      out[k] = w.scale * s;
    }
  } else {
    for (std::size_t k = 0; k + 1 < n; ++k) {
      double s = 0.0;
      for (std::size_t j = k; j + 1 < n; ++j) s += w.b[j - k] * (f[j + 1] - f[j]);
      out[k] = -w.scale * s;
    }
  }
  return out;
}

SampledFunction rlfd(Side side, FracOrder order, const SampledFunction& f) {
  SampledFunction out = cfd(side, order, f);
  const Grid& grid = f.grid();
  const std::size_t n = grid.size();
  const double q = order.value();
  const std::size_t anchor = side == Side::left ? 0 : n - 1;
  const double boundary = f[anchor];
  if (boundary == 0.0) return out;

  const double c = boundary / gamma_fn(1.0 - q);
  const double h = grid.step();
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t cells = side == Side::left ? k : n - 1 - k;
    if (cells == 0) {
      out[k] = singular_marker();
    } else {
      out[k] += c * std::pow(static_cast<double>(cells) * h, -q);
    }
  }
  return out;
}

SampledFunction combined_cfd(FracOrder alpha, FracOrder beta, double gamma,
                             const SampledFunction& f) {
  check_gamma(gamma);
  if (gamma == 1.0) return cfd(Side::left, alpha, f);
  if (gamma == 0.0) return cfd(Side::right, beta, f);
  SampledFunction out = cfd(Side::left, alpha, f);
  const SampledFunction right = cfd(Side::right, beta, f);
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = gamma * out[k] + (1.0 - gamma) * right[k];
  }
  return out;
}

SampledFunction combined_rlfd(FracOrder alpha, FracOrder beta, double gamma,
                              const SampledFunction& g) {
  check_gamma(gamma);
  if (gamma == 1.0) return rlfd(Side::right, alpha, g);
  if (gamma == 0.0) return rlfd(Side::left, beta, g);
  SampledFunction out = rlfd(Side::left, beta, g);
  const SampledFunction right = rlfd(Side::right, alpha, g);
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = (1.0 - gamma) * out[k] + gamma * right[k];
  }
  return out;
}

SampledFunction apply(const OperatorSpec& spec, const SampledFunction& f) {
  switch (spec.kind) {
    case OperatorKind::rlfi_left: return rlfi(Side::left, spec.alpha, f);
    case OperatorKind::rlfi_right: return rlfi(Side::right, spec.beta, f);
    case OperatorKind::rlfd_left: return rlfd(Side::left, spec.alpha, f);
    case OperatorKind::rlfd_right: return rlfd(Side::right, spec.beta, f);
    case OperatorKind::cfd_left: return cfd(Side::left, spec.alpha, f);
    case OperatorKind::cfd_right: return cfd(Side::right, spec.beta, f);
    case OperatorKind::combined_cfd:
      return combined_cfd(spec.alpha, spec.beta, spec.gamma, f);
    case OperatorKind::combined_rlfd:
      return combined_rlfd(spec.alpha, spec.beta, spec.gamma, f);
  }
  throw PreconditionError("unhandled operator kind");
}

std::vector<double> combined_cfd_matrix(FracOrder alpha, FracOrder beta,
                                        double gamma, const Grid& grid) {
  check_gamma(gamma);
  if (gamma == 1.0) return l1_matrix(Side::left, alpha, grid);
  if (gamma == 0.0) return l1_matrix(Side::right, beta, grid);
  std::vector<double> m = l1_matrix(Side::left, alpha, grid);
  const std::vector<double> r = l1_matrix(Side::right, beta, grid);
  for (std::size_t i = 0; i < m.size(); ++i) {
    m[i] = gamma * m[i] + (1.0 - gamma) * r[i];
  }
  return m;
}

std::vector<double> combined_cfd_transpose(FracOrder alpha, FracOrder beta,
                                           double gamma, const Grid& grid,
                                           std::span<const double> v) {
  check_gamma(gamma);
  if (v.size() != grid.size()) {
    throw PreconditionError("combined_cfd_transpose: size mismatch");
  }
  if (gamma == 1.0) return l1_transpose(Side::left, alpha, grid, v);
  if (gamma == 0.0) return l1_transpose(Side::right, beta, grid, v);
  std::vector<double> out = l1_transpose(Side::left, alpha, grid, v);
  const std::vector<double> r = l1_transpose(Side::right, beta, grid, v);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = gamma * out[i] + (1.0 - gamma) * r[i];
  }
  return out;
}

}  // namespace fracvar
