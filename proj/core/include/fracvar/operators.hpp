#pragma once

#include <string_view>
#include <vector>

#include "fracvar/grid.hpp"

namespace fracvar {

enum class Side { left, right };

enum class OperatorKind {
  rlfi_left,
  rlfi_right,
  rlfd_left,
  rlfd_right,
  cfd_left,
  cfd_right,
  combined_cfd,
  combined_rlfd,
};

/// Parses "rlfi-left", "cfd-right", "combined-cfd", ... Throws
/// PreconditionError for unknown names.
OperatorKind parse_operator_kind(std::string_view name);
std::string_view to_string(OperatorKind kind);

/// Selects one operator. Left parts use alpha, right parts use beta; the
/// dual Riemann-Liouville combination swaps them (see combined_rlfd).
struct OperatorSpec {
  OperatorKind kind;
  FracOrder alpha;
  FracOrder beta;
  double gamma = 1.0;
};

/// Riemann-Liouville fractional integral of order `order`, anchored at a
/// (left) or b (right). Product-trapezoidal rule: f is interpolated
/// piecewise-linearly and the kernel (x - t)^(order - 1) is integrated
/// exactly against every linear piece. The value at the anchor is 0.
SampledFunction rlfi(Side side, FracOrder order, const SampledFunction& f);

/// Caputo fractional derivative by the L1 scheme: the piecewise-constant
/// slope of the interpolant convolved exactly with (x - t)^(-order). The
/// right derivative carries the leading minus sign. Exact for linear f.
/// f is assumed to be sampled from an absolutely continuous function.
SampledFunction cfd(Side side, FracOrder order, const SampledFunction& f);

/// Riemann-Liouville fractional derivative via
///   aD^q f(x) = cD^q f(x) + f(a) (x - a)^(-q) / Gamma(1 - q)
/// (mirrored at b for the right side). At the anchor node the result is the
/// singular marker when the boundary value is non-zero.
SampledFunction rlfd(Side side, FracOrder order, const SampledFunction& f);

/// gamma * cfd(left, alpha, f) + (1 - gamma) * cfd(right, beta, f).
/// gamma == 1 and gamma == 0 return the one-sided result unchanged.
/// Throws DomainError unless 0 <= gamma <= 1.
SampledFunction combined_cfd(FracOrder alpha, FracOrder beta, double gamma,
                             const SampledFunction& f);

/// The dual operator (1 - gamma) * rlfd(left, beta, g) +
/// gamma * rlfd(right, alpha, g). Singular markers propagate; a term with
/// zero weight is skipped entirely.
SampledFunction combined_rlfd(FracOrder alpha, FracOrder beta, double gamma,
                              const SampledFunction& g);

/// Dispatches on spec.kind.
SampledFunction apply(const OperatorSpec& spec, const SampledFunction& f);

/// Dense row-major n x n matrix M of the combined Caputo operator, so that
/// combined_cfd(alpha, beta, gamma, f)[k] == sum_m M[k n + m] f[m] up to
/// rounding.
std::vector<double> combined_cfd_matrix(FracOrder alpha, FracOrder beta,
                                        double gamma, const Grid& grid);

/// Applies the transpose of the combined Caputo matrix: out[m] =
/// sum_k M[k n + m] v[k]. This is the discrete adjoint used by gradients.
std::vector<double> combined_cfd_transpose(FracOrder alpha, FracOrder beta,
                                           double gamma, const Grid& grid,
                                           std::span<const double> v);

/// Throws DomainError unless 0 <= gamma <= 1.
void check_gamma(double gamma);

}  // namespace fracvar
