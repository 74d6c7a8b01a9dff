#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace fracvar {

/// Uniform partition of [a, b] into n nodes, x_k = a + k h with
/// h = (b - a) / (n - 1). The last node is b exactly.
class Grid {
 public:
  /// Throws DomainError unless b > a and n >= 3.
  Grid(double a, double b, std::size_t n);

  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  std::size_t size() const noexcept { return n_; }
  double step() const noexcept { return h_; }
  double length() const noexcept { return b_ - a_; }

  double node(std::size_t k) const noexcept {
    return k + 1 == n_ ? b_ : a_ + static_cast<double>(k) * h_;
  }
  std::vector<double> nodes() const;

  /// Trapezoid weight of node k; the weights sum to b - a.
  double weight(std::size_t k) const noexcept {
    return (k == 0 || k + 1 == n_) ? 0.5 * h_ : h_;
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  double a_;
  double b_;
  std::size_t n_;
  double h_;
};

/// Fractional order in the open interval (0, 1).
class FracOrder {
 public:
  /// Throws DomainError("order must lie in (0,1)") otherwise.
  explicit FracOrder(double value);

  double value() const noexcept { return value_; }

 private:
  double value_;
};

/// Real samples at the nodes of a grid. A NaN entry is the "singular"
/// marker produced by Riemann-Liouville derivatives at an endpoint where
/// the boundary value does not vanish; every other entry is finite.
class SampledFunction {
 public:
  /// Throws PreconditionError if values.size() != grid.size().
  SampledFunction(Grid grid, std::vector<double> values);

  /// All-zero function on the grid.
  explicit SampledFunction(Grid grid);

  static SampledFunction sample(const Grid& grid,
                                const std::function<double(double)>& f);

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  double operator[](std::size_t k) const noexcept { return values_[k]; }
  double& operator[](std::size_t k) noexcept { return values_[k]; }

  bool singular(std::size_t k) const noexcept { return std::isnan(values_[k]); }
  bool has_singular() const noexcept;

  /// Node-reversed copy, as a function on the same grid: g(x_k) = f(x_{n-1-k}).
  SampledFunction reversed() const;

 private:
  Grid grid_;
  std::vector<double> values_;
};

/// Quiet NaN used as the singular marker.
double singular_marker() noexcept;

/// Composite trapezoid rule over the grid. Nodes carrying the singular
/// marker contribute nothing, i.e. the half cells next to them are dropped.
double trapezoid(const SampledFunction& f);

/// Trapezoid rule applied to the node-wise product f*g.
double trapezoid_product(const SampledFunction& f, const SampledFunction& g);

}  // namespace fracvar
