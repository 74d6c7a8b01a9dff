#include "fracvar/grid.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "fracvar/errors.hpp"

namespace fracvar {

Grid::Grid(double a, double b, std::size_t n) : a_(a), b_(b), n_(n), h_(0.0) {
  if (!std::isfinite(a) || !std::isfinite(b) || !(b > a)) {
    throw DomainError("grid requires finite endpoints with b > a");
  }
  if (n < 3) {
    throw DomainError("grid requires at least 3 nodes");
  }
  h_ = (b - a) / static_cast<double>(n - 1);
}

std::vector<double> Grid::nodes() const {
  std::vector<double> xs(n_);
  for (std::size_t k = 0; k < n_; ++k) xs[k] = node(k);
  return xs;
}

FracOrder::FracOrder(double value) : value_(value) {
  if (!(value > 0.0 && value < 1.0)) {
    throw DomainError("order must lie in (0,1)");
  }
}

SampledFunction::SampledFunction(Grid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw PreconditionError("sampled function has " +
                            std::to_string(values_.size()) +
                            " values for a grid of " +
                            std::to_string(grid_.size()) + " nodes");
  }
}

SampledFunction::SampledFunction(Grid grid)
    : grid_(grid), values_(grid.size(), 0.0) {}

SampledFunction SampledFunction::sample(
    const Grid& grid, const std::function<double(double)>& f) {
  std::vector<double> v(grid.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = f(grid.node(k));
  return SampledFunction(grid, std::move(v));
}

bool SampledFunction::has_singular() const noexcept {
  return std::any_of(values_.begin(), values_.end(),
                     [](double v) { return std::isnan(v); });
}

SampledFunction SampledFunction::reversed() const {
  std::vector<double> v(values_.rbegin(), values_.rend());
  return SampledFunction(grid_, std::move(v));
}

double singular_marker() noexcept {
  return std::numeric_limits<double>::quiet_NaN();
}

namespace {

// Sum in units of h: interior nodes weigh 1, end nodes 1/2. Scaling by
// (b - a) / (n - 1) at the end keeps constant integrands exact.
double trapezoid_sum(std::size_t n, const auto& value_at) {
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double v = value_at(k);
    if (std::isnan(v)) continue;
    sum += (k == 0 || k + 1 == n) ? 0.5 * v : v;
  }
  return sum;
}

}  // namespace

double trapezoid(const SampledFunction& f) {
  const Grid& g = f.grid();
  const double s = trapezoid_sum(g.size(), [&](std::size_t k) { return f[k]; });
  return g.length() * s / static_cast<double>(g.size() - 1);
}

double trapezoid_product(const SampledFunction& f, const SampledFunction& g) {
  if (!(f.grid() == g.grid())) {
    throw PreconditionError("trapezoid_product: functions live on different grids");
  }
  const Grid& grid = f.grid();
  const double s = trapezoid_sum(grid.size(), [&](std::size_t k) {
    if (f.singular(k) || g.singular(k)) return singular_marker();
    return f[k] * g[k];
  });
  return grid.length() * s / static_cast<double>(grid.size() - 1);
}

}  // namespace fracvar
