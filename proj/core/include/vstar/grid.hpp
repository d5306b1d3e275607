/**
 * @file grid.hpp
 * @brief Graded radial grids and the nodal calculus (differences, quadrature) used on them.
 */
#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace vstar {

/// Grid graded toward the outer end: x_j = R (1 - (1 - j/N)^q), j = 0..N.
[[nodiscard]] std::vector<double> graded_grid(double R, std::size_t n_cells, double q);

/// How a nodal field continues across x = 0.
enum class Parity {
  none,  ///< one-sided differences at x = 0
  odd,   ///< f(-x) = -f(x): f'(0) = f_1/x_1, f''(0) = 0
};

/// Second-order first derivative on a non-uniform grid (one-sided 3-point stencils at the ends).
[[nodiscard]] std::vector<double> derivative(std::span<const double> x, std::span<const double> f,
                                             Parity parity = Parity::none);

/// Three-point second derivative on a non-uniform grid.
[[nodiscard]] std::vector<double> second_derivative(std::span<const double> x,
                                                    std::span<const double> f,
                                                    Parity parity = Parity::none);

/// One-sided second-order derivative at the last node.
[[nodiscard]] double derivative_at_end(std::span<const double> x, std::span<const double> f);

/// Trapezoid rule over all nodes.
[[nodiscard]] double trapezoid(std::span<const double> x, std::span<const double> f);

/// Trapezoid rule over the nodes with x <= x_max.
[[nodiscard]] double trapezoid_upto(std::span<const double> x, std::span<const double> f,
                                    double x_max);

/// Finite-difference weights (Fornberg) for the m-th derivative at z from the given nodes.
[[nodiscard]] std::vector<double> fd_weights(double z, std::span<const double> nodes, int m);

/// Cubic Hermite interpolation on sorted nodes with prescribed nodal slopes.
class HermiteInterpolant {
 public:
  HermiteInterpolant() = default;
  HermiteInterpolant(std::vector<double> x, std::vector<double> f, std::vector<double> df);

  [[nodiscard]] double operator()(double z) const;
  [[nodiscard]] bool empty() const noexcept { return x_.empty(); }

 private:
  std::vector<double> x_, f_, df_;
};

/// Runs fn(k) for k in [0, n) on up to `workers` threads. Exceptions from fn are rethrown
/// (the first one encountered) after all workers have joined.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace vstar
