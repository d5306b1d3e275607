#include "vstar/grid.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "vstar/errors.hpp"

namespace vstar {

std::vector<double> graded_grid(double R, std::size_t n_cells, double q) {
  if (n_cells < 2) throw ParameterError("graded_grid: need at least 2 cells");
  if (!(R > 0.0) || !(q >= 1.0)) throw ParameterError("graded_grid: need R > 0 and q >= 1");
  std::vector<double> x(n_cells + 1);
  const double n = static_cast<double>(n_cells);
  for (std::size_t j = 0; j <= n_cells; ++j) {
    x[j] = R * (1.0 - std::pow(1.0 - static_cast<double>(j) / n, q));
  }
  x.front() = 0.0;
  x.back() = R;
  return x;
}

namespace {

void check_sizes(std::span<const double> x, std::span<const double> f) {
  if (x.size() != f.size() || x.size() < 3) {
    throw std::invalid_argument("nodal calculus: need matching sizes and at least 3 nodes");
  }
}

}  // namespace

double derivative_at_end(std::span<const double> x, std::span<const double> f) {
  check_sizes(x, f);
  const std::size_t n = x.size() - 1;
  const double h1 = x[n] - x[n - 1];
  const double h2 = x[n - 1] - x[n - 2];
  return f[n] * (2.0 * h1 + h2) / (h1 * (h1 + h2)) - f[n - 1] * (h1 + h2) / (h1 * h2) +
         f[n - 2] * h1 / (h2 * (h1 + h2));
}

std::vector<double> derivative(std::span<const double> x, std::span<const double> f,
                               Parity parity) {
  check_sizes(x, f);
  const std::size_t n = x.size() - 1;
  std::vector<double> d(n + 1);
  if (parity == Parity::odd) {
    d[0] = f[1] / x[1];
  } else {
    const double h1 = x[1] - x[0];
    const double h2 = x[2] - x[1];
    d[0] = -f[0] * (2.0 * h1 + h2) / (h1 * (h1 + h2)) + f[1] * (h1 + h2) / (h1 * h2) -
           f[2] * h1 / (h2 * (h1 + h2));
  }
  for (std::size_t j = 1; j < n; ++j) {
    const double hm = x[j] - x[j - 1];
    const double hp = x[j + 1] - x[j];
    d[j] = -hp / (hm * (hm + hp)) * f[j - 1] + (hp - hm) / (hm * hp) * f[j] +
           hm / (hp * (hm + hp)) * f[j + 1];
  }
  d[n] = derivative_at_end(x, f);
  return d;
}

std::vector<double> second_derivative(std::span<const double> x, std::span<const double> f,
                                      Parity parity) {
  check_sizes(x, f);
  const std::size_t n = x.size() - 1;
  std::vector<double> d(n + 1);
  auto three_point = [&](std::size_t a, std::size_t b, std::size_t c) {
    const double h1 = x[b] - x[a];
    const double h2 = x[c] - x[b];
    return 2.0 * (f[a] / (h1 * (h1 + h2)) - f[b] / (h1 * h2) + f[c] / (h2 * (h1 + h2)));
  };
  d[0] = parity == Parity::odd ? 0.0 : three_point(0, 1, 2);
  for (std::size_t j = 1; j < n; ++j) d[j] = three_point(j - 1, j, j + 1);
  d[n] = three_point(n - 2, n - 1, n);
  return d;
}

double trapezoid(std::span<const double> x, std::span<const double> f) {
  check_sizes(x, f);
  double sum = 0.0;
  for (std::size_t j = 0; j + 1 < x.size(); ++j) sum += 0.5 * (x[j + 1] - x[j]) * (f[j] + f[j + 1]);
  return sum;
}

double trapezoid_upto(std::span<const double> x, std::span<const double> f, double x_max) {
  check_sizes(x, f);
  double sum = 0.0;
  for (std::size_t j = 0; j + 1 < x.size() && x[j + 1] <= x_max; ++j) {
    sum += 0.5 * (x[j + 1] - x[j]) * (f[j] + f[j + 1]);
  }
  return sum;
}

std::vector<double> fd_weights(double z, std::span<const double> nodes, int m) {
  // Fornberg, "Generation of finite difference formulas on arbitrarily spaced grids" (1988).
  const std::size_t n = nodes.size();
  std::vector<std::vector<double>> c(n, std::vector<double>(static_cast<std::size_t>(m) + 1, 0.0));
  double c1 = 1.0;
  double c4 = nodes[0] - z;
  c[0][0] = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const int mn = std::min(static_cast<int>(i), m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[i] - z;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) {
          c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        }
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = c[i][static_cast<std::size_t>(m)];
  return w;
}

HermiteInterpolant::HermiteInterpolant(std::vector<double> x, std::vector<double> f,
                                       std::vector<double> df)
    : x_(std::move(x)), f_(std::move(f)), df_(std::move(df)) {
  if (x_.size() < 2 || f_.size() != x_.size() || df_.size() != x_.size()) {
    throw std::invalid_argument("HermiteInterpolant: inconsistent node data");
  }
}

double HermiteInterpolant::operator()(double z) const {
  if (z <= x_.front()) return f_.front();
  if (z >= x_.back()) return f_.back();
  const auto it = std::upper_bound(x_.begin(), x_.end(), z);
  const std::size_t k = static_cast<std::size_t>(it - x_.begin()) - 1;
  const double h = x_[k + 1] - x_[k];
  const double t = (z - x_[k]) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + t;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  return h00 * f_[k] + h10 * h * df_[k] + h01 * f_[k + 1] + h11 * h * df_[k + 1];
}

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers <= 1) {
    for (std::size_t k = 0; k < n; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < n; k = next++) {
        try {
          fn(k);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace vstar
