#include <doctest.h>

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "vstar/errors.hpp"
#include "vstar/grid.hpp"

using namespace vstar;

TEST_SUITE("grid") {

TEST_CASE("graded grid") {
  const auto x = graded_grid(2.0, 8, 2.0);
  REQUIRE(x.size() == 9);
  CHECK(x.front() == 0.0);
  CHECK(x.back() == 2.0);
  for (std::size_t j = 1; j < x.size(); ++j) CHECK(x[j] > x[j - 1]);
  // Cells shrink toward the outer end.
  CHECK(x[8] - x[7] < x[1] - x[0]);
  CHECK_THROWS_AS((void)graded_grid(1.0, 1, 2.0), ParameterError);
  CHECK_THROWS_AS((void)graded_grid(1.0, 8, 0.5), ParameterError);
}

TEST_CASE("three-point differences are exact on quadratics") {
  const auto x = graded_grid(1.5, 40, 2.0);
  std::vector<double> f(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) f[j] = 3.0 - 2.0 * x[j] + 0.5 * x[j] * x[j];
  const auto d = derivative(x, f);
  const auto dd = second_derivative(x, f);
  for (std::size_t j = 0; j < x.size(); ++j) {
    CHECK(d[j] == doctest::Approx(-2.0 + x[j]).epsilon(1e-10));
    CHECK(dd[j] == doctest::Approx(1.0).epsilon(1e-8));
  }
  CHECK(derivative_at_end(x, f) == doctest::Approx(-2.0 + 1.5).epsilon(1e-10));
}

TEST_CASE("odd parity at the origin") {
  const auto x = graded_grid(1.0, 200, 2.0);
  std::vector<double> f(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) f[j] = std::sin(x[j]);
  const auto d = derivative(x, f, Parity::odd);
  const auto dd = second_derivative(x, f, Parity::odd);
  CHECK(d[0] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(dd[0] == 0.0);
  double worst = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) worst = std::max(worst, std::abs(d[j] - std::cos(x[j])));
  CHECK(worst < 1e-4);
}

TEST_CASE("second-order convergence of the first derivative") {
  auto err = [](std::size_t n) {
    const auto x = graded_grid(1.0, n, 2.0);
    std::vector<double> f(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) f[j] = std::exp(x[j]);
    const auto d = derivative(x, f);
    double e = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) e = std::max(e, std::abs(d[j] - f[j]));
    return e;
  };
  const double ratio = err(100) / err(200);
  CHECK(ratio > 3.5);
  CHECK(ratio < 4.5);
}

TEST_CASE("trapezoid") {
  const auto x = graded_grid(1.0, 400, 2.0);
  std::vector<double> f(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) f[j] = x[j] * x[j];
  CHECK(trapezoid(x, f) == doctest::Approx(1.0 / 3.0).epsilon(1e-5));
  std::vector<double> one(x.size(), 1.0);
  CHECK(trapezoid(x, one) == doctest::Approx(1.0));
  const double cut = trapezoid_upto(x, one, 0.5);
  CHECK(cut <= 0.5);
  CHECK(cut > 0.49);
}

TEST_CASE("Fornberg weights") {
  const std::vector<double> nodes = {0.0, 0.1, 0.25, 0.45};
  const auto w = fd_weights(0.1, nodes, 1);
  // Exact on cubics.
  double d = 0.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) d += w[k] * std::pow(nodes[k], 3);
  CHECK(d == doctest::Approx(3 * 0.01).epsilon(1e-12));
}

TEST_CASE("Hermite interpolation") {
  std::vector<double> x = {0.0, 0.5, 1.0};
  std::vector<double> f, df;
  for (double z : x) {
    f.push_back(z * z * z);
    df.push_back(3 * z * z);
  }
  HermiteInterpolant h(x, f, df);
  for (double z : {0.1, 0.33, 0.77}) CHECK(h(z) == doctest::Approx(z * z * z).epsilon(1e-14));
  CHECK(h(-1.0) == 0.0);
  CHECK(h(2.0) == 1.0);
  CHECK_THROWS(HermiteInterpolant({0.0, 1.0}, {0.0}, {0.0, 1.0}));
}

TEST_CASE("parallel_for") {
  std::vector<int> hits(100, 0);
  parallel_for(hits.size(), 4, [&](std::size_t k) { hits[k] += 1; });
  for (int h : hits) CHECK(h == 1);
  std::atomic<int> count{0};
  CHECK_THROWS_AS(parallel_for(20, 3,
                               [&](std::size_t k) {
                                 ++count;
                                 if (k == 7) throw std::runtime_error("boom");
                               }),
                  std::runtime_error);
  parallel_for(0, 4, [&](std::size_t) { FAIL("no work expected"); });
}

}  // TEST_SUITE
