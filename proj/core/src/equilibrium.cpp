#include "vstar/equilibrium.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include "vstar/errors.hpp"

namespace vstar {

namespace odeint = boost::numeric::odeint;
using std::numbers::pi;

namespace {

using State = std::array<double, 2>;  // (i / i_c, m / (rho_c L^3)) as functions of r / L

constexpr double kStartRadius = 1e-3;  // in units of L
constexpr double kMaxRadius = 1e4;
constexpr std::size_t kGaussPoints = 6;

// The structure equations in units L = sqrt(i_c / (G rho_c)), rho_c, i_c.
struct Scaled {
  const EquationOfState* eos;
  double rho_c;
  double i_c;
  double L;
  double b;  // rho(r) ~ rho_c (1 + b r^2) near the centre

  Scaled(const EquationOfState& e, double rc, double G) : eos(&e), rho_c(rc) {
    if (!(rc > 0.0) || !std::isfinite(rc)) throw ParameterError("central density must be > 0");
    if (!(G > 0.0)) throw ParameterError("G must be > 0");
    i_c = e.enthalpy(rc);
    L = std::sqrt(i_c / (G * rc));
    b = -(2.0 * pi / 3.0) * i_c / e.dpressure(rc);
  }

  double density(double it) const {
    return it > 0.0 ? eos->density_from_enthalpy(i_c * it) / rho_c : 0.0;
  }

  void operator()(const State& y, State& dy, double r) const {
    dy[0] = -y[1] / (r * r);
    dy[1] = 4.0 * pi * r * r * density(y[0]);
  }

  State series(double r) const {
    const double r2 = r * r;
    return {1.0 - (2.0 * pi / 3.0) * r2 - (pi / 5.0) * b * r2 * r2,
            (4.0 * pi / 3.0) * r2 * r + (4.0 * pi / 5.0) * b * r2 * r2 * r};
  }
};

struct Surface {
  double R = 0.0;  // scaled
  double M = 0.0;  // scaled
};

Surface find_surface(const Scaled& sys, double tol) {
  auto stepper = odeint::make_dense_output(tol, tol, odeint::runge_kutta_dopri5<State>());
  stepper.initialize(sys.series(kStartRadius), kStartRadius, 1e-3);
  double t0 = kStartRadius;
  double t1 = kStartRadius;
  for (;;) {
    const auto span = stepper.do_step(sys);
    t0 = span.first;
    t1 = span.second;
    const State& y = stepper.current_state();
    if (!std::isfinite(y[0]) || !std::isfinite(y[1])) {
      throw NumericalError("structure integration produced a non-finite state", t1);
    }
    if (y[0] <= 0.0) break;
    if (t1 > kMaxRadius) {
      throw UnboundProfile("enthalpy did not reach zero: profile is not bound", y[0]);
    }
  }

  State y{};
  double root = t1;
  if (stepper.current_state()[0] < 0.0) {
    auto f = [&](double t) {
      stepper.calc_state(t, y);
      return y[0];
    };
    std::uintmax_t iters = 100;
    const auto br = boost::math::tools::toms748_solve(
        f, t0, t1, stepper.previous_state()[0], stepper.current_state()[0],
        boost::math::tools::eps_tolerance<double>(52), iters);
    root = 0.5 * (br.first + br.second);
  }

  // Newton on i using the exact slope -m/r^2, with i(r) from a single fresh step out of t0.
  odeint::runge_kutta_dopri5<State> single;
  const State y0 = stepper.previous_state();
  for (int k = 0; k < 4; ++k) {
    y = y0;
    if (root > t0) single.do_step(sys, y, t0, root - t0);
    const double slope = -y[1] / (root * root);
    const double dr = -y[0] / slope;
    root += dr;
    if (std::abs(dr) <= 1e-15 * root) break;
  }
  y = y0;
  single.do_step(sys, y, t0, root - t0);
  return {root, y[1]};
}

// Gauss-Legendre points and weights on [a, b].
void gauss_on(double a, double b, std::array<double, kGaussPoints>& pts,
              std::array<double, kGaussPoints>& wts) {
  using Rule = boost::math::quadrature::gauss<double, kGaussPoints>;
  const auto& abs = Rule::abscissa();
  const auto& w = Rule::weights();
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  std::size_t k = 0;
  for (std::size_t q = 0; q < abs.size(); ++q) {
    if (abs[q] == 0.0) {
      pts[k] = mid;
      wts[k++] = half * w[q];
      continue;
    }
    pts[k] = mid - half * abs[q];
    wts[k++] = half * w[q];
    pts[k] = mid + half * abs[q];
    wts[k++] = half * w[q];
  }
}

}  // namespace

void EquilibriumProfile::finalize() {
  const std::size_t n = xs.size();
  std::vector<double> di(n), dq(n);
  for (std::size_t j = 0; j < n; ++j) {
    di[j] = -xs[j] * phi[j];
    dq[j] = xs[j] * xs[j] * rho_bar[j];
  }
  i_interp_ = HermiteInterpolant(xs, i_bar, std::move(di));
  std::vector<double> outer(n, 0.0), dc(n);
  for (std::size_t j = n - 1; j-- > 0;) outer[j] = outer[j + 1] + cell_mass[j];
  for (std::size_t j = 0; j < n; ++j) dc[j] = -dq[j];
  q_interp_ = HermiteInterpolant(xs, cumulative, std::move(dq));
  c_interp_ = HermiteInterpolant(xs, std::move(outer), std::move(dc));
}

double EquilibriumProfile::enthalpy_at(double r) const {
  if (r >= R_bar) return 0.0;
  return std::max(0.0, i_interp_(std::max(r, 0.0)));
}

double EquilibriumProfile::density_at(double r) const {
  return eos->density_from_enthalpy(enthalpy_at(r));
}

double EquilibriumProfile::cumulative_mass_at(double r) const {
  if (r <= 0.0) return 0.0;
  if (r >= R_bar) return cumulative.back();
  return q_interp_(r);
}

double EquilibriumProfile::outer_mass_at(double r) const {
  if (r >= R_bar) return 0.0;
  return std::max(0.0, c_interp_(std::max(r, 0.0)));
}

double EquilibriumProfile::phi_at(double r) const {
  if (r <= xs[1]) {
    // m(r)/r^3 is even in r; interpolate quadratically through phi_0 and phi_1.
    const double t = r / xs[1];
    return phi[0] + (phi[1] - phi[0]) * t * t;
  }
  return 4.0 * pi * G * cumulative_mass_at(r) / (r * r * r);
}

MassRadius mass_radius(const EquationOfState& eos, double rho_c, double G, double ode_tol) {
  const Scaled sys(eos, rho_c, G);
  const Surface s = find_surface(sys, ode_tol);
  return {s.M * rho_c * sys.L * sys.L * sys.L, s.R * sys.L};
}

EquilibriumProfile integrate_profile(EosPtr eos, double rho_c, double G,
                                     const ProfileOptions& opts) {
  if (!eos) throw ParameterError("integrate_profile: null equation of state");
  if (!(opts.ode_tol > 0.0)) throw ParameterError("ode_tol must be > 0");
  const Scaled sys(*eos, rho_c, G);
  const double tol = opts.ode_tol / 16.0;
  const Surface coarse = find_surface(sys, opts.ode_tol);
  const Surface fine = find_surface(sys, tol);

  EquilibriumProfile prof;
  prof.eos = eos;
  prof.G = G;
  prof.rho_c = rho_c;
  prof.i_c = sys.i_c;
  prof.grading_q = opts.grading_q;
  const double L3 = sys.L * sys.L * sys.L;
  prof.R_bar = fine.R * sys.L;
  prof.M = fine.M * rho_c * L3;
  prof.R_error = std::max(2.0 * std::abs(fine.R - coarse.R) * sys.L, 1e-14 * prof.R_bar);
  prof.M_error = std::max(2.0 * std::abs(fine.M - coarse.M) * rho_c * L3, 1e-14 * prof.M);

  const std::size_t N = opts.n_cells;
  const std::vector<double> xt = graded_grid(fine.R, N, opts.grading_q);

  // Sample points (scaled): every node and the Gauss points of every cell.
  std::vector<double> samples;
  samples.reserve((N + 1) * (kGaussPoints + 1));
  std::vector<std::array<double, kGaussPoints>> gw(N);
  for (std::size_t c = 0; c < N; ++c) {
    std::array<double, kGaussPoints> pts{};
    gauss_on(xt[c], xt[c + 1], pts, gw[c]);
    samples.insert(samples.end(), pts.begin(), pts.end());
  }
  samples.insert(samples.end(), xt.begin(), xt.end());
  std::sort(samples.begin(), samples.end());
  samples.erase(std::unique(samples.begin(), samples.end()), samples.end());

  std::vector<State> values(samples.size());
  const auto first = std::lower_bound(samples.begin(), samples.end(), kStartRadius);
  const std::size_t k0 = static_cast<std::size_t>(first - samples.begin());
  for (std::size_t k = 0; k < k0; ++k) values[k] = sys.series(samples[k]);
  if (k0 < samples.size()) {
    std::vector<double> times;
    times.reserve(samples.size() - k0 + 1);
    const bool prepend = samples[k0] != kStartRadius;
    if (prepend) times.push_back(kStartRadius);
    times.insert(times.end(), first, samples.end());
    std::size_t out = 0;
    auto observer = [&](const State& y, double) {
      if (!(prepend && out == 0)) values[k0 + out - (prepend ? 1 : 0)] = y;
      ++out;
    };
    auto stepper = odeint::make_dense_output(tol, tol, odeint::runge_kutta_dopri5<State>());
    State y0 = sys.series(kStartRadius);
    odeint::integrate_times(stepper, sys, y0, times.begin(), times.end(), 1e-3, observer);
  }
  auto value_at = [&](double t) -> const State& {
    const auto it = std::lower_bound(samples.begin(), samples.end(), t);
    return values[static_cast<std::size_t>(it - samples.begin())];
  };

  prof.xs.resize(N + 1);
  prof.rho_bar.resize(N + 1);
  prof.phi.resize(N + 1);
  prof.i_bar.resize(N + 1);
  prof.cell_mass.resize(N);
  prof.cumulative.assign(N + 1, 0.0);
  for (std::size_t j = 0; j <= N; ++j) {
    prof.xs[j] = xt[j] * sys.L;
    const State& y = value_at(xt[j]);
    const double it = j == N ? 0.0 : std::max(y[0], 0.0);
    prof.i_bar[j] = sys.i_c * it;
    prof.rho_bar[j] = j == 0 ? rho_c : rho_c * sys.density(it);
    prof.phi[j] = j == 0 ? 4.0 * pi * G * rho_c / 3.0 : G * rho_c * y[1] / (xt[j] * xt[j] * xt[j]);
  }
  prof.xs.front() = 0.0;
  prof.xs.back() = prof.R_bar;
  for (std::size_t c = 0; c < N; ++c) {
    std::array<double, kGaussPoints> pts{};
    gauss_on(xt[c], xt[c + 1], pts, gw[c]);
    double sum = 0.0;
    for (std::size_t q = 0; q < kGaussPoints; ++q) {
      sum += gw[c][q] * pts[q] * pts[q] * sys.density(value_at(pts[q])[0]);
    }
    prof.cell_mass[c] = sum * rho_c * L3;
    prof.cumulative[c + 1] = prof.cumulative[c] + prof.cell_mass[c];
  }
  prof.finalize();
  return prof;
}

EquilibriumProfile tabulate_profile(EosPtr eos, double G, double R,
                                    const std::function<double(double)>& rho, std::size_t n_cells,
                                    double grading_q) {
  if (!eos) throw ParameterError("tabulate_profile: null equation of state");
  EquilibriumProfile prof;
  prof.eos = eos;
  prof.G = G;
  prof.R_bar = R;
  prof.grading_q = grading_q;
  prof.xs = graded_grid(R, n_cells, grading_q);
  const std::size_t N = n_cells;
  prof.rho_bar.resize(N + 1);
  prof.i_bar.resize(N + 1);
  prof.phi.resize(N + 1);
  prof.cell_mass.resize(N);
  prof.cumulative.assign(N + 1, 0.0);
  for (std::size_t j = 0; j <= N; ++j) {
    prof.rho_bar[j] = rho(prof.xs[j]);
    prof.i_bar[j] = eos->enthalpy(prof.rho_bar[j]);
  }
  for (std::size_t c = 0; c < N; ++c) {
    std::array<double, kGaussPoints> pts{}, wts{};
    gauss_on(prof.xs[c], prof.xs[c + 1], pts, wts);
    double sum = 0.0;
    for (std::size_t q = 0; q < kGaussPoints; ++q) sum += wts[q] * pts[q] * pts[q] * rho(pts[q]);
    prof.cell_mass[c] = sum;
    prof.cumulative[c + 1] = prof.cumulative[c] + sum;
  }
  prof.rho_c = prof.rho_bar[0];
  prof.i_c = prof.i_bar[0];
  prof.M = 4.0 * pi * prof.cumulative.back();
  prof.phi[0] = 4.0 * pi * G * prof.rho_c / 3.0;
  for (std::size_t j = 1; j <= N; ++j) {
    const double x = prof.xs[j];
    prof.phi[j] = 4.0 * pi * G * prof.cumulative[j] / (x * x * x);
  }
  prof.finalize();
  return prof;
}

EquilibriumProfile solve_for_mass(EosPtr eos, const ShootingConfig& cfg, double G,
                                  const ProfileOptions& opts) {
  if (!eos) throw ParameterError("solve_for_mass: null equation of state");
  if (!(cfg.target_mass > 0.0)) throw ParameterError("target_mass must be > 0");
  if (!(cfg.rho_c_low > 0.0) || !(cfg.rho_c_low < cfg.rho_c_high)) {
    throw ParameterError("rho_c bracket must satisfy 0 < low < high");
  }
  if (!(cfg.tol_mass > 0.0) || !(cfg.ode_tol > 0.0)) {
    throw ParameterError("shooting tolerances must be > 0");
  }
  const double tol = cfg.ode_tol / 16.0;
  auto mass = [&](double log_rho) { return mass_radius(*eos, std::exp(log_rho), G, tol).M; };

  // Coarse scan: locates the maximum on the bracket and the first crossing of the target.
  constexpr std::size_t kScan = 24;
  const double u_lo = std::log(cfg.rho_c_low);
  const double u_hi = std::log(cfg.rho_c_high);
  std::vector<double> u(kScan), m(kScan);
  for (std::size_t k = 0; k < kScan; ++k) {
    u[k] = u_lo + (u_hi - u_lo) * static_cast<double>(k) / static_cast<double>(kScan - 1);
    m[k] = mass(u[k]);
  }
  const double m_max = *std::max_element(m.begin(), m.end());
  if (cfg.target_mass > m_max * (1.0 + cfg.tol_mass)) {
    throw ExceedsCriticalMass("target mass exceeds the largest equilibrium mass on the bracket (" +
                              std::to_string(m_max) + ")");
  }
  std::size_t hit = kScan;
  for (std::size_t k = 0; k + 1 < kScan; ++k) {
    if (m[k] <= cfg.target_mass && cfg.target_mass <= m[k + 1]) {
      hit = k;
      break;
    }
  }
  if (hit == kScan) throw BracketError("rho_c bracket does not straddle the target mass");

  double root = u[hit];
  if (m[hit] != cfg.target_mass) {
    if (m[hit + 1] == cfg.target_mass) {
      root = u[hit + 1];
    } else {
      std::uintmax_t iters = cfg.max_iter;
      auto f = [&](double lr) { return mass(lr) - cfg.target_mass; };
      const auto br = boost::math::tools::toms748_solve(
          f, u[hit], u[hit + 1], m[hit] - cfg.target_mass, m[hit + 1] - cfg.target_mass,
          boost::math::tools::eps_tolerance<double>(50), iters);
      root = 0.5 * (br.first + br.second);
    }
  }
  ProfileOptions o = opts;
  o.ode_tol = cfg.ode_tol;
  EquilibriumProfile prof = integrate_profile(std::move(eos), std::exp(root), G, o);
  const double rel = std::abs(prof.M - cfg.target_mass) / cfg.target_mass;
  if (rel > cfg.tol_mass) {
    throw NumericalError("shooting did not reach the mass tolerance", rel);
  }
  return prof;
}

MassCurve critical_mass_scan(const EquationOfState& eos, const std::vector<double>& rho_c_grid,
                             double G, double ode_tol, std::size_t workers) {
  for (std::size_t k = 0; k < rho_c_grid.size(); ++k) {
    if (!(rho_c_grid[k] > 0.0) || (k > 0 && !(rho_c_grid[k] > rho_c_grid[k - 1]))) {
      throw ParameterError("rho_c grid must be positive and strictly increasing");
    }
  }
  MassCurve curve;
  curve.points.resize(rho_c_grid.size());
  parallel_for(rho_c_grid.size(), workers, [&](std::size_t k) {
    MassCurvePoint& pt = curve.points[k];
    pt.rho_c = rho_c_grid[k];
    try {
      const MassRadius mr = mass_radius(eos, pt.rho_c, G, ode_tol);
      pt.M = mr.M;
      pt.R = mr.R;
      pt.ok = true;
    } catch (const std::exception& e) {
      pt.error = e.what();
    }
  });

  double best = 0.0;
  curve.running_max.reserve(curve.points.size());
  const MassCurvePoint* last = nullptr;
  const MassCurvePoint* prev = nullptr;
  for (const auto& pt : curve.points) {
    if (pt.ok) {
      best = std::max(best, pt.M);
      prev = last;
      last = &pt;
    }
    curve.running_max.push_back(best);
  }
  curve.Mc_estimate = best;
  if (last != nullptr) {
    curve.rising_at_edge = prev != nullptr && last->M > prev->M;
    const MassCurvePoint* decade = nullptr;
    for (const auto& pt : curve.points) {
      if (pt.ok && pt.rho_c <= last->rho_c / 10.0 * (1.0 + 1e-12)) decade = &pt;
    }
    if (decade != nullptr) {
      curve.last_decade_increment = (last->M - decade->M) / last->M;
      curve.plateau = curve.last_decade_increment < 0.05;
    } else {
      curve.last_decade_increment = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return curve;
}

namespace {

std::vector<double> pressure_gradient(const EquilibriumProfile& prof) {
  const std::size_t N = prof.n_cells();
  std::vector<double> p(N + 1);
  for (std::size_t j = 0; j <= N; ++j) p[j] = prof.eos->pressure(prof.rho_bar[j]);
  std::vector<double> dp(N + 1, 0.0);
  for (std::size_t j = 1; j < N; ++j) {
    const std::size_t lo = std::min(j >= 2 ? j - 2 : 0, N - 4);
    const std::span<const double> nodes(prof.xs.data() + lo, 5);
    const auto w = fd_weights(prof.xs[j], nodes, 1);
    double s = 0.0;
    for (std::size_t k = 0; k < 5; ++k) s += w[k] * p[lo + k];
    dp[j] = s;
  }
  return dp;
}

}  // namespace

double equilibrium_residual(const EquilibriumProfile& prof) {
  const std::size_t N = prof.n_cells();
  if (N < 4) throw ParameterError("equilibrium_residual: need at least 4 cells");
  const auto dp = pressure_gradient(prof);
  double sum = 0.0;
  for (std::size_t j = 1; j < N; ++j) {
    const double x = prof.xs[j];
    const double res = dp[j] + 4.0 * pi * prof.G * prof.rho_bar[j] * prof.cumulative[j] / (x * x);
    sum += res * res;
  }
  return std::sqrt(sum / static_cast<double>(N - 1));
}

double pressure_gradient_scale(const EquilibriumProfile& prof) {
  if (prof.n_cells() < 4) throw ParameterError("pressure_gradient_scale: need at least 4 cells");
  const auto dp = pressure_gradient(prof);
  double m = 0.0;
  for (double d : dp) m = std::max(m, std::abs(d));
  return m;
}

EnthalpyDistanceCheck enthalpy_distance_check(const EquilibriumProfile& prof, double tol) {
  EnthalpyDistanceCheck out;
  const double R = prof.R_bar;
  out.K8 = prof.M * prof.G / (2.0 * R * R);
  out.K9 = 4.0 * pi * prof.G * prof.rho_c * R / 3.0;
  out.worst_lower = -std::numeric_limits<double>::infinity();
  out.worst_upper = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < prof.xs.size(); ++j) {
    const double d = R - prof.xs[j];
    out.worst_lower = std::max(out.worst_lower, out.K8 * d - prof.i_bar[j]);
    out.worst_upper = std::max(out.worst_upper, prof.i_bar[j] - out.K9 * d);
  }
  out.pass = out.worst_lower <= tol && out.worst_upper <= tol;
  return out;
}

}  // namespace vstar
