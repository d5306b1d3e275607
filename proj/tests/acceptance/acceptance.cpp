// Acceptance suite: runs each criterion at its stated tolerance and prints one PASS/FAIL line.
// Exit status is the number of failed criteria.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <exception>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "vstar/diagnostics.hpp"
#include "vstar/equilibrium.hpp"
#include "vstar/eos.hpp"
#include "vstar/grid.hpp"
#include "vstar/simulator.hpp"
#include "vstar/trajectory.hpp"

using namespace vstar;
using std::numbers::pi;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string format(const char* fmt, ...) {
  std::array<char, 1024> buf{};
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf.data(), buf.size(), fmt, args);
  va_end(args);
  return buf.data();
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// gamma = 2, kappa = G = rho_c = 1 closed form.
const double kA = std::sqrt(2.0 * pi);
const double kR = std::sqrt(pi / 2.0);

double rho_exact(double r) { return r == 0.0 ? 1.0 : std::sin(kA * r) / (kA * r); }

std::shared_ptr<const EquilibriumProfile> profile_for(EosPtr eos, std::size_t n) {
  ProfileOptions o;
  o.n_cells = n;
  o.ode_tol = 1e-10;
  return std::make_shared<const EquilibriumProfile>(integrate_profile(std::move(eos), 1.0, 1.0, o));
}

Verdict closed_form_equilibrium() {
  const auto t0 = Clock::now();
  ProfileOptions o;
  o.n_cells = 4096;
  o.ode_tol = 1e-10;
  const EquilibriumProfile p = integrate_profile(make_polytrope({1.0, 2.0}), 1.0, 1.0, o);
  const double elapsed = seconds_since(t0);
  double rho_err = 0.0;
  for (std::size_t j = 0; j < p.xs.size(); ++j) {
    rho_err = std::max(rho_err, std::abs(p.rho_bar[j] - rho_exact(p.xs[j])));
  }
  const double eR = rel(p.R_bar, kR);
  const double eM = rel(p.M, std::sqrt(2.0 * pi));
  return {eR <= 1e-6 && eM <= 1e-6 && rho_err <= 1e-6 && elapsed < 5.0,
          format("R err %.2e, M err %.2e, density err %.2e, %.2f s", eR, eM, rho_err, elapsed)};
}

Verdict enthalpy_distance() {
  std::vector<EquilibriumProfile> profiles;
  for (double g : {1.5, 2.0, 2.5}) {
    profiles.push_back(integrate_profile(make_polytrope({1.0, g}), 1.0, 1.0));
  }
  for (double rc : {1.0, 100.0}) {
    profiles.push_back(integrate_profile(make_white_dwarf({1.0, 1.0}), rc, 1.0));
  }
  bool pass = true;
  double worst = -1e300;
  for (const auto& p : profiles) {
    const EnthalpyDistanceCheck c = enthalpy_distance_check(p, 1e-9);
    pass = pass && c.pass && rel(c.K8, p.M / (2.0 * p.R_bar * p.R_bar)) < 1e-12 &&
           rel(c.K9, 4.0 * pi * p.rho_c * p.R_bar / 3.0) < 1e-12;
    worst = std::max({worst, c.worst_lower, c.worst_upper});
  }
  return {pass, format("5 profiles, worst bound excess %.2e", worst)};
}

Verdict white_dwarf_asymptotics() {
  const double g1 = 1.0, g2 = 1.0;
  const auto eos = make_white_dwarf({g1, g2});
  double worst_hi = 0.0, worst_lo = 0.0;
  for (int k = 0; k <= 40; ++k) {
    const double x = 30.0 * std::pow(10.0, 3.0 * k / 40.0);
    const double s = g2 * x * x * x;
    worst_hi = std::max(worst_hi,
                        std::abs(eos->pressure(s) / std::pow(s, 4.0 / 3.0) /
                                     (2.0 * g1 * std::pow(g2, -4.0 / 3.0)) -
                                 1.0));
    const double y = 1e-2 * std::pow(10.0, -4.0 * k / 40.0);
    const double sl = g2 * y * y * y;
    worst_lo = std::max(worst_lo,
                        std::abs(eos->pressure(sl) / std::pow(sl, 5.0 / 3.0) /
                                     (1.6 * g1 * std::pow(g2, -5.0 / 3.0)) -
                                 1.0));
  }
  const StructureReport rep = verify_structure_conditions(*eos, 1e12, 400, 24.0);
  return {worst_hi <= 0.01 && worst_lo <= 0.01 && rep.pass && rep.min_index >= 4.0 / 3.0,
          format("relativistic dev %.2e, nonrelativistic dev %.2e, min index %.6f", worst_hi,
                 worst_lo, rep.min_index)};
}

Verdict critical_mass() {
  const auto t0 = Clock::now();
  std::vector<double> grid;
  for (int k = 0; k < 60; ++k) grid.push_back(std::pow(10.0, 6.0 * k / 59.0));
  const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  const MassCurve curve = critical_mass_scan(*make_white_dwarf({1.0, 1.0}), grid, 1.0, 1e-10, workers);
  bool ok = true;
  for (const auto& p : curve.points) ok = ok && p.ok;
  const bool rises = curve.points.back().M > curve.points.front().M;
  const auto poly = make_polytrope({1.0, 2.0});
  double worst = 0.0;
  for (double rc : {0.01, 1.0, 100.0}) {
    const double r = mass_radius(*poly, 2.0 * rc, 1.0, 1e-10).M / mass_radius(*poly, rc, 1.0, 1e-10).M;
    worst = std::max(worst, std::abs(r - 2.0));
  }
  const double elapsed = seconds_since(t0);
  return {ok && rises && curve.last_decade_increment < 0.05 && worst <= 1e-6 && elapsed < 120.0,
          format("Mc ~ %.6f, last-decade increment %.2e, polytrope doubling err %.2e, %.1f s",
                 curve.Mc_estimate, curve.last_decade_increment, worst, elapsed)};
}

Verdict stationarity() {
  const auto profile = profile_for(make_polytrope({1.0, 2.0}), 512);
  SimConfig cfg;
  cfg.n_cells = 512;
  cfg.t_final = 10.0;
  cfg.snapshot_every = 0.5;
  double dr = 0.0, dv = 0.0;
  TrajectorySink sink;
  sink.on_snapshot = [&](const Snapshot& s) {
    for (std::size_t j = 0; j < s.x.size(); ++j) {
      dr = std::max(dr, std::abs(s.r[j] - s.x[j]));
      dv = std::max(dv, std::abs(s.v[j]));
    }
  };
  Perturbation none;
  const Trajectory tr = run(profile, none, cfg, {}, &sink);
  return {dr <= 1e-9 * profile->R_bar && dv <= 1e-9 && tr.final_state->t == 10.0,
          format("sup|r-x| %.2e, sup|v| %.2e over %zu snapshots", dr, dv, tr.snapshots.size())};
}

struct PerturbedRun {
  std::string name;
  double gamma = 0.0;
  double zeta_expected = 0.0;
  Trajectory traj;
  double seconds = 0.0;
  std::string error;
};

std::vector<PerturbedRun> perturbed_runs() {
  std::vector<PerturbedRun> runs = {{"gamma=2", 2.0, 0.7, {}, 0.0, {}},
                                    {"gamma=5/3", 5.0 / 3.0, 0.65, {}, 0.0, {}}};
  parallel_for(runs.size(), runs.size(), [&](std::size_t k) {
    auto& r = runs[k];
    try {
      const auto t0 = Clock::now();
      const auto profile = profile_for(make_polytrope({1.0, r.gamma}), 512);
      SimConfig cfg;
      cfg.n_cells = 512;
      cfg.t_final = 100.0;
      Perturbation p;
      p.epsilon = 1e-3;
      DiagnosticsConfig d;
      d.theta = 0.1;
      r.traj = run(profile, p, cfg, d);
      r.seconds = seconds_since(t0);
    } catch (const std::exception& e) {
      r.error = e.what();
    }
  });
  return runs;
}

Verdict lyapunov(const std::vector<PerturbedRun>& runs) {
  bool pass = true;
  std::string detail;
  for (const auto& r : runs) {
    if (!r.error.empty()) return {false, r.name + ": " + r.error};
    const double e0 = r.traj.series.front().frakE;
    double worst = 0.0;
    for (const auto& s : r.traj.series) worst = std::max(worst, s.frakE / e0);
    pass = pass && r.traj.max_lyapunov_rise <= 1e-8 && worst <= 10.0;
    detail += format("%s: max rise %.2e, max E/E(0) %.3f; ", r.name.c_str(),
                     r.traj.max_lyapunov_rise, worst);
  }
  return {pass, detail};
}

Verdict decay_rates(const std::vector<PerturbedRun>& runs) {
  bool pass = true;
  std::string detail;
  for (const auto& r : runs) {
    if (!r.error.empty()) return {false, r.name + ": " + r.error};
    const TheoremRates rates = theorem_rates(r.gamma, 0.1);
    const double z = rates.zeta;
    std::vector<double> t, d1, v2;
    for (const auto& s : r.traj.series) t.push_back(s.t);
    d1 = series_values(r.traj.series, "D1");
    v2 = series_values(r.traj.series, "v_sq");
    const DecayFit f1 = fit_decay("D1", t, d1, 10.0, 100.0, 2.0 * z - 1.0, 0.15);
    const DecayFit f2 = fit_decay("v_sq", t, v2, 10.0, 100.0, 2.0 * z - 0.5, 0.15);
    pass = pass && std::abs(z - r.zeta_expected) < 1e-12 && f1.pass && f2.pass &&
           r.seconds < 600.0;
    detail += format("%s: zeta %.2f, D1 slope %.3f (<= %.3f), |v|^2 slope %.3f (<= %.3f), %.0f s; ",
                     r.name.c_str(), z, f1.fitted_exponent, -(2.0 * z - 1.0) + 0.15,
                     f2.fitted_exponent, -(2.0 * z - 0.5) + 0.15, r.seconds);
  }
  return {pass, detail};
}

Verdict vacuum_ratio(const std::vector<PerturbedRun>& runs) {
  const auto& r = runs[1];
  if (!r.error.empty()) return {false, r.error};
  auto c_at = [](const EnergyReport& s) {
    for (const auto& [k, v] : s.sup_norms) {
      if (k == "vacuum_c") return v;
    }
    return std::nan("");
  };
  const double c0 = c_at(r.traj.series.front());
  double worst = 0.0;
  std::size_t checked = 0;
  for (const auto& snap : r.traj.snapshots) {
    for (const auto& s : r.traj.series) {
      if (s.t == snap.t) {
        worst = std::max(worst, c_at(s) / c0);
        ++checked;
      }
    }
  }
  return {checked == r.traj.snapshots.size() && worst < 3.0,
          format("c(0) = %.4f, max c/c(0) %.4f over %zu snapshots", c0, worst, checked)};
}

Verdict homogeneity() {
  const auto mesh = make_mesh(profile_for(make_polytrope({1.0, 5.0 / 3.0}), 512));
  Perturbation dil;
  dil.kind = PerturbationKind::map_dilation;
  dil.epsilon = 1e-3;
  const SimState sd = make_compatible_perturbation(mesh, dil, 0.1, 0.1);
  Perturbation bump;
  bump.epsilon = 1.0;
  const SimState sb = make_compatible_perturbation(mesh, bump, 0.1, 0.1);
  auto scaled = [&](double s) {
    SimState st = sd;
    for (std::size_t j = 0; j < st.r.size(); ++j) {
      st.r[j] = mesh->x[j] + s / 1e-3 * (sd.r[j] - mesh->x[j]);
      st.v[j] = s * sb.v[j];
    }
    return st;
  };
  DiagnosticsConfig d;
  d.theta = 0.1;
  const EnergyReport a = energy_report(scaled(1e-3), d);
  const EnergyReport b = energy_report(scaled(1e-2), d);
  const std::array<std::pair<double, double>, 7> pairs = {{{b.lower.E0, a.lower.E0},
                                                           {b.lower.E1, a.lower.E1},
                                                           {b.lower.D0, a.lower.D0},
                                                           {b.lower.D1, a.lower.D1},
                                                           {b.weighted.scrE0, a.weighted.scrE0},
                                                           {b.weighted.scrD0, a.weighted.scrD0},
                                                           {b.weighted.scrD1, a.weighted.scrD1}}};
  double worst = 0.0;
  for (const auto& [hi, lo] : pairs) worst = std::max(worst, std::abs(hi / lo / 100.0 - 1.0));
  const double frak = b.frakE / a.frakE / 100.0 - 1.0;
  return {worst <= 1e-9 && std::abs(frak) <= 0.05,
          format("quadratic functionals dev %.2e, frakE ratio dev %.2e", worst, frak)};
}

// Analytic odd perturbation with its exact derivatives.
struct AnalyticState {
  std::function<double(double)> w, wx, wxx, rx_over, v, vx, vt;
};

double composite_gauss(const std::function<double(double)>& f, double a, double b, std::size_t panels) {
  using GL = boost::math::quadrature::gauss<double, 10>;
  double sum = 0.0;
  const double h = (b - a) / panels;
  for (std::size_t k = 0; k < panels; ++k) sum += GL::integrate(f, a + k * h, a + (k + 1) * h);
  return sum;
}

Verdict oracle_quadrature() {
  const std::size_t n = 512;
  const auto mesh = make_mesh(profile_for(make_polytrope({1.0, 2.0}), n));
  const double R = kR, R2 = R * R;
  const double eps = 1e-2, del = 1e-2;
  const double nu1 = 0.1, nu2 = 0.1, theta = 0.1, alpha = 1.0 - theta;
  const std::vector<AnalyticState> states = {
      {[=](double x) { return eps * x * (1.0 - x * x / R2); },
       [=](double x) { return eps * (1.0 - 3.0 * x * x / R2); },
       [=](double x) { return -6.0 * eps * x / R2; },
       [=](double x) { return -2.0 * eps * x / R2; },
       [=](double x) { return del * x * std::cos(x); },
       [=](double x) { return del * (std::cos(x) - x * std::sin(x)); },
       [=](double x) { return del * x; }},
      {[=](double x) { return eps * x * x * x / R2; },
       [=](double x) { return 3.0 * eps * x * x / R2; },
       [=](double x) { return 6.0 * eps * x / R2; },
       [=](double x) { return 2.0 * eps * x / R2; },
       [=](double x) { return del * std::sin(x); },
       [=](double x) { return del * std::cos(x); },
       [=](double x) { return del * x * std::exp(-x * x); }},
      {[=](double x) { return eps * std::sin(x); },
       [=](double x) { return eps * std::cos(x); },
       [=](double x) { return -eps * std::sin(x); },
       [=](double x) {
         if (x < 1e-3) return eps * (-x / 3.0 + x * x * x / 30.0);
         return eps * (x * std::cos(x) - std::sin(x)) / (x * x);
       },
       [=](double x) { return del * x * (R2 - x * x); },
       [=](double x) { return del * (R2 - 3.0 * x * x); },
       [=](double x) { return del * std::sin(2.0 * x); }},
  };

  // i(rho_bar) = 2 rho_bar for gamma = 2; written via sin(a (R - x)) to keep the ratio
  // (R - x) / i accurate at the surface.
  auto dist_over_i = [](double x) {
    const double d = kR - x;
    if (d < 1e-12) return 0.5 * x;
    return d * kA * x / (2.0 * std::sin(kA * d));
  };
  // int_0^R (R - x)^{-alpha} g(x) dx with u = (R - x)^{1 - alpha}.
  auto weighted = [&](const std::function<double(double)>& g) {
    const double beta = 1.0 - alpha;
    auto f = [&](double u) {
      const double x = kR - std::pow(u, 1.0 / beta);
      return g(x) / beta;
    };
    return composite_gauss(f, 0.0, std::pow(kR, beta), 10 * n);
  };

  double worst = 0.0;
  std::string which;
  for (std::size_t k = 0; k < states.size(); ++k) {
    const auto& st = states[k];
    SimState s = equilibrium_state(mesh, nu1, nu2);
    std::vector<double> v_t(s.r.size());
    double sup = 0.0;
    for (std::size_t j = 0; j < s.r.size(); ++j) {
      const double x = mesh->x[j];
      s.r[j] = x + st.w(x);
      s.v[j] = st.v(x);
      v_t[j] = st.vt(x);
    }
    for (int q = 0; q <= 100 * static_cast<int>(n); ++q) {
      const double x = R * q / (100.0 * n);
      sup = std::max({sup, std::abs(st.wx(x)), std::abs(st.vx(x))});
    }
    const double frak = sup * sup +
                        composite_gauss([&](double x) { return rho_exact(x) * st.vt(x) * st.vt(x); },
                                        0.0, R, 10 * n) +
                        composite_gauss(
                            [&](double x) {
                              const double a = st.rx_over(x), b = st.wxx(x);
                              return std::pow(rho_exact(x), 3) * (a * a + b * b);
                            },
                            0.0, R, 10 * n);
    auto e0 = [&](double x) { return st.w(x) * st.w(x) + x * x * st.wx(x) * st.wx(x); };
    auto d1 = [&](double x) { return st.v(x) * st.v(x) + x * x * st.vx(x) * st.vx(x); };
    auto iw = [&](double x) { return std::pow(dist_over_i(x), alpha); };
    const double scrE0 = weighted([&](double x) { return iw(x) * e0(x); });
    const double scrD0 =
        weighted([&](double x) { return iw(x) * rho_exact(x) * rho_exact(x) * e0(x); });
    const double scrD1 = weighted([&](double x) { return iw(x) * d1(x); });
    auto eta_at = [&](double x) {
      const double rb = rho_exact(x);
      const double u = st.w(x) / x, wx = st.wx(x);
      const double Q = 1.0 / ((1.0 + u) * (1.0 + u) * (1.0 + wx)) - 1.0;
      const double y = 1.0 / (1.0 + u);
      return rb * rb * Q + rb * rb * ((y - 1.0) * (y - 3.0) + y * y * wx);
    };
    auto eta0_at = [&](double x) {
      const double u = st.w(x) / x, wx = st.wx(x);
      const double e1 = (x * wx - st.w(x)) / (x + st.w(x));
      const double e2 = (1.0 + u) * (1.0 + u) * (1.0 + wx) - 1.0;
      return 4.0 * nu1 * (e1 - std::log1p(e1)) + 3.0 * nu2 * (e2 - std::log1p(e2));
    };
    const double eta = composite_gauss([&](double x) { return x * x * eta_at(x); }, 0.0, R, 10 * n);
    const double eta0 =
        composite_gauss([&](double x) { return x * x * eta0_at(x); }, 0.0, R, 10 * n);

    const WeightedEnergies we = weighted_energies(s, theta);
    const EtaFunctionals ef = eta_functionals(s);
    const std::array<std::pair<const char*, std::pair<double, double>>, 6> cmp = {{
        {"frakE", {frak_E(s, v_t), frak}},
        {"scrE0", {we.scrE0, scrE0}},
        {"scrD0", {we.scrD0, scrD0}},
        {"scrD1", {we.scrD1, scrD1}},
        {"eta", {ef.eta, eta}},
        {"eta0", {ef.eta0, eta0}},
    }};
    for (const auto& [name, vals] : cmp) {
      const double e = rel(vals.first, vals.second);
      if (e > worst) {
        worst = e;
        which = format("state %zu %s", k + 1, name);
      }
    }
  }
  return {worst <= 1e-4, format("worst relative deviation %.2e (%s)", worst, which.c_str())};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* title, const std::function<Verdict()>& check) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += v.pass ? 0 : 1;
    std::printf("%s  %2d %-28s %s\n", v.pass ? "PASS" : "FAIL", id, title, v.detail.c_str());
    std::fflush(stdout);
  };

  report(1, "closed-form equilibrium", closed_form_equilibrium);
  report(2, "enthalpy-distance bounds", enthalpy_distance);
  report(3, "white-dwarf asymptotics", white_dwarf_asymptotics);
  report(4, "critical mass", critical_mass);
  report(5, "discrete stationarity", stationarity);
  const std::vector<PerturbedRun> runs = perturbed_runs();
  report(6, "Lyapunov monotonicity", [&] { return lyapunov(runs); });
  report(7, "decay rates", [&] { return decay_rates(runs); });
  report(8, "vacuum equivalence", [&] { return vacuum_ratio(runs); });
  report(9, "functional homogeneity", homogeneity);
  report(10, "oracle quadrature", oracle_quadrature);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures;
}
