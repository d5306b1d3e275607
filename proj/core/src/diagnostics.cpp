#include "vstar/diagnostics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss.hpp>

#include "vstar/errors.hpp"
#include "vstar/grid.hpp"

namespace vstar {

namespace {

// Nodal perturbation fields of a state. w = r - x, u = r/x - 1 (limit w_x(0) at x = 0).
struct Fields {
  std::vector<double> w, wx, wxx, u, rx_over;  // rx_over = (r/x)_x
  std::vector<double> v, vx, vxx, v_over_x, v_over_x_x;
  std::vector<double> Q;  // x^2/(r^2 r_x) - 1
};

Fields compute_fields(const SimState& s) {
  const auto& x = s.mesh->x;
  const std::size_t n = x.size();
  Fields f;
  f.w.resize(n);
  for (std::size_t j = 0; j < n; ++j) f.w[j] = s.r[j] - x[j];
  f.wx = derivative(x, f.w, Parity::odd);
  f.wxx = second_derivative(x, f.w, Parity::odd);
  f.v = s.v;
  f.vx = derivative(x, f.v, Parity::odd);
  f.vxx = second_derivative(x, f.v, Parity::odd);
  f.u.resize(n);
  f.rx_over.assign(n, 0.0);
  f.v_over_x.resize(n);
  f.v_over_x_x.assign(n, 0.0);
  f.Q.resize(n);
  f.u[0] = f.wx[0];
  f.v_over_x[0] = f.vx[0];
  for (std::size_t j = 1; j < n; ++j) {
    f.u[j] = f.w[j] / x[j];
    f.v_over_x[j] = f.v[j] / x[j];
    f.rx_over[j] = (f.wx[j] - f.u[j]) / x[j];
    f.v_over_x_x[j] = (f.vx[j] - f.v_over_x[j]) / x[j];
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!(f.u[j] > -1.0) || !(f.wx[j] > -1.0)) {
      throw InvalidState("diagnostics: r_x or r/x nonpositive at node " + std::to_string(j));
    }
    f.Q[j] = std::expm1(-(2.0 * std::log1p(f.u[j]) + std::log1p(f.wx[j])));
  }
  return f;
}

// e - log(1 + e) >= 0, with the series for small |e|.
double bregman(double e) {
  if (std::abs(e) < 1e-3) {
    return e * e * (0.5 + e * (-1.0 / 3.0 + e * (0.25 - e / 5.0)));
  }
  return e - std::log1p(e);
}

double sup_abs(const std::vector<double>& a) {
  double m = 0.0;
  for (double z : a) m = std::max(m, std::abs(z));
  return m;
}

double alpha_of(const SimState& s, double theta) {
  const double gb = s.mesh->eos->gamma_bar();
  const double theta_max = 1.0 - 5.0 / (4.0 * gb);
  if (!(theta > 0.0) || theta > theta_max * (1.0 + 1e-14)) {
    throw ParameterError("theta must lie in (0, " + std::to_string(theta_max) + "], got " +
                         std::to_string(theta));
  }
  return 1.0 - theta;
}

const std::vector<std::string> kPanelNames = {
    "r_minus_x", "v",          "xhalf_v",     "x32_vx",           "vx",
    "v_over_x",  "rx_minus_1", "r_over_x_minus_1", "rhobar_pow_Q", "rhobar_Q",
    "vacuum_c",  "interior_sup", "interior_l2"};

}  // namespace

const std::vector<std::string>& sup_norm_names() { return kPanelNames; }

double weighted_cell_integral(double h, double ia, double ib, double fa, double fb, double alpha) {
  const double delta = ib - ia;
  const double imax = std::max(ia, ib);
  if (std::abs(delta) <= 0.1 * imax) {
    // Nearly constant weight: the closed form below would cancel.
    auto g = [&](double tau) {
      const double i = ia + delta * tau;
      return std::pow(i, -alpha) * (fa + (fb - fa) * tau);
    };
    return h * boost::math::quadrature::gauss<double, 10>::integrate(g, 0.0, 1.0);
  }
  const double b1 = 1.0 - alpha;
  const double b2 = 2.0 - alpha;
  const double pa1 = std::pow(ia, b1);
  const double pb1 = std::pow(ib, b1);
  const double M0 = (pb1 - pa1) / (b1 * delta);
  const double M1 = ((ib * pb1 - ia * pa1) / b2 - ia * (pb1 - pa1) / b1) / (delta * delta);
  return h * (fa * M0 + (fb - fa) * M1);
}

double frak_E(const SimState& s, const std::vector<double>& v_t) {
  validate_state(s);
  const LagrangianMesh& m = *s.mesh;
  const Fields f = compute_fields(s);
  const double sup = std::max(sup_abs(f.wx), sup_abs(f.vx));
  const std::size_t n = m.x.size();
  std::vector<double> a(n), b(n);
  for (std::size_t j = 0; j < n; ++j) {
    a[j] = m.rho_bar[j] * v_t[j] * v_t[j];
    b[j] = m.rho_bar[j] > 0.0 ? m.p_bar[j] * m.p_bar[j] / m.rho_bar[j] *
                                    (f.rx_over[j] * f.rx_over[j] + f.wxx[j] * f.wxx[j])
                              : 0.0;
  }
  return sup * sup + trapezoid(m.x, a) + trapezoid(m.x, b);
}

LowerEnergies lower_energies(const SimState& s, const std::vector<double>& v_t) {
  validate_state(s);
  const LagrangianMesh& m = *s.mesh;
  const Fields f = compute_fields(s);
  const auto& x = m.x;
  const std::size_t n = x.size();
  const std::vector<double> vtx = derivative(x, v_t, Parity::odd);
  std::vector<double> e0(n), d0(n), e1(n), e2(n), d1(n), d2(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double x2 = x[j] * x[j];
    e0[j] = f.w[j] * f.w[j] + x2 * f.wx[j] * f.wx[j];
    d0[j] = m.p_bar[j] * e0[j];
    e1[j] = x2 * m.rho_bar[j] * f.v[j] * f.v[j];
    e2[j] = x2 * m.rho_bar[j] * v_t[j] * v_t[j];
    d1[j] = f.v[j] * f.v[j] + x2 * f.vx[j] * f.vx[j];
    d2[j] = v_t[j] * v_t[j] + x2 * vtx[j] * vtx[j];
  }
  LowerEnergies out;
  out.E0 = trapezoid(x, e0);
  out.E1 = trapezoid(x, e1);
  out.E2 = trapezoid(x, e2);
  out.D0 = trapezoid(x, d0);
  out.D1 = trapezoid(x, d1);
  out.D2 = trapezoid(x, d2);
  return out;
}

WeightedEnergies weighted_energies(const SimState& s, double theta) {
  validate_state(s);
  const double alpha = alpha_of(s, theta);
  const LagrangianMesh& m = *s.mesh;
  const Fields f = compute_fields(s);
  const auto& x = m.x;
  const std::size_t n = x.size();
  std::vector<double> e0(n), d0(n), d1(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double x2 = x[j] * x[j];
    e0[j] = f.w[j] * f.w[j] + x2 * f.wx[j] * f.wx[j];
    d0[j] = m.p_bar[j] * e0[j];
    d1[j] = f.v[j] * f.v[j] + x2 * f.vx[j] * f.vx[j];
  }
  WeightedEnergies out;
  for (std::size_t c = 0; c + 1 < n; ++c) {
    const double h = x[c + 1] - x[c];
    const double ia = m.i_bar[c];
    const double ib = m.i_bar[c + 1];
    out.scrE0 += weighted_cell_integral(h, ia, ib, e0[c], e0[c + 1], alpha);
    out.scrD0 += weighted_cell_integral(h, ia, ib, d0[c], d0[c + 1], alpha);
    out.scrD1 += weighted_cell_integral(h, ia, ib, d1[c], d1[c + 1], alpha);
  }
  return out;
}

std::vector<double> eta_density(const SimState& s) {
  validate_state(s);
  const LagrangianMesh& m = *s.mesh;
  const Fields f = compute_fields(s);
  std::vector<double> eta(m.x.size(), 0.0);
  for (std::size_t j = 0; j < eta.size(); ++j) {
    if (!(m.rho_bar[j] > 0.0)) continue;
    const double y = 1.0 / (1.0 + f.u[j]);
    const double y_minus_1 = -f.u[j] / (1.0 + f.u[j]);
    eta[j] = m.rho_bar[j] * m.eos->potential_difference(m.rho_bar[j], f.Q[j]) +
             m.p_bar[j] * (y_minus_1 * (y - 3.0) + y * y * f.wx[j]);
  }
  return eta;
}

std::vector<double> eta0_density(const SimState& s) {
  validate_state(s);
  const LagrangianMesh& m = *s.mesh;
  const Fields f = compute_fields(s);
  std::vector<double> eta0(m.x.size(), 0.0);
  for (std::size_t j = 0; j < eta0.size(); ++j) {
    const double e1 = j == 0 ? 0.0 : (m.x[j] * f.wx[j] - f.w[j]) / s.r[j];
    const double e2 = std::expm1(2.0 * std::log1p(f.u[j]) + std::log1p(f.wx[j]));
    eta0[j] = 4.0 * s.nu1 * bregman(e1) + 3.0 * s.nu2 * bregman(e2);
  }
  return eta0;
}

EtaFunctionals eta_functionals(const SimState& s) {
  const auto& x = s.mesh->x;
  std::vector<double> eta = eta_density(s);
  std::vector<double> eta0 = eta0_density(s);
  for (std::size_t j = 0; j < x.size(); ++j) {
    eta[j] *= x[j] * x[j];
    eta0[j] *= x[j] * x[j];
  }
  EtaFunctionals out;
  out.eta = trapezoid(x, eta);
  out.eta0 = trapezoid(x, eta0);
  out.lyapunov = discrete_energy(s);
  return out;
}

NamedValues sup_norm_panel(const SimState& s, double l) {
  validate_state(s);
  const LagrangianMesh& m = *s.mesh;
  const Fields f = compute_fields(s);
  const auto& x = m.x;
  const std::size_t n = x.size();
  const double gb = m.eos->gamma_bar();
  const double q_power = (3.0 * gb - 2.0) / 4.0;
  const double R_t = s.r.back();
  const double x_cut = m.R_bar - l;

  double xhalf_v = 0.0, x32_vx = 0.0, pow_q = 0.0, rho_q = 0.0, vac = 0.0, interior_sup = 0.0;
  std::vector<double> l2(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    xhalf_v = std::max(xhalf_v, std::sqrt(x[j]) * std::abs(f.v[j]));
    x32_vx = std::max(x32_vx, x[j] * std::sqrt(x[j]) * std::abs(f.vx[j]));
    pow_q = std::max(pow_q, std::pow(m.rho_bar[j], q_power) * std::abs(f.Q[j]));
    rho_q = std::max(rho_q, m.rho_bar[j] * std::abs(f.Q[j]));
    if (j + 1 < n) {
      const double i = m.eos->enthalpy(m.rho_bar[j] * (1.0 + f.Q[j]));
      const double d = R_t - s.r[j];
      vac = std::max({vac, i / d, d / i});
    }
    if (x[j] <= x_cut) {
      interior_sup = std::max({interior_sup, std::abs(f.wx[j]), std::abs(f.u[j])});
    }
    l2[j] = f.wxx[j] * f.wxx[j] + f.rx_over[j] * f.rx_over[j] + f.vxx[j] * f.vxx[j] +
            f.v_over_x_x[j] * f.v_over_x_x[j];
  }
  const std::array<double, 13> values = {sup_abs(f.w),
                                         sup_abs(f.v),
                                         xhalf_v,
                                         x32_vx,
                                         sup_abs(f.vx),
                                         sup_abs(f.v_over_x),
                                         sup_abs(f.wx),
                                         sup_abs(f.u),
                                         pow_q,
                                         rho_q,
                                         vac,
                                         interior_sup,
                                         std::sqrt(trapezoid_upto(x, l2, x_cut))};
  NamedValues out;
  out.reserve(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) out.emplace_back(kPanelNames[k], values[k]);
  return out;
}

EnergyReport energy_report(const SimState& s, const DiagnosticsConfig& cfg) {
  validate_state(s);
  const std::vector<double> v_t = momentum_rhs(s);
  EnergyReport rep;
  rep.t = s.t;
  rep.frakE = frak_E(s, v_t);
  rep.lower = lower_energies(s, v_t);
  rep.weighted = weighted_energies(s, cfg.theta);
  rep.eta = eta_functionals(s);
  rep.sup_norms = sup_norm_panel(s, cfg.l_fraction * s.mesh->R_bar);
  rep.boundary_stress = boundary_stress(s);
  auto get = [&](const std::string& name) {
    for (const auto& [k, v] : rep.sup_norms) {
      if (k == name) return v;
    }
    return 0.0;
  };
  const double geom = std::max(get("rx_minus_1"), get("r_over_x_minus_1"));
  const double vel = std::max(get("vx"), get("v_over_x"));
  rep.small_regime = geom <= cfg.e0_bound && vel <= 1.0;
  return rep;
}

std::optional<double> TheoremRates::rate(const std::string& name) const {
  for (const auto& [k, v] : rates) {
    if (k == name) return v;
  }
  return std::nullopt;
}

TheoremRates theorem_rates(double gamma_bar, double theta) {
  if (!(gamma_bar > 4.0 / 3.0)) {
    throw ParameterError("theorem_rates: gamma_bar must exceed 4/3, got " +
                         std::to_string(gamma_bar));
  }
  const double theta_max = 1.0 - 5.0 / (4.0 * gamma_bar);
  if (!(theta > 0.0) || theta > theta_max * (1.0 + 1e-14)) {
    throw ParameterError("theorem_rates: theta must lie in (0, " + std::to_string(theta_max) +
                         "], got " + std::to_string(theta));
  }
  TheoremRates tr;
  tr.gamma_bar = gamma_bar;
  tr.theta = theta;
  tr.zeta = 1.0 - 1.0 / (2.0 * gamma_bar) - theta / 2.0;
  tr.upsilon = gamma_bar <= 2.0 ? 1 : 0;
  const double z = tr.zeta;
  tr.rates = {{"zeta", z}, {"2zeta", 2.0 * z}, {"2zeta-1", 2.0 * z - 1.0},
              {"2zeta-1/2", 2.0 * z - 0.5},
              {"2-2/gamma-3theta/2", 2.0 - 2.0 / gamma_bar - 1.5 * theta}};
  if (gamma_bar > 2.0 && gamma_bar < 4.0 && theta < (4.0 - gamma_bar) / (gamma_bar - 1.0)) {
    const double g = gamma_bar;
    const double first = (4.0 - g) / (2.0 * g) -
                         theta * ((g - 1.0) / (2.0 * g) +
                                  (4.0 - g - theta * (g - 1.0)) / (4.0 * g - 2.0));
    tr.rates.emplace_back("density_min", std::min(first, 2.0 * z - 1.0));
  }
  return tr;
}

DecayFit fit_decay(const std::string& quantity, const std::vector<double>& t,
                   const std::vector<double>& value, double t_lo, double t_hi, double predicted,
                   double slack) {
  if (t.size() != value.size()) throw ParameterError("fit_decay: t and value lengths differ");
  if (!(t_lo >= 1.0)) throw ParameterError("fit_decay: window must start at t >= 1");
  if (!(t_hi > t_lo)) throw ParameterError("fit_decay: empty window");
  DecayFit fit;
  fit.quantity = quantity;
  fit.t_lo = t_lo;
  fit.t_hi = t_hi;
  fit.predicted_exponent = predicted;
  fit.slack = slack;
  std::vector<double> X, Y;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] < t_lo || t[k] > t_hi) continue;
    if (!(value[k] > 0.0)) {
      throw FitError("fit_decay(" + quantity + "): nonpositive value " + std::to_string(value[k]) +
                     " at sample " + std::to_string(k) + " (t = " + std::to_string(t[k]) + ")");
    }
    X.push_back(std::log1p(t[k]));
    Y.push_back(std::log(value[k]));
  }
  fit.samples = X.size();
  if (X.size() < 10) {
    throw FitError("fit_decay(" + quantity + "): " + std::to_string(X.size()) +
                   " samples in window, need at least 10");
  }
  const double n = static_cast<double>(X.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < X.size(); ++k) {
    mx += X[k];
    my += Y[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < X.size(); ++k) {
    sxx += (X[k] - mx) * (X[k] - mx);
    sxy += (X[k] - mx) * (Y[k] - my);
    syy += (Y[k] - my) * (Y[k] - my);
  }
  if (!(sxx > 0.0)) throw FitError("fit_decay(" + quantity + "): degenerate time window");
  fit.fitted_exponent = sxy / sxx;
  fit.prefactor = std::exp(my - fit.fitted_exponent * mx);
  fit.r_squared = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  fit.pass = fit.fitted_exponent <= -predicted + slack;
  return fit;
}

std::vector<FitTarget> fit_targets(const TheoremRates& tr) {
  const double z = tr.zeta;
  std::vector<FitTarget> out = {{"D1", 2.0 * z}};
  if (tr.upsilon == 1) {
    out.push_back({"r_minus_x_sq", *tr.rate("2-2/gamma-3theta/2")});
  } else {
    out.push_back({"r_minus_x_sq", 2.0 * z - 0.5});
  }
  out.push_back({"v_sq", 2.0 * z - 0.5});
  out.push_back({"vx_sq", 2.0 * z - 1.0});
  out.push_back({"v_over_x_sq", 2.0 * z - 1.0});
  if (tr.upsilon == 1) out.push_back({"rhobar_pow_Q_sq", 2.0 * z - 1.0});
  if (auto m = tr.rate("density_min")) out.push_back({"rhobar_Q_sq", *m});
  out.push_back({"interior_sup_sq", 2.0 * z - 1.0});
  return out;
}

std::vector<double> series_values(const std::vector<EnergyReport>& series,
                                  const std::string& quantity) {
  std::vector<double> out;
  out.reserve(series.size());
  if (quantity == "D1") {
    for (const auto& r : series) out.push_back(r.lower.D1);
    return out;
  }
  const std::string suffix = "_sq";
  if (quantity.size() > suffix.size() &&
      quantity.compare(quantity.size() - suffix.size(), suffix.size(), suffix) == 0) {
    const std::string base = quantity.substr(0, quantity.size() - suffix.size());
    const auto& names = sup_norm_names();
    const auto it = std::find(names.begin(), names.end(), base);
    if (it != names.end()) {
      const auto k = static_cast<std::size_t>(it - names.begin());
      for (const auto& r : series) out.push_back(r.sup_norms.at(k).second * r.sup_norms.at(k).second);
      return out;
    }
  }
  throw ParameterError("unknown fit quantity '" + quantity + "'");
}

std::vector<DecayFit> fit_all(const std::vector<EnergyReport>& series,
                              const std::vector<FitTarget>& targets, double t_lo, double t_hi,
                              double slack) {
  std::vector<double> t;
  t.reserve(series.size());
  for (const auto& r : series) t.push_back(r.t);
  std::vector<DecayFit> out;
  for (const auto& target : targets) {
    const std::vector<double> val = series_values(series, target.quantity);
    std::size_t in_window = 0;
    bool all_zero = true;
    for (std::size_t k = 0; k < t.size(); ++k) {
      if (t[k] < t_lo || t[k] > t_hi) continue;
      ++in_window;
      all_zero = all_zero && val[k] == 0.0;
    }
    if (in_window == 0) continue;
    DecayFit fit;
    fit.quantity = target.quantity;
    fit.t_lo = t_lo;
    fit.t_hi = t_hi;
    fit.samples = in_window;
    fit.predicted_exponent = target.predicted;
    fit.slack = slack;
    if (all_zero) {
      fit.vacuous = true;
      fit.pass = true;
      fit.note = "identically zero on the window";
    } else {
      try {
        fit = fit_decay(target.quantity, t, val, t_lo, t_hi, target.predicted, slack);
      } catch (const Error& e) {
        fit.pass = false;
        fit.note = e.what();
      }
    }
    out.push_back(std::move(fit));
  }
  return out;
}

}  // namespace vstar
