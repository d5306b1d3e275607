#include "vstar/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/roots.hpp>

#include "vstar/dual.hpp"
#include "vstar/errors.hpp"
#include "vstar/grid.hpp"

namespace vstar {

using std::numbers::pi;

namespace {

void fill_cell_data(LagrangianMesh& m) {
  const std::size_t N = m.x.size() - 1;
  m.cell_volume.resize(N);
  m.cell_rho_bar.resize(N);
  m.cell_p_bar.resize(N);
  m.node_mass.assign(N + 1, 0.0);
  m.p_bar.resize(N + 1);
  for (std::size_t c = 0; c < N; ++c) {
    const double xa = m.x[c];
    const double xb = m.x[c + 1];
    m.cell_volume[c] = (xb - xa) * (xa * xa + xa * xb + xb * xb) / 3.0;
    m.cell_rho_bar[c] = m.cell_mass[c] / m.cell_volume[c];
    m.cell_p_bar[c] = m.eos->pressure(m.cell_rho_bar[c]);
    m.node_mass[c] += 0.5 * m.cell_mass[c];
    m.node_mass[c + 1] += 0.5 * m.cell_mass[c];
  }
  for (std::size_t j = 0; j <= N; ++j) m.p_bar[j] = m.eos->pressure(m.rho_bar[j]);
}

// 1 - (1 - u)^4: turns p_bar r^2 into the calibrated gravity term p_bar (r^2 - x^4 / r^2).
template <class T>
T gravity_factor(const T& u) {
  return u * (4.0 + u * (-6.0 + u * (4.0 - u)));
}

template <std::size_t K>
Dual<K> pressure_term(const EquationOfState& eos, double rho_bar, const Dual<K>& delta) {
  const double val = eos.pressure_difference(rho_bar, delta.val);
  const double der = rho_bar * eos.dpressure(rho_bar * (1.0 + delta.val));
  return chain(delta, val, der);
}

template <class T>
struct CellForce {
  T fa;
  T fb;
};

// Forces of cell c = (a, b) on its two nodes. Returns false for a folded cell.
template <class T>
bool cell_force(const LagrangianMesh& m, std::size_t c, const T& ra, const T& rb, const T& va,
                const T& vb, double nu1, double nu2, CellForce<T>& out) {
  const double xa = m.x[c];
  const double xb = m.x[c + 1];
  const T wa = ra - xa;
  const T wb = rb - xb;
  const T dr = (wb - wa) + (xb - xa);
  if (!(value_of(dr) > 0.0)) return false;
  const T V = dr * (ra * ra + ra * rb + rb * rb) / 3.0;
  const T dV = (wb * (rb * rb + rb * xb + xb * xb) - wa * (ra * ra + ra * xa + xa * xa)) / 3.0;
  const T delta = -dV / V;
  const double rho_bar = m.cell_rho_bar[c];
  T dp;
  if constexpr (std::is_same_v<T, double>) {
    dp = m.eos->pressure_difference(rho_bar, delta);
  } else {
    dp = pressure_term(*m.eos, rho_bar, delta);
  }
  const double pbar = m.cell_p_bar[c];
  const T rb2 = rb * rb;
  T fa = T(0.0);
  T fb = rb2 * (dp + pbar * gravity_factor(T(wb / rb)));
  const T ra2 = ra * ra;
  if (c > 0) fa = -(ra2 * (dp + pbar * gravity_factor(T(wa / ra))));

  // Viscous forces: -(1/2) d/dv of V [(4/3) nu1 s^2 + nu2 d^2].
  const T d = (rb2 * vb - ra2 * va) / V;
  fa += nu2 * d * ra2;
  fb -= nu2 * d * rb2;
  if (c > 0 && nu1 != 0.0) {
    const T rm = 0.5 * (ra + rb);
    const T s = rm * (vb / rb - va / ra) / dr;
    const T k = (4.0 / 3.0) * nu1 * s * V * rm / dr;
    fa += k / ra;
    fb -= k / rb;
  }
  out.fa = fa;
  out.fb = fb;
  return true;
}

std::vector<double> nodal_forces(const SimState& s) {
  const LagrangianMesh& m = *s.mesh;
  const std::size_t N = m.n_cells();
  std::vector<double> F(N + 1, 0.0);
  for (std::size_t c = 0; c < N; ++c) {
    CellForce<double> f{};
    if (!cell_force<double>(m, c, s.r[c], s.r[c + 1], s.v[c], s.v[c + 1], s.nu1, s.nu2, f)) {
      throw InvalidState("folded cell: r is not increasing at cell " + std::to_string(c));
    }
    F[c] += f.fa;
    F[c + 1] += f.fb;
  }
  return F;
}

}  // namespace

std::shared_ptr<const LagrangianMesh> make_mesh(std::shared_ptr<const EquilibriumProfile> profile) {
  if (!profile) throw ParameterError("make_mesh: null profile");
  auto m = std::make_shared<LagrangianMesh>();
  m->profile = profile;
  m->eos = profile->eos;
  m->R_bar = profile->R_bar;
  m->x = profile->xs;
  m->rho_bar = profile->rho_bar;
  m->i_bar = profile->i_bar;
  m->cell_mass = profile->cell_mass;
  fill_cell_data(*m);
  return m;
}

std::shared_ptr<const LagrangianMesh> make_mesh(std::shared_ptr<const EquilibriumProfile> profile,
                                                std::size_t n_cells, double grading_q) {
  if (!profile) throw ParameterError("make_mesh: null profile");
  auto m = std::make_shared<LagrangianMesh>();
  m->profile = profile;
  m->eos = profile->eos;
  m->R_bar = profile->R_bar;
  m->x = graded_grid(profile->R_bar, n_cells, grading_q);
  const std::size_t N = n_cells;
  m->rho_bar.resize(N + 1);
  m->i_bar.resize(N + 1);
  for (std::size_t j = 0; j <= N; ++j) {
    m->i_bar[j] = j == 0 ? profile->i_c : profile->enthalpy_at(m->x[j]);
    m->rho_bar[j] = j == 0 ? profile->rho_c : m->eos->density_from_enthalpy(m->i_bar[j]);
  }
  m->cell_mass.resize(N);
  const double half = 0.5 * profile->cumulative.back();
  for (std::size_t c = 0; c < N; ++c) {
    const double qa = profile->cumulative_mass_at(m->x[c]);
    m->cell_mass[c] = qa < half
                          ? profile->cumulative_mass_at(m->x[c + 1]) - qa
                          : profile->outer_mass_at(m->x[c]) - profile->outer_mass_at(m->x[c + 1]);
  }
  fill_cell_data(*m);
  return m;
}

SimState equilibrium_state(std::shared_ptr<const LagrangianMesh> mesh, double nu1, double nu2) {
  if (!mesh) throw ParameterError("equilibrium_state: null mesh");
  if (nu1 < 0.0 || nu2 < 0.0) throw ParameterError("viscosities must be nonnegative");
  SimState s;
  s.r = mesh->x;
  s.v.assign(mesh->x.size(), 0.0);
  s.mesh = std::move(mesh);
  s.nu1 = nu1;
  s.nu2 = nu2;
  return s;
}

void validate_state(const SimState& s) {
  if (!s.mesh) throw InvalidState("state has no mesh");
  const std::size_t n = s.mesh->x.size();
  if (s.r.size() != n || s.v.size() != n) throw InvalidState("state size does not match mesh");
  if (s.r[0] != 0.0) throw InvalidState("r(0) must be 0");
  if (s.v[0] != 0.0) throw InvalidState("v(0) must be 0");
  for (std::size_t j = 0; j + 1 < n; ++j) {
    if (!(s.r[j + 1] > s.r[j])) throw InvalidState("r must be strictly increasing (r_x > 0)");
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!std::isfinite(s.r[j]) || !std::isfinite(s.v[j])) throw InvalidState("non-finite state");
  }
}

std::vector<double> momentum_rhs(const SimState& s) {
  validate_state(s);
  std::vector<double> F = nodal_forces(s);
  F[0] = 0.0;
  for (std::size_t j = 1; j < F.size(); ++j) F[j] /= s.mesh->node_mass[j];
  return F;
}

std::vector<double> cell_density(const SimState& s) {
  const LagrangianMesh& m = *s.mesh;
  std::vector<double> rho(m.n_cells());
  for (std::size_t c = 0; c < rho.size(); ++c) {
    const double ra = s.r[c];
    const double rb = s.r[c + 1];
    const double V = (rb - ra) * (ra * ra + ra * rb + rb * rb) / 3.0;
    rho[c] = m.cell_mass[c] / V;
  }
  return rho;
}

std::vector<double> density_field(const SimState& s) {
  const LagrangianMesh& m = *s.mesh;
  const std::vector<double> rx = derivative(m.x, s.r, Parity::odd);
  std::vector<double> rho(m.x.size());
  rho[0] = m.rho_bar[0] / (rx[0] * rx[0] * rx[0]);
  for (std::size_t j = 1; j < rho.size(); ++j) {
    const double q = m.x[j] / s.r[j];
    rho[j] = q * q * m.rho_bar[j] / rx[j];
  }
  return rho;
}

double total_mass(const SimState& s) {
  const std::vector<double> rho = cell_density(s);
  double sum = 0.0;
  for (std::size_t c = 0; c < rho.size(); ++c) {
    const double ra = s.r[c];
    const double rb = s.r[c + 1];
    sum += rho[c] * (rb - ra) * (ra * ra + ra * rb + rb * rb) / 3.0;
  }
  return 4.0 * pi * sum;
}

double boundary_stress(const SimState& s) {
  const auto& x = s.mesh->x;
  const double vx = derivative_at_end(x, s.v);
  const double rx = derivative_at_end(x, s.r);
  const double vr = s.v.back() / s.r.back();
  return (4.0 / 3.0) * s.nu1 * (vx / rx - vr) + s.nu2 * (vx / rx + 2.0 * vr);
}

double discrete_energy(const SimState& s) {
  const LagrangianMesh& m = *s.mesh;
  double kinetic = 0.0;
  for (std::size_t j = 0; j < m.x.size(); ++j) kinetic += 0.5 * m.node_mass[j] * s.v[j] * s.v[j];
  double potential = 0.0;
  for (std::size_t c = 0; c < m.n_cells(); ++c) {
    const double xa = m.x[c];
    const double xb = m.x[c + 1];
    const double ra = s.r[c];
    const double rb = s.r[c + 1];
    const double wa = ra - xa;
    const double wb = rb - xb;
    const double V = ((wb - wa) + (xb - xa)) * (ra * ra + ra * rb + rb * rb) / 3.0;
    const double dV = (wb * (rb * rb + rb * xb + xb * xb) - wa * (ra * ra + ra * xa + xa * xa)) / 3.0;
    const double delta = -dV / V;
    potential += m.cell_mass[c] * m.eos->potential_difference(m.cell_rho_bar[c], delta);
    double grav = xb * xb * xb * wb / rb;
    if (c > 0) grav -= xa * xa * xa * wa / ra;
    potential += m.cell_p_bar[c] * grav;
  }
  return kinetic + potential;
}

SimState step(const SimState& s, double dt, const StepOptions& opts, StepInfo* info) {
  if (!(dt > 0.0)) throw ParameterError("step: dt must be > 0");
  const LagrangianMesh& m = *s.mesh;
  const std::size_t N = m.n_cells();
  using D = Dual<2>;

  SimState out = s;
  std::vector<double>& v = out.v;
  std::vector<double>& r = out.r;
  std::vector<double> res(N + 1), diag(N + 1), lower(N + 1), upper(N + 1);
  std::vector<double> cp(N + 1), dp(N + 1);
  // Residuals below this are rounding noise of the equilibrium force balance.
  double force_scale = 0.0;
  for (std::size_t c = 0; c < N; ++c) {
    force_scale = std::max(force_scale, m.cell_p_bar[c] * m.x[c + 1] * m.x[c + 1]);
  }
  const double res_floor = 1e3 * std::numeric_limits<double>::epsilon() * dt * force_scale;

  for (std::size_t it = 0; it <= opts.newton_max; ++it) {
    for (std::size_t j = 0; j <= N; ++j) r[j] = j == 0 ? 0.0 : s.r[j] + dt * v[j];
    std::fill(res.begin(), res.end(), 0.0);
    std::fill(diag.begin(), diag.end(), 0.0);
    std::fill(lower.begin(), lower.end(), 0.0);
    std::fill(upper.begin(), upper.end(), 0.0);
    for (std::size_t c = 0; c < N; ++c) {
      D va, vb, ra, rb;
      if (c == 0) {
        va = D(0.0);
        ra = D(0.0);
      } else {
        va = D::variable(v[c], 0);
        ra = D(s.r[c]) + dt * va;
      }
      vb = D::variable(v[c + 1], 1);
      rb = D(s.r[c + 1]) + dt * vb;
      CellForce<D> f{};
      if (!cell_force<D>(m, c, ra, rb, va, vb, s.nu1, s.nu2, f)) {
        throw StepRejected("cell " + std::to_string(c) + " folded during Newton iteration");
      }
      // Residual R_j = m_j (v_j - v^n_j) - dt F_j; accumulate -dt F and its derivatives.
      res[c] -= dt * f.fa.val;
      res[c + 1] -= dt * f.fb.val;
      diag[c] -= dt * f.fa.d[0];
      upper[c] -= dt * f.fa.d[1];
      lower[c + 1] -= dt * f.fb.d[0];
      diag[c + 1] -= dt * f.fb.d[1];
    }
    double res_norm = 0.0;
    for (std::size_t j = 1; j <= N; ++j) {
      res[j] += m.node_mass[j] * (v[j] - s.v[j]);
      diag[j] += m.node_mass[j];
      res_norm = std::max(res_norm, std::abs(res[j]));
    }
    if (!std::isfinite(res_norm)) throw StepRejected("non-finite Newton residual");
    if (res_norm <= res_floor) {
      if (info) *info = {it, 0.0};
      out.t = s.t + dt;
      return out;
    }
    if (it == opts.newton_max) break;

    // Thomas algorithm on rows 1..N.
    cp[1] = upper[1] / diag[1];
    dp[1] = -res[1] / diag[1];
    for (std::size_t j = 2; j <= N; ++j) {
      const double denom = diag[j] - lower[j] * cp[j - 1];
      cp[j] = j < N ? upper[j] / denom : 0.0;
      dp[j] = (-res[j] - lower[j] * dp[j - 1]) / denom;
    }
    for (std::size_t j = N; j-- > 1;) dp[j] -= cp[j] * dp[j + 1];

    double upd = 0.0;
    double scale = 0.0;
    for (std::size_t j = 1; j <= N; ++j) {
      v[j] += dp[j];
      upd = std::max(upd, std::abs(dp[j]));
      scale = std::max(scale, std::abs(v[j]));
    }
    if (!std::isfinite(upd)) throw StepRejected("non-finite Newton update");
    if (upd <= opts.newton_tol * std::max(scale, std::numeric_limits<double>::min())) {
      for (std::size_t j = 1; j <= N; ++j) r[j] = s.r[j] + dt * v[j];
      for (std::size_t j = 0; j < N; ++j) {
        if (!(r[j + 1] > r[j])) throw StepRejected("folded cell after Newton update");
      }
      if (info) *info = {it + 1, upd};
      out.t = s.t + dt;
      return out;
    }
  }
  throw StepRejected("Newton iteration did not converge");
}

double cfl_time_step(const SimState& s, double cfl) {
  const LagrangianMesh& m = *s.mesh;
  const std::vector<double> rho = cell_density(s);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < rho.size(); ++c) {
    const double cs2 = m.eos->dpressure(rho[c]);
    if (cs2 > 0.0) best = std::min(best, (m.x[c + 1] - m.x[c]) / std::sqrt(cs2));
  }
  return cfl * best;
}

std::vector<double> initial_map(const InitialDensity& rho0, const LagrangianMesh& mesh,
                                double mass_rtol) {
  if (!rho0.rho || !(rho0.R0 > 0.0)) throw AdmissibilityError("initial density needs rho and R0 > 0");
  if (!(rho0.rho(0.0) > 0.0)) throw AdmissibilityError("initial density must be positive at 0");
  using GL = boost::math::quadrature::gauss<double, 10>;
  auto integrand = [&](double y) { return y * y * rho0.rho(y); };
  // Missing masses come from a fixed Gauss-Legendre table on a 4x refinement of the mesh
  // stretched to [0, R0]; the mesh grading puts the panels where the density falls off.
  const std::size_t sub = 4;
  std::vector<double> edges;
  std::vector<double> pre, post;
  if (!rho0.cumulative || !rho0.outer) {
    const double stretch = rho0.R0 / mesh.x.back();
    edges.push_back(0.0);
    for (std::size_t c = 0; c + 1 < mesh.x.size(); ++c) {
      for (std::size_t k = 1; k <= sub; ++k) {
        const double t = static_cast<double>(k) / sub;
        edges.push_back(stretch * ((1.0 - t) * mesh.x[c] + t * mesh.x[c + 1]));
      }
    }
    edges.back() = rho0.R0;
    const std::size_t P = edges.size() - 1;
    std::vector<double> panel(P);
    for (std::size_t k = 0; k < P; ++k) panel[k] = GL::integrate(integrand, edges[k], edges[k + 1]);
    pre.assign(P + 1, 0.0);
    post.assign(P + 1, 0.0);
    for (std::size_t k = 0; k < P; ++k) pre[k + 1] = pre[k] + panel[k];
    for (std::size_t k = P; k-- > 0;) post[k] = post[k + 1] + panel[k];
  }
  auto panel_of = [&](double r) {
    const auto it = std::upper_bound(edges.begin(), edges.end(), r);
    const std::size_t k = static_cast<std::size_t>(it - edges.begin());
    return std::min(k == 0 ? 0 : k - 1, edges.size() - 2);
  };
  auto cumulative = [&](double r) {
    if (rho0.cumulative) return rho0.cumulative(r);
    if (r <= 0.0) return 0.0;
    if (r >= rho0.R0) return pre.back();
    const std::size_t k = panel_of(r);
    return pre[k] + GL::integrate(integrand, edges[k], r);
  };
  auto outer = [&](double r) {
    if (rho0.outer) return rho0.outer(r);
    if (r >= rho0.R0) return 0.0;
    if (r <= 0.0) return post.front();
    const std::size_t k = panel_of(r);
    return post[k + 1] + GL::integrate(integrand, r, edges[k + 1]);
  };

  const std::size_t N = mesh.n_cells();
  std::vector<double> q_in(N + 1, 0.0), q_out(N + 1, 0.0);
  for (std::size_t c = 0; c < N; ++c) q_in[c + 1] = q_in[c] + mesh.cell_mass[c];
  for (std::size_t c = N; c-- > 0;) q_out[c] = q_out[c + 1] + mesh.cell_mass[c];
  const double total_bar = q_in[N];
  const double total0 = cumulative(rho0.R0);
  const double mismatch = std::abs(total0 - total_bar) / total_bar;
  if (!(mismatch <= mass_rtol)) {
    throw AdmissibilityError("initial density mass differs from the equilibrium mass (relative " +
                             std::to_string(mismatch) + ")");
  }
  const double scale = total0 / total_bar;

  std::vector<double> r0(N + 1);
  r0[0] = 0.0;
  r0[N] = rho0.R0;
  double lo = 0.0;
  for (std::size_t j = 1; j < N; ++j) {
    const bool inner = q_in[j] <= q_out[j];
    auto f = [&](double r) {
      return inner ? cumulative(r) - scale * q_in[j] : scale * q_out[j] - outer(r);
    };
    double a = lo;
    double b = rho0.R0;
    double fa = f(a);
    double fb = f(b);
    if (fa >= 0.0) {
      r0[j] = a;
    } else if (fb <= 0.0) {
      r0[j] = b;
    } else {
      std::uintmax_t iters = 200;
      const auto br = boost::math::tools::toms748_solve(
          f, a, b, fa, fb, boost::math::tools::eps_tolerance<double>(53), iters);
      r0[j] = 0.5 * (br.first + br.second);
    }
    if (!(r0[j] > r0[j - 1])) {
      throw AdmissibilityError("initial map is not strictly increasing at node " +
                               std::to_string(j));
    }
    lo = r0[j];
  }
  if (!(r0[N] > r0[N - 1])) throw AdmissibilityError("initial map is not strictly increasing");
  return r0;
}

PerturbationKind parse_perturbation_kind(const std::string& name) {
  if (name == "velocity_bump") return PerturbationKind::velocity_bump;
  if (name == "map_dilation") return PerturbationKind::map_dilation;
  throw ParameterError("unknown perturbation kind '" + name + "'");
}

std::string to_string(PerturbationKind kind) {
  return kind == PerturbationKind::velocity_bump ? "velocity_bump" : "map_dilation";
}

SimState make_compatible_perturbation(std::shared_ptr<const LagrangianMesh> mesh,
                                      Perturbation& pert, double nu1, double nu2) {
  SimState s = equilibrium_state(mesh, nu1, nu2);
  const LagrangianMesh& m = *s.mesh;
  const double eps = pert.epsilon;
  if (pert.kind == PerturbationKind::velocity_bump) {
    const double k = pert.shape_exponent;
    if (!(k > 1.0)) throw ParameterError("shape exponent must be > 1");
    SimState probe = s;
    for (std::size_t j = 0; j < m.x.size(); ++j) probe.v[j] = m.x[j];
    const double b_lin = boundary_stress(probe);
    for (std::size_t j = 0; j < m.x.size(); ++j) {
      probe.v[j] = m.x[j] * std::pow(m.x[j] / m.R_bar, k);
    }
    const double b_bump = boundary_stress(probe);
    pert.bump_coefficient = b_bump != 0.0 ? b_lin / b_bump : 0.0;
    for (std::size_t j = 0; j < m.x.size(); ++j) {
      s.v[j] = eps * m.x[j] * (1.0 - pert.bump_coefficient * std::pow(m.x[j] / m.R_bar, k));
    }
    s.v[0] = 0.0;
    return s;
  }

  pert.bump_coefficient = 0.0;
  if (eps == 0.0) return s;
  const double lambda = 1.0 + eps;
  if (!(lambda > 0.0)) throw ParameterError("map_dilation needs 1 + epsilon > 0");
  const auto& prof = *m.profile;
  InitialDensity rho0;
  rho0.R0 = lambda * m.R_bar;
  rho0.rho = [&prof, lambda](double y) {
    return prof.density_at(y / lambda) / (lambda * lambda * lambda);
  };
  // The dilation is exact on the mesh's own cumulative masses.
  std::vector<double> q_in(m.x.size(), 0.0), q_out(m.x.size(), 0.0);
  for (std::size_t c = 0; c < m.n_cells(); ++c) q_in[c + 1] = q_in[c] + m.cell_mass[c];
  for (std::size_t c = m.n_cells(); c-- > 0;) q_out[c] = q_out[c + 1] + m.cell_mass[c];
  std::vector<double> dq(m.x.size());
  for (std::size_t j = 0; j < m.x.size(); ++j) dq[j] = m.x[j] * m.x[j] * m.rho_bar[j];
  std::vector<double> dq_neg(dq.size());
  for (std::size_t j = 0; j < dq.size(); ++j) dq_neg[j] = -dq[j];
  auto inner_interp = std::make_shared<HermiteInterpolant>(m.x, q_in, dq);
  auto outer_interp = std::make_shared<HermiteInterpolant>(m.x, q_out, dq_neg);
  const double R = m.R_bar;
  rho0.cumulative = [inner_interp, lambda, R, total = q_in.back()](double y) {
    const double z = y / lambda;
    return z >= R ? total : (*inner_interp)(z);
  };
  rho0.outer = [outer_interp, lambda, R](double y) {
    const double z = y / lambda;
    return z >= R ? 0.0 : (*outer_interp)(z);
  };
  s.r = initial_map(rho0, m);
  return s;
}

}  // namespace vstar
