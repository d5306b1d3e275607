#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "vstar/errors.hpp"
#include "vstar/trajectory.hpp"

using namespace vstar;

namespace {

std::shared_ptr<const EquilibriumProfile> gamma2_profile(std::size_t n = 128) {
  ProfileOptions o;
  o.n_cells = n;
  return std::make_shared<const EquilibriumProfile>(
      integrate_profile(make_polytrope({1.0, 2.0}), 1.0, 1.0, o));
}

SimConfig short_run() {
  SimConfig c;
  c.n_cells = 128;
  c.t_final = 2.0;
  c.sample_every = 0.5;
  c.snapshot_every = 1.0;
  return c;
}

}  // namespace

TEST_SUITE("trajectory") {

TEST_CASE("unperturbed star stays put") {
  Perturbation p;
  const Trajectory tr = run(gamma2_profile(), p, short_run(), {});
  REQUIRE(tr.final_state.has_value());
  CHECK(tr.final_state->r == tr.final_state->mesh->x);
  for (double v : tr.final_state->v) CHECK(v == 0.0);
  for (const auto& rep : tr.series) CHECK(rep.frakE == 0.0);
  CHECK(tr.max_lyapunov_rise == 0.0);
  CHECK(tr.rejections == 0);
  CHECK(tr.warnings.empty());
}

TEST_CASE("sample and snapshot schedule") {
  Perturbation p;
  p.epsilon = 1e-3;
  std::vector<double> seen;
  TrajectorySink sink;
  sink.on_sample = [&](const EnergyReport& r) { seen.push_back(r.t); };
  std::size_t snaps = 0;
  sink.on_snapshot = [&](const Snapshot&) { ++snaps; };
  const Trajectory tr = run(gamma2_profile(), p, short_run(), {}, &sink);
  REQUIRE(tr.series.size() == 5);
  for (std::size_t k = 0; k < 5; ++k) CHECK(tr.series[k].t == 0.5 * k);
  REQUIRE(tr.snapshots.size() == 3);
  CHECK(tr.snapshots[1].t == 1.0);
  CHECK(tr.snapshots[2].t == 2.0);
  CHECK(seen.size() == 5);
  CHECK(snaps == 3);
  CHECK(tr.steps > 0);
  CHECK(tr.newton_iterations >= tr.steps);
  CHECK(tr.series.back().frakE < tr.series.front().frakE);
  CHECK(tr.max_lyapunov_rise <= 1e-8);
  CHECK(tr.snapshots[0].rho.size() == tr.snapshots[0].x.size());
}

TEST_CASE("zero final time") {
  Perturbation p;
  p.epsilon = 1e-3;
  SimConfig c = short_run();
  c.t_final = 0.0;
  const Trajectory tr = run(gamma2_profile(), p, c, {});
  CHECK(tr.series.size() == 1);
  CHECK(tr.snapshots.size() == 1);
  CHECK(tr.steps == 0);
}

TEST_CASE("remeshing when the grids differ") {
  Perturbation p;
  p.epsilon = 1e-3;
  SimConfig c = short_run();
  c.n_cells = 96;
  c.t_final = 0.5;
  const Trajectory tr = run(gamma2_profile(), p, c, {});
  CHECK(tr.final_state->r.size() == 97);
}

TEST_CASE("configuration errors") {
  SimConfig c;
  CHECK_NOTHROW(validate(c));
  auto bad = [](auto mutate) {
    SimConfig k;
    mutate(k);
    CHECK_THROWS_AS(validate(k), ParameterError);
  };
  bad([](SimConfig& k) { k.n_cells = 1; });
  bad([](SimConfig& k) { k.grading_q = 0.5; });
  bad([](SimConfig& k) { k.dt_init = 0.0; });
  bad([](SimConfig& k) { k.cfl = 1.5; });
  bad([](SimConfig& k) { k.t_final = -1.0; });
  bad([](SimConfig& k) { k.newton_max = 0; });
  bad([](SimConfig& k) { k.nu2 = 0.0; });
  bad([](SimConfig& k) { k.nu1 = -0.1; });
  bad([](SimConfig& k) { k.sample_every = 0.0; });
}

TEST_CASE("repeated rejections end the run") {
  Perturbation p;
  p.epsilon = 0.05;
  SimConfig c = short_run();
  c.newton_max = 1;
  c.newton_tol = 1e-300;
  c.max_rejections = 2;
  Trajectory partial;
  double failed_at = -1.0;
  try {
    (void)run(gamma2_profile(), p, c, {}, nullptr, &partial);
  } catch (const StepFailure& e) {
    failed_at = e.time();
  }
  CHECK(failed_at == 0.0);
  CHECK(partial.series.size() == 1);
  CHECK(partial.rejections == 3);
  CHECK(partial.final_state.has_value());
}

}  // TEST_SUITE
