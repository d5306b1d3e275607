#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>

#include "vstar/diagnostics.hpp"
#include "vstar/eos.hpp"
#include "vstar/equilibrium.hpp"
#include "vstar/simulator.hpp"

using namespace vstar;

namespace {

void BM_WhiteDwarfPressure(benchmark::State& state) {
  const auto eos = make_white_dwarf({1.0, 1.0});
  double s = 1e-6;
  for (auto _ : state) {
    benchmark::DoNotOptimize(eos->pressure(s));
    benchmark::DoNotOptimize(eos->enthalpy(s));
    s = s < 1e6 ? s * 1.01 : 1e-6;
  }
}
BENCHMARK(BM_WhiteDwarfPressure);

void BM_PressureDifference(benchmark::State& state) {
  const auto eos = make_polytrope({1.0, 5.0 / 3.0});
  double d = 1e-9;
  for (auto _ : state) {
    benchmark::DoNotOptimize(eos->pressure_difference(0.3, d));
    benchmark::DoNotOptimize(eos->potential_difference(0.3, d));
    d = d < 0.5 ? d * 1.1 : 1e-9;
  }
}
BENCHMARK(BM_PressureDifference);

void BM_IntegrateProfile(benchmark::State& state) {
  ProfileOptions o;
  o.n_cells = static_cast<std::size_t>(state.range(0));
  const auto eos = make_polytrope({1.0, 2.0});
  for (auto _ : state) benchmark::DoNotOptimize(integrate_profile(eos, 1.0, 1.0, o));
}
BENCHMARK(BM_IntegrateProfile)->Arg(512)->Arg(4096)->Unit(benchmark::kMillisecond);

void BM_WhiteDwarfMass(benchmark::State& state) {
  const auto eos = make_white_dwarf({1.0, 1.0});
  for (auto _ : state) benchmark::DoNotOptimize(mass_radius(*eos, 1e4, 1.0, 1e-10));
}
BENCHMARK(BM_WhiteDwarfMass)->Unit(benchmark::kMillisecond);

SimState perturbed(std::size_t n) {
  ProfileOptions o;
  o.n_cells = n;
  const auto profile = std::make_shared<const EquilibriumProfile>(
      integrate_profile(make_polytrope({1.0, 2.0}), 1.0, 1.0, o));
  Perturbation p;
  p.epsilon = 1e-3;
  return make_compatible_perturbation(make_mesh(profile), p, 0.1, 0.1);
}

void BM_Step(benchmark::State& state) {
  const SimState s = perturbed(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(step(s, 1e-3));
}
BENCHMARK(BM_Step)->Arg(512)->Arg(2048)->Unit(benchmark::kMicrosecond);

void BM_EnergyReport(benchmark::State& state) {
  const SimState s = perturbed(512);
  for (auto _ : state) benchmark::DoNotOptimize(energy_report(s, {}));
}
BENCHMARK(BM_EnergyReport)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
