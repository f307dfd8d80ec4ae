//
// qfipmp - Copyright 2026 The qfipmp Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <benchmark/benchmark.h>

#include <random>

#include "qfipmp/dynamics.hpp"
#include "qfipmp/fisher.hpp"
#include "qfipmp/pmp.hpp"

namespace {

using namespace qfipmp;

ModelSpec spec_for(int n_spins, ChannelKind kind) {
  ModelSpec s;
  s.n_spins = n_spins;
  s.channel = {kind, 1.5};
  return s;
}

ControlProtocol random_protocol(int segments, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-10.0, 10.0);
  ControlProtocol u = ControlProtocol::constant(1.0, segments, 0.0);
  for (double& v : u.values) v = dist(rng);
  return u;
}

// state.range(0): spins, state.range(1): channel index
void BM_PropagateForward(benchmark::State& state) {
  const Model model(spec_for(static_cast<int>(state.range(0)),
                             static_cast<ChannelKind>(state.range(1))));
  const ControlProtocol u = random_protocol(50, 3);
  const Operator rho0 = coherent_x_state(model.n_spins());
  const int substeps = default_substeps(u.duration, u.segments());
  for (auto _ : state) {
    benchmark::DoNotOptimize(propagate_forward(model, u, rho0, substeps));
  }
  state.SetItemsProcessed(state.iterations() * u.segments() * substeps);
}
BENCHMARK(BM_PropagateForward)
    ->Args({2, static_cast<int>(ChannelKind::None)})
    ->Args({2, static_cast<int>(ChannelKind::Depolarization)})
    ->Args({2, static_cast<int>(ChannelKind::Flipping)})
    ->Args({3, static_cast<int>(ChannelKind::Dephasing)})
    ->Args({4, static_cast<int>(ChannelKind::Dephasing)})
    ->Unit(benchmark::kMillisecond);

void BM_EvaluateSwitching(benchmark::State& state) {
  const Model model(spec_for(2, static_cast<ChannelKind>(state.range(0))));
  const ControlProtocol u = random_protocol(50, 5);
  const Operator rho0 = coherent_x_state(2);
  const int substeps = default_substeps(u.duration, u.segments());
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate_switching(model, u, rho0, CostSpec{}, substeps));
  }
}
BENCHMARK(BM_EvaluateSwitching)
    ->Arg(static_cast<int>(ChannelKind::None))
    ->Arg(static_cast<int>(ChannelKind::Dephasing))
    ->Arg(static_cast<int>(ChannelKind::Flipping))
    ->Unit(benchmark::kMillisecond);

void BM_SldPartials(benchmark::State& state) {
  const Model model(spec_for(static_cast<int>(state.range(0)), ChannelKind::Dephasing));
  const ControlProtocol u = random_protocol(10, 9);
  const AugmentedState end =
      propagate_forward(model, u, coherent_x_state(model.n_spins()), 8).terminal();
  for (auto _ : state) {
    benchmark::DoNotOptimize(sld_partials(end.rho, end.rho_omega));
  }
}
BENCHMARK(BM_SldPartials)->Arg(1)->Arg(2)->Arg(3)->Unit(benchmark::kMicrosecond);

void BM_QfiCostateBoundary(benchmark::State& state) {
  const Model model(spec_for(2, ChannelKind::Flipping));
  const AugmentedState end =
      propagate_forward(model, random_protocol(10, 11), coherent_x_state(2), 8).terminal();
  for (auto _ : state) {
    benchmark::DoNotOptimize(qfi_costate_boundary(end.rho, end.rho_omega));
  }
}
BENCHMARK(BM_QfiCostateBoundary)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
