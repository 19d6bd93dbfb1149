// Serial reference vs OpenMP kernels. Arg 0 = serial, 1 = parallel.
#include <benchmark/benchmark.h>

#include <numeric>

#include "pwr/baselines.hpp"
#include "pwr/graph.hpp"
#include "pwr/models.hpp"
#include "pwr/pwr.hpp"
#include "pwr/quadrature.hpp"
#include "pwr/relaxation.hpp"

using namespace pwr;

namespace {

ExecPolicy policy_of(const benchmark::State& s) { return s.range(0) ? ExecPolicy::parallel : ExecPolicy::serial; }

void label(benchmark::State& s) { s.SetLabel(s.range(0) ? "parallel" : "serial"); }

void BM_PseudoSpectral(benchmark::State& state) {
  ParameterSpace s;
  for (int k = 0; k < 4; ++k) s.add(Distribution::uniform(), "u");
  const std::vector<std::size_t> all{0, 1, 2, 3};
  const OrthoBasis b(s, all, {6, 6, 6, 6}, 6);
  const CollocationGrid g = tensor_grid(s, all, {7, 7, 7, 7});
  const Eigen::MatrixXd samples = Eigen::MatrixXd::Random(static_cast<Eigen::Index>(g.size()), 500);
  for (auto _ : state) benchmark::DoNotOptimize(pseudo_spectral_coeffs(samples, g, b, policy_of(state)));
  label(state);
}

void BM_MonteCarlo(benchmark::State& state) {
  const NetworkSystem sys = kuramoto_chain3(0.1, 0.2, 1.0, 200);
  for (auto _ : state) benchmark::DoNotOptimize(mc_run(sys, 1000, 1, policy_of(state)));
  label(state);
}

void BM_FullGridPcm(benchmark::State& state) {
  const NetworkSystem sys = kuramoto_chain3(0.1, 0.2, 1.0, 200);
  PcmOptions o;
  o.level = 6;
  o.policy = policy_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(full_grid_pcm(sys, o));
  label(state);
}

void BM_PwrNonintrusive(benchmark::State& state) {
  const NetworkSystem sys = kuramoto80(1, Kuramoto80Options{1.0, 0.05, 0.2, 0.5, 100});
  const InteractionGraph g = adjacency_from_jacobian(sys, sys.params.means());
  Decomposition d = spectral_partition(g);
  derive_parameter_sets(d, sys, g.pattern);
  PwrConfig cfg;
  cfg.lc = 2;
  cfg.eps = 1e-3;
  cfg.track_history = false;
  cfg.policy = policy_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(pwr_nonintrusive(sys, d, cfg));
  label(state);
}

void BM_WrSweep(benchmark::State& state) {
  const NetworkSystem sys = kuramoto80(2);
  const InteractionGraph g = adjacency_from_jacobian(sys, sys.params.means());
  const Decomposition d = spectral_partition(g);
  const auto xi = sys.params.means();
  const BlockOde b = block_ode_from_system(sys, d, xi);
  const Waveform start = Waveform::constant(sys.time_grid(), sys.x0);
  for (auto _ : state) benchmark::DoNotOptimize(wr_sweep(b, sys.time_grid(), start, sys.x0, policy_of(state)));
  label(state);
}

void BM_WaveSpectrum(benchmark::State& state) {
  const NetworkSystem sys = kuramoto80(3);
  const InteractionGraph g = adjacency_from_jacobian(sys, sys.params.means());
  WaveOptions o;
  o.policy = policy_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(wave_spectrum(g, o));
  label(state);
}

}  // namespace

BENCHMARK(BM_PseudoSpectral)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarlo)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FullGridPcm)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PwrNonintrusive)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->Iterations(1);
BENCHMARK(BM_WrSweep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WaveSpectrum)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
