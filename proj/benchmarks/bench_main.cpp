#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "hopflax/hopf_lax.hpp"
#include "hopflax/legendre.hpp"
#include "hopflax/moreau.hpp"

using namespace hopflax;

namespace {

Field noise(const Grid& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<double> v(g.size());
  for (double& x : v) x = d(rng);
  return Field::tabulated(g, std::move(v));
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

}  // namespace

static void BM_MoreauLine(benchmark::State& state) {
  const Field u = noise(Grid::line(-1.0, 1.0, static_cast<std::size_t>(state.range(0))), 1);
  for (auto _ : state) benchmark::DoNotOptimize(moreau_quadratic(u, 0.1));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MoreauLine)->RangeMultiplier(4)->Range(64, 65536)->Complexity(benchmark::oN);

static void BM_BruteLine(benchmark::State& state) {
  const Field u = noise(Grid::line(-1.0, 1.0, static_cast<std::size_t>(state.range(0))), 1);
  const Kernel l = Kernel::quadratic();
  for (auto _ : state) benchmark::DoNotOptimize(hopf_lax_brute(u, l, 0.1, u.grid()));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BruteLine)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

static void BM_MoreauPlane(benchmark::State& state) {
  const Field u = noise(Grid::uniform(2, -1.0, 1.0, static_cast<std::size_t>(state.range(0))), 2);
  for (auto _ : state) benchmark::DoNotOptimize(moreau_quadratic(u, 0.1));
}
BENCHMARK(BM_MoreauPlane)->Arg(65)->Arg(257)->Arg(1025);

static void BM_SeparablePlane(benchmark::State& state) {
  const Field u = noise(Grid::uniform(2, -1.0, 1.0, static_cast<std::size_t>(state.range(0))), 2);
  const Kernel l = Kernel::anisotropic(3.0, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(hopf_lax_separable(u, l, 0.1));
}
BENCHMARK(BM_SeparablePlane)->Arg(65)->Arg(257)->Arg(1025);

static void BM_BrutePlane(benchmark::State& state) {
  const Field u = noise(Grid::uniform(2, -1.0, 1.0, static_cast<std::size_t>(state.range(0))), 2);
  const Kernel l = Kernel::anisotropic(3.0, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(hopf_lax_brute(u, l, 0.1, u.grid()));
}
BENCHMARK(BM_BrutePlane)->Arg(33)->Arg(65);

static void BM_Legendre1D(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto p = linspace(-4.0, 4.0, n);
  std::vector<double> h(n);
  for (std::size_t i = 0; i < n; ++i) h[i] = std::cosh(p[i]);
  const auto q = linspace(-20.0, 20.0, n);
  for (auto _ : state) benchmark::DoNotOptimize(legendre_1d(p, h, q));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Legendre1D)->RangeMultiplier(8)->Range(64, 262144)->Complexity(benchmark::oN);

static void BM_Legendre1DBrute(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto p = linspace(-4.0, 4.0, n);
  std::vector<double> h(n);
  for (std::size_t i = 0; i < n; ++i) h[i] = std::cosh(p[i]);
  const auto q = linspace(-20.0, 20.0, n);
  for (auto _ : state) benchmark::DoNotOptimize(legendre_1d_brute(p, h, q));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Legendre1DBrute)->RangeMultiplier(8)->Range(64, 4096)->Complexity(benchmark::oNSquared);
BENCHMARK_MAIN();
