#include <random>

#include <benchmark/benchmark.h>

#include "cmps/finite.hpp"
#include "cmps/transfer.hpp"
#include "cmps/uniform.hpp"

namespace {

using cmps::Complex;
using cmps::Matrix;

Matrix random_matrix(std::mt19937_64& rng, int d, double scale = 0.8) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = scale * Complex(dist(rng), dist(rng));
  return m;
}

cmps::UniformCMPS random_state(int d, uint64_t seed = 1234) {
  std::mt19937_64 rng(seed);
  cmps::UniformCMPS s;
  s.species = cmps::SpeciesTable::build({{"b", cmps::Statistics::boson}});
  s.Q = random_matrix(rng, d);
  s.R = {random_matrix(rng, d)};
  return s;
}

void BM_TransferApply(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const auto s = random_state(d);
  std::mt19937_64 rng(99);
  const Matrix f = random_matrix(rng, d);
  for (auto _ : state)
    benchmark::DoNotOptimize(cmps::transfer_apply(s, f, cmps::Side::right));
}
BENCHMARK(BM_TransferApply)->Arg(4)->Arg(16)->Arg(64);

void BM_DenseTransfer(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const auto s = random_state(d);
  for (auto _ : state)
    benchmark::DoNotOptimize(cmps::dense_transfer(s, cmps::TransferDressing::plain(), 16));
}
BENCHMARK(BM_DenseTransfer)->Arg(4)->Arg(8)->Arg(16);

void BM_Normalize(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const auto s = random_state(d);
  for (auto _ : state) benchmark::DoNotOptimize(cmps::normalize(s));
}
BENCHMARK(BM_Normalize)->Arg(2)->Arg(4)->Arg(8);

void BM_MomentumOccupation(benchmark::State& state) {
  const auto s0 = random_state(4);
  const auto [s, fp] = cmps::normalize(s0);
  const std::vector<double> ps{0.5, 1.0, 2.0, 4.0, 8.0};
  for (auto _ : state)
    benchmark::DoNotOptimize(cmps::momentum_occupation(s, fp, 0, 0, ps));
}
BENCHMARK(BM_MomentumOccupation);

void BM_FinitePropagate(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(7);
  cmps::FiniteCMPS s;
  s.species = cmps::SpeciesTable::build({{"b", cmps::Statistics::boson}});
  s.L = 1.0;
  s.Q.assign(n + 1, random_matrix(rng, 2));
  s.R.push_back(std::vector<Matrix>(n + 1, random_matrix(rng, 2)));
  s.vL = cmps::Vector::Ones(2).normalized();
  s.vR = cmps::Vector::Ones(2).normalized();
  for (auto _ : state) benchmark::DoNotOptimize(cmps::propagate(s));
}
BENCHMARK(BM_FinitePropagate)->Arg(500)->Arg(2000);

}  // namespace

BENCHMARK_MAIN();
