#include <benchmark/benchmark.h>

#include <string>

#include "mnar/mnar.hpp"

namespace {

const mnar::IncompleteTable& table(const char* name) {
  static const auto t5 = mnar::load_table(MNAR_BENCH_DATA_DIR "/table5.json");
  static const auto t8 = mnar::load_table(MNAR_BENCH_DATA_DIR "/table8.json");
  static const auto t4 = mnar::load_table(MNAR_BENCH_DATA_DIR "/table4.json");
  const std::string n = name;
  return n == "t5" ? t5 : n == "t8" ? t8 : t4;
}

void BM_FitClosedFormOneMissing(benchmark::State& state) {
  const auto& t = table("t5");
  const auto spec = mnar::parse_spec("Y1:Y3", t);
  for (auto _ : state) benchmark::DoNotOptimize(mnar::fit(t, spec));
}
BENCHMARK(BM_FitClosedFormOneMissing);

void BM_FitClosedFormTwoMissing(benchmark::State& state) {
  const auto& t = table("t8");
  const auto spec = mnar::parse_spec("Y1:Y2,Y2:self", t);
  for (auto _ : state) benchmark::DoNotOptimize(mnar::fit(t, spec));
}
BENCHMARK(BM_FitClosedFormTwoMissing);

void BM_FitEm(benchmark::State& state) {
  const auto& t = table("t8");
  const auto spec = mnar::parse_spec("Y1:Y2,Y2:self", t);
  mnar::FitOptions opt;
  opt.force_em = true;
  for (auto _ : state) benchmark::DoNotOptimize(mnar::fit(t, spec, opt));
}
BENCHMARK(BM_FitEm);

void BM_CompareAllModels(benchmark::State& state) {
  const auto& t = table(state.range(0) == 1 ? "t5" : state.range(0) == 2 ? "t8" : "t4");
  for (auto _ : state) benchmark::DoNotOptimize(mnar::compare_models(t));
}
BENCHMARK(BM_CompareAllModels)->Arg(1)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_FitEmScaling(benchmark::State& state) {
  const int levels = static_cast<int>(state.range(0));
  const auto sim_model = mnar::parse_simulation_model(
      R"({"variables":[{"name":"Y1","levels":)" + std::to_string(levels) +
      R"(,"missing":true},{"name":"Y2","levels":)" + std::to_string(levels) +
      R"(,"missing":true},{"name":"Y3","levels":)" + std::to_string(levels) +
      R"(,"missing":false}],"model":"Y1:const,Y2:const","baseline":"uniform","odds":{"Y1":[0.2],"Y2":[0.3]}})");
  const auto t = mnar::simulate_table(sim_model, 1e5, 1);
  const auto spec = mnar::parse_spec("Y1:Y3,Y2:Y3", t);
  mnar::FitOptions opt;
  opt.force_em = true;
  for (auto _ : state) benchmark::DoNotOptimize(mnar::fit(t, spec, opt));
}
BENCHMARK(BM_FitEmScaling)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
