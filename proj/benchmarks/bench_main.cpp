#include <benchmark/benchmark.h>

#include <random>

#include "tspbmc/library.hpp"
#include "tspbmc/oracle.hpp"
#include "tspbmc/smt_encoder.hpp"
#include "tspbmc/tiis.hpp"

namespace {

using namespace tspbmc;

TiisModel model(const std::string& protocol, const std::string& scenario, int k) {
  const LibraryEntry* e = find_library_entry(protocol);
  return build_model(parse_protocol(e->protocol_text), parse_scenario(e->scenarios.at(scenario)), k);
}

void BM_BuildModel(benchmark::State& state) {
  const LibraryEntry* e = find_library_entry("wmf");
  ProtocolSpec spec = parse_protocol(e->protocol_text);
  Scenario s = parse_scenario(e->scenarios.at("replay"));
  for (auto _ : state) benchmark::DoNotOptimize(build_model(spec, s, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_BuildModel)->Arg(2)->Arg(3)->Arg(4);

void BM_Encode(benchmark::State& state) {
  TiisModel m = model("nspkt", "mitm1_lowe", 2);
  const int bound = static_cast<int>(state.range(0));
  std::size_t bytes = 0;
  for (auto _ : state) {
    SmtScript s = encode({m, bound});
    bytes = s.text.size();
    benchmark::DoNotOptimize(s);
  }
  state.counters["script_bytes"] = static_cast<double>(bytes);
}
BENCHMARK(BM_Encode)->Arg(2)->Arg(5)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_Closure(benchmark::State& state) {
  TiisModel m = model("wmf", "replay", 2);
  std::mt19937 rng(1);
  std::bernoulli_distribution bit(0.2);
  std::vector<Knowledge> inputs(64, Knowledge(m.universe.size()));
  for (Knowledge& k : inputs)
    for (std::size_t i = 0; i < k.size(); ++i) k[i] = bit(rng);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(closure(inputs[i++ % inputs.size()], m.rules));
}
BENCHMARK(BM_Closure);

void BM_StratifiedClosure(benchmark::State& state) {
  TiisModel m = model("wmf", "replay", 2);
  std::mt19937 rng(1);
  std::bernoulli_distribution bit(0.2);
  Knowledge k(m.universe.size());
  for (std::size_t i = 0; i < k.size(); ++i) k[i] = bit(rng);
  for (auto _ : state) benchmark::DoNotOptimize(stratified_closure(k, m.rules, m.strata));
}
BENCHMARK(BM_StratifiedClosure);

void BM_Oracle(benchmark::State& state) {
  TiisModel m = model("nspkt", "fair", static_cast<int>(state.range(0)));
  std::size_t states = 0;
  for (auto _ : state) states = explicit_reach(m, 8).states;
  state.counters["states"] = static_cast<double>(states);
}
BENCHMARK(BM_Oracle)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
