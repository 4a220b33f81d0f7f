// Copyright 2026 The WedgeTail Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <random>
#include <string>
#include <vector>

#include "absl/strings/str_cat.h"
#include "benchmark/benchmark.h"
#include "wedgetail/expected_trajectories.h"
#include "wedgetail/header_space.h"
#include "wedgetail/response.h"
#include "wedgetail/sim/experiment.h"
#include "wedgetail/sim/simulator.h"
#include "wedgetail/target_id.h"
#include "wedgetail/transfer_function.h"

namespace wedgetail {
namespace {

sim::GeneratedNetwork Network(const char* topology) {
  sim::ExperimentConfig c;
  c.topology = topology;
  return *sim::GenerateNetwork(c);
}

void BM_ApplyTransfer(benchmark::State& state) {
  const sim::GeneratedNetwork net = Network("zib54");
  const TransferFunction tf =
      TransferFunction::FromDevice(net.state.devices().begin()->second);
  const HeaderSpace all = HeaderSpace::All(net.state.header_bits());
  for (auto _ : state) {
    benchmark::DoNotOptimize(ApplyTransfer(tf, all, 0));
  }
  state.SetLabel(absl::StrCat(tf.cases().size(), " rules"));
}
BENCHMARK(BM_ApplyTransfer);

void BM_ExpectedTrajectoriesFrom(benchmark::State& state) {
  const sim::GeneratedNetwork net =
      Network(state.range(0) == 0 ? "aarnet" : "zib54");
  const NetworkSnapshot snap = NetworkSnapshot::Capture(net.state);
  const TransferFunctions tfs(snap);
  const DeviceId source = snap.DeviceIds().front();
  for (auto _ : state) {
    benchmark::DoNotOptimize(ExpectedTrajectoriesFrom(snap, tfs, source, 0));
  }
}
BENCHMARK(BM_ExpectedTrajectoriesFrom)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_BuildScanPlan(benchmark::State& state) {
  const sim::GeneratedNetwork net = Network("zib54");
  std::mt19937_64 rng(1);
  const auto flows = sim::RandomFlows(net.state, net.rules.prefixes,
                                      static_cast<int>(state.range(0)), 24, rng);
  sim::Simulator simulator(net.state, {});
  const std::vector<Trajectory> corpus =
      sim::CorpusFromLog(simulator.Run(flows), net.state);
  const NetworkSnapshot snap = NetworkSnapshot::Capture(net.state);
  for (auto _ : state) {
    benchmark::DoNotOptimize(BuildScanPlan(corpus, snap, 3));
  }
  state.SetComplexityN(static_cast<int64_t>(corpus.size()));
}
BENCHMARK(BM_BuildScanPlan)->RangeMultiplier(4)->Range(500, 32000)->Complexity();

void BM_MatchPolicies(benchmark::State& state) {
  std::string xml = "<policies>";
  for (int i = 0; i < state.range(0); ++i) {
    absl::StrAppend(&xml, "<policy id=\"Q", i, "\"><subject>Controller</subject>",
                    "<action>Alarm</action><condition>device=d", i % 54,
                    "</condition><validity>1000</validity></policy>");
  }
  absl::StrAppend(&xml, "</policies>");
  const std::vector<ResponsePolicy> policies = *ParsePolicies(xml);
  std::vector<Verdict> verdicts(20);
  for (size_t i = 0; i < verdicts.size(); ++i) {
    verdicts[i].kind = VerdictKind::kDrop;
    verdicts[i].malicious_devices = {DeviceId(absl::StrCat("d", i))};
  }
  for (auto _ : state) {
    ResponseEngine engine(policies);
    benchmark::DoNotOptimize(engine.MatchAndExecute(verdicts, 0));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MatchPolicies)->RangeMultiplier(10)->Range(10, 1000)->Complexity();

}  // namespace
}  // namespace wedgetail

BENCHMARK_MAIN();
