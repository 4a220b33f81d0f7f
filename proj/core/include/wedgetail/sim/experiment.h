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

// End-to-end runs: build a network, calibrate on benign traffic, order the
// devices, implant attacks, sweep, respond and score against ground truth.

#ifndef WEDGETAIL_SIM_EXPERIMENT_H_
#define WEDGETAIL_SIM_EXPERIMENT_H_

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "wedgetail/detection.h"
#include "wedgetail/net_model.h"
#include "wedgetail/response.h"
#include "wedgetail/sim/config.h"
#include "wedgetail/sim/rules_gen.h"
#include "wedgetail/sim/simulator.h"
#include "wedgetail/target_id.h"

namespace wedgetail::sim {

// Topology plus generated rules, as `gen` writes them.
struct GeneratedNetwork {
  NetworkState state;
  GeneratedRules rules;
};

absl::StatusOr<GeneratedNetwork> GenerateNetwork(const ExperimentConfig& config);

// `count` implants on distinct random devices, drawn from the config's
// action and scope mixes.
absl::StatusOr<std::vector<AttackImplant>> GenerateImplants(
    const GeneratedNetwork& net, const ExperimentConfig& config, int count,
    std::mt19937_64& rng);

// Trajectories of a benign observation log, for target identification.
std::vector<Trajectory> CorpusFromLog(const ObservationLog& log,
                                      const NetworkState& state);

// The first `flows` flows of a log, by injection order.
ObservationLog Window(const ObservationLog& log, size_t flows);

struct ImplantOutcome {
  int trial = 0;
  AttackImplant implant;
  bool triggered = false;
  bool detected = false;
  bool kind_match = false;
  bool localized = false;  // some verdict names exactly this device
  std::vector<std::string> verdict_kinds;
  int detection_sweep = 0;
  Nanos detection_time = 0;  // first malicious packet to end of sweep
};

struct MetricsReport {
  std::string topology;
  uint64_t seed = 0;
  int devices = 0;
  size_t rules = 0;
  int trials = 0;
  int sweeps = 0;
  double congestion = 0;
  int calibration_flows = 0;
  Nanos delay_bound = 0;
  int implants = 0;
  int triggered = 0;
  int detected = 0;
  int kind_matches = 0;
  int localized = 0;
  // Non-benign verdicts naming none of the implanted devices.
  int false_positives = 0;
  int probes = 0;
  int reprobes = 0;
  int demoted = 0;
  int unreachable_pairs = 0;
  int actions = 0;
  int suppressed = 0;
  int recoveries = 0;
  std::vector<ImplantOutcome> outcomes;
  std::vector<std::string> false_positive_details;

  // nullopt when nothing was triggered.
  std::optional<double> accuracy() const;
  std::optional<double> kind_match_rate() const;
  std::optional<double> localization_rate() const;
  std::optional<double> false_negative_rate() const;

  std::string ToJson() const;
  static std::string CsvHeader();
  std::string ToCsvRow() const;
};

struct PhaseTimings {
  double generate_s = 0;
  double calibration_s = 0;
  double target_id_s = 0;
  double scan_s = 0;
  double response_s = 0;
  double total_s = 0;

  std::string ToJson() const;
};

struct ExperimentResult {
  MetricsReport report;
  PhaseTimings timings;
  ScanPlan plan;
  std::vector<Verdict> verdicts;
  std::vector<std::string> alarms;
};

absl::StatusOr<ExperimentResult> RunExperiment(const ExperimentConfig& config);

}  // namespace wedgetail::sim

#endif  // WEDGETAIL_SIM_EXPERIMENT_H_
