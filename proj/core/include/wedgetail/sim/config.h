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

// Experiment configuration, read from INI-style text:
//
//   topology = aarnet
//   seed = 7
//   implants = 1
//   trials = 50
//   [attack_mix]
//   replay = 0.40
//   [scope_mix]
//   all = 30

#ifndef WEDGETAIL_SIM_CONFIG_H_
#define WEDGETAIL_SIM_CONFIG_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "wedgetail/net_model.h"

namespace wedgetail::sim {

// Fractions of implants per action. Must sum to at most 1; the remainder,
// if any, is spread proportionally.
struct AttackMix {
  double replay = 0.40;
  double drop = 0.30;
  double misroute = 0.05;
  double generate = 0.10;
  double delay = 0.15;
};

// Relative weights of the implant scopes.
struct ScopeMix {
  double all = 30;
  double ingress_subset = 19;
  double ingress_sampled = 19;
  double egress = 25;
  double egress_subset = 15;
  double controller_bound = 11;
};

struct ExperimentConfig {
  std::string topology = "aarnet";
  uint64_t seed = 1;
  // 0 picks the topology default.
  int header_bits = 0;
  int prefixes = 0;
  // 0 reuses `seed`.
  uint64_t rule_seed = 0;

  // Implants per trial, on distinct devices.
  int implants = 0;
  int trials = 1;
  int sweeps = 1;
  AttackMix attack_mix;
  ScopeMix scope_mix;
  double drop_selectivity = 1.0;
  double delay_ms = 20;
  double sampled_probability = 0.5;

  double congestion = 0;
  // Benign trace for calibration and the target-identification corpus.
  int flows = 1000;
  int unit_flows = 100;
  int calibration_units = 10;

  std::vector<PortId> ports = {0};
  int label_bits = 20;
  int groups = 3;
  int probes_per_pair = 2;
  int confirmations = 3;
  int max_reprobes = 16;
  double alpha = 1e-3;

  // Policy XML file; empty means alarm-only.
  std::string policies;
  bool respond = true;
};

absl::Status ValidateConfig(const ExperimentConfig& config);
absl::StatusOr<ExperimentConfig> ParseConfig(absl::string_view text);
std::string ConfigToString(const ExperimentConfig& config);

}  // namespace wedgetail::sim

#endif  // WEDGETAIL_SIM_CONFIG_H_
