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

// Shortest-path forwarding tables over randomly owned destination prefixes.

#ifndef WEDGETAIL_SIM_RULES_GEN_H_
#define WEDGETAIL_SIM_RULES_GEN_H_

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "absl/status/statusor.h"
#include "wedgetail/header_space.h"
#include "wedgetail/net_model.h"

namespace wedgetail::sim {

struct RuleGenOptions {
  int prefixes = 40;
  int min_length = 8;
  int max_length = 24;
  uint64_t seed = 1;
  // Every device punts 11111111/8 to the controller at priority 100.
  bool controller_prefix = true;
};

struct PrefixOwner {
  HeaderPattern prefix;
  DeviceId owner;
};

struct GeneratedRules {
  std::vector<PrefixOwner> prefixes;
  size_t rule_count = 0;
};

// The control prefix, 11111111 followed by wildcards.
HeaderPattern ControlPrefix(int header_bits);

// Replaces every flow table in `state`. Prefixes never overlap each other
// or the control prefix; each goes to a device in a shuffled round robin.
// Ties between equal-length paths go to the smaller next-hop id.
absl::StatusOr<GeneratedRules> GenerateRules(NetworkState& state,
                                             const RuleGenOptions& options);

// Next hop port from `device` towards `owner`, skipping `avoid` if set.
// nullopt when unreachable; 0 when device == owner.
absl::StatusOr<std::map<DeviceId, std::map<DeviceId, PortId>>> NextHops(
    const NetworkState& state, const std::optional<DeviceId>& avoid = {});

// Flow table for `device` that routes every prefix around `avoid`; what the
// controller installs for Update_forwarding_table.
absl::StatusOr<std::vector<FlowRule>> RoutesAvoiding(
    const NetworkState& state, const GeneratedRules& rules,
    const DeviceId& device, const DeviceId& avoid);

// Turns `device`'s forwarding towards any of `ports` into a group over all
// of them, except for prefixes owned by the devices behind those ports.
absl::Status GroupRoutesAt(NetworkState& state, const GeneratedRules& rules,
                           const DeviceId& device,
                           const std::vector<PortId>& ports);

}  // namespace wedgetail::sim

#endif  // WEDGETAIL_SIM_RULES_GEN_H_
