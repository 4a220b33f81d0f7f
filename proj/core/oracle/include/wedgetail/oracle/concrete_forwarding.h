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

// Brute-force reference for header-space propagation: forwards every one of
// the 2^L concrete headers individually with first-match table lookups. Only
// feasible for small L; used to check the symbolic engine.

#ifndef WEDGETAIL_ORACLE_CONCRETE_FORWARDING_H_
#define WEDGETAIL_ORACLE_CONCRETE_FORWARDING_H_

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "wedgetail/expected_trajectories.h"
#include "wedgetail/net_model.h"

namespace wedgetail::oracle {

using PathHeaders = std::map<std::vector<DeviceId>, std::set<uint64_t>>;

struct ConcretePaths {
  // destination -> device sequence -> injected headers taking it.
  std::map<DeviceId, PathHeaders> by_destination;
  // Number of (header, branch) pairs that hit a loop.
  size_t loops = 0;
};

// Requires header_bits <= 20.
absl::StatusOr<ConcretePaths> ForwardEveryHeader(const NetworkState& state,
                                                 const DeviceId& source,
                                                 PortId port);

// Human readable differences; empty when the two agree exactly.
std::vector<std::string> Compare(const ConcretePaths& concrete,
                                 const ExpectedFromSource& symbolic);

struct RandomNetworkOptions {
  int devices = 5;
  int header_bits = 8;
  int max_rules_per_device = 6;
  // Probability that a rule carries a rewrite / an in_port constraint.
  double rewrite_probability = 0.15;
  double in_port_probability = 0.2;
};

// Connected random network with random wildcard rules covering every action
// type. Port 0 of each device is an edge port.
NetworkState RandomNetwork(std::mt19937_64& rng,
                           const RandomNetworkOptions& options);

struct EquivalenceReport {
  int networks = 0;
  int sources = 0;
  std::vector<std::string> mismatches;
};

// Checks symbolic against concrete propagation from every device's edge
// port on `networks` random networks with up to `max_devices` devices and
// `max_bits` header bits.
EquivalenceReport RunEquivalenceSuite(uint64_t seed, int networks,
                                      int max_devices, int max_bits);

}  // namespace wedgetail::oracle

#endif  // WEDGETAIL_ORACLE_CONCRETE_FORWARDING_H_
