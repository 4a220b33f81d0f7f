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

// Bundled topologies. Every device gets port 0 as its edge port with a host
// "h-<device>" attached; links take ports 1, 2, ... in edge-list order.

#ifndef WEDGETAIL_SIM_TOPOLOGIES_H_
#define WEDGETAIL_SIM_TOPOLOGIES_H_

#include <string>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "wedgetail/net_model.h"

namespace wedgetail::sim {

using EdgeList = std::vector<std::pair<std::string, std::string>>;

absl::StatusOr<NetworkState> BuildTopology(
    const std::vector<std::string>& devices, const EdgeList& edges,
    int header_bits);

// 12-node Australian research backbone.
NetworkState AarnetTopology(int header_bits = 32);
// 54 nodes, 81 links, generated from a fixed seed.
NetworkState Zib54Topology(int header_bits = 32);
// a b c d i e c1 f g; c reaches e through d or i.
NetworkState Figure1Topology(int header_bits = 8);
// Three transit hubs b, g, f, each with three leaves.
NetworkState Figure2Topology(int header_bits = 16);
NetworkState LineTopology(int devices, int header_bits = 16);
// Hub "hub" with leaves l1..ln.
NetworkState StarTopology(int leaves, int header_bits = 16);

// aarnet, zib54, figure1, figure2, line<N>, star<N>. header_bits 0 picks the
// topology default.
absl::StatusOr<NetworkState> TopologyByName(absl::string_view name,
                                            int header_bits = 0);

}  // namespace wedgetail::sim

#endif  // WEDGETAIL_SIM_TOPOLOGIES_H_
