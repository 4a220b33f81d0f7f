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

// Packet labels, per-hop observations and actual trajectory reconstruction.
//
// Every device that handles a packet reports one observation per emitted
// copy: the label of the packet as it leaves the device, the ingress port,
// where it went and when. A packet whose header a device rewrites therefore
// shows up under a new label from that device on.

#ifndef WEDGETAIL_TRAJECTORY_H_
#define WEDGETAIL_TRAJECTORY_H_

#include <cstdint>
#include <map>
#include <set>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "wedgetail/net_model.h"

namespace wedgetail {

using PacketLabel = uint32_t;
inline constexpr int kDefaultLabelBits = 20;

struct PacketHeaderFields {
  uint32_t src_ip = 0;
  uint32_t dst_ip = 0;
  uint8_t protocol = 6;
  uint16_t ip_id = 0;
  uint16_t src_port = 0;
  uint16_t dst_port = 0;
  uint8_t ttl = 64;

  friend bool operator==(const PacketHeaderFields&,
                         const PacketHeaderFields&) = default;
};

// FNV-1a over the big-endian bytes of src_ip, dst_ip, protocol, ip_id,
// src_port and dst_port (ports zeroed unless the protocol is TCP or UDP),
// then a splitmix64 finalizer; the label is the top `label_bits` bits.
// `label_bits` must be in [1, 32].
PacketLabel LabelPacket(const PacketHeaderFields& fields,
                        int label_bits = kDefaultLabelBits);

// The L-bit header seen by the forwarding model: the top L bits of
// dst_ip:src_ip. For L = 32 this is the destination address.
uint64_t ModelHeader(const PacketHeaderFields& fields, int header_bits);
// Overwrites the bits of `fields` that ModelHeader reads.
PacketHeaderFields WithModelHeader(PacketHeaderFields fields, uint64_t header,
                                   int header_bits);

struct Observation {
  PacketLabel label = 0;
  DeviceId device;
  PortId in_port = 0;
  OutPort out;
  Nanos timestamp = 0;

  friend bool operator==(const Observation&, const Observation&) = default;
};

// Tab separated: label, device, in_port, out (port number, "drop",
// "controller" or "absorbed"), timestamp.
std::string FormatObservation(const Observation& obs);
absl::StatusOr<Observation> ParseObservation(absl::string_view line);
std::string FormatObservationLog(const std::vector<Observation>& log);
absl::StatusOr<std::vector<Observation>> ParseObservationLog(
    absl::string_view text);

std::map<PacketLabel, std::vector<Observation>> GroupByLabel(
    const std::vector<Observation>& log);

enum class WalkOutcome {
  kDelivered,   // left the network through an unlinked port
  kController,  // consumed by the controller
  kDropped,     // a device reported dropping it
  kVanished,    // sent towards `next_device`, which never reported it
};

absl::string_view WalkOutcomeName(WalkOutcome outcome);

// One root-to-leaf path through the reconstruction tree.
struct Walk {
  std::vector<size_t> nodes;  // indices into ActualTrajectory::nodes
  std::vector<DeviceId> devices;
  WalkOutcome outcome = WalkOutcome::kDelivered;
  DeviceId next_device;  // set for kVanished
};

struct ActualTrajectory {
  PacketLabel label = 0;
  // Sorted by timestamp.
  std::vector<Observation> nodes;
  // parent[i] is the node that sent node i its copy, or -1 for the root.
  std::vector<int> parent;
  std::vector<Walk> walks;

  const Observation& root() const { return nodes.front(); }
};

struct Reconstruction {
  enum class Status { kOk, kNoTrajectory, kInvalid };
  Status status = Status::kNoTrajectory;
  ActualTrajectory trajectory;
  std::string reason;

  bool ok() const { return status == Status::kOk; }
};

// Rebuilds how the packet labelled `label` moved. Each observation is linked
// to the latest earlier observation whose output port leads to it; further
// emissions of the same arrival become its siblings. More than
// one root means two unrelated packets share the label, which is reported
// as invalid rather than guessed at.
Reconstruction ReconstructActual(const std::vector<Observation>& observations,
                                 PacketLabel label, const NetworkState& net);

struct TimedHop {
  DeviceId device;
  Nanos timestamp = 0;

  friend bool operator==(const TimedHop&, const TimedHop&) = default;
};

struct Trajectory {
  PacketLabel label = 0;
  PortId port = 0;  // injection port
  std::vector<TimedHop> hops;

  std::vector<DeviceId> Devices() const;
};

// Converts every walk of a reconstruction into a trajectory.
std::vector<Trajectory> TrajectoriesOf(const ActualTrajectory& actual,
                                       PortId port);

// Trajectories keyed by (label, device sequence). Safe for concurrent use.
class TrajectoryStore {
 public:
  // False if a trajectory with the same label and device sequence exists.
  bool Insert(const Trajectory& trajectory);
  size_t size() const;
  std::vector<Trajectory> All() const;

 private:
  mutable std::shared_mutex mu_;
  std::set<std::pair<PacketLabel, std::vector<DeviceId>>> keys_;
  std::vector<Trajectory> trajectories_;
};

}  // namespace wedgetail

#endif  // WEDGETAIL_TRAJECTORY_H_
