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

// Discrete-event packet simulator. Devices follow their flow tables unless
// an implant says otherwise; implants live only here, never in the state
// handed to the detector.

#ifndef WEDGETAIL_SIM_SIMULATOR_H_
#define WEDGETAIL_SIM_SIMULATOR_H_

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "wedgetail/detection.h"
#include "wedgetail/header_space.h"
#include "wedgetail/net_model.h"
#include "wedgetail/scanner.h"
#include "wedgetail/sim/rules_gen.h"
#include "wedgetail/trajectory.h"

namespace wedgetail::sim {

enum class ImplantAction { kReplay, kDrop, kMisroute, kGenerate, kDelay };

enum class ImplantScope {
  kAll,             // every packet on every port
  kIngressSubset,   // packets from `port` matching `subset`
  kIngressSampled,  // packets from `port`, with probability `probability`
  kEgress,          // packets the table sends out of `port`
  kEgressSubset,    // packets for `port` matching `subset`
  kControllerBound, // packets the table sends to the controller
};

absl::string_view ImplantActionName(ImplantAction a);
absl::string_view ImplantScopeName(ImplantScope s);
// The verdict a lone implant of this action should produce.
VerdictKind ExpectedVerdict(ImplantAction a);

struct AttackImplant {
  int id = 0;
  DeviceId device;
  ImplantAction action = ImplantAction::kDrop;
  ImplantScope scope = ImplantScope::kAll;
  PortId port = 0;
  std::optional<HeaderPattern> subset;
  // Chance the implant acts on a packet in scope.
  double probability = 1.0;
  // Replay: neighbor that receives the copy, or ControllerId().
  DeviceId replay_to;
  // Drop: fraction of in-scope packets dropped.
  double selectivity = 1.0;
  PortId misroute_port = 0;
  // Generate: header bits forced on the packet, and whether the original
  // still goes through alongside a fabricated one.
  std::optional<HeaderPattern> rewrite;
  bool fabricate = false;
  Nanos delay = 20'000'000;
  bool enabled = true;

  std::string ToString() const;
};

struct SimOptions {
  uint64_t seed = 1;
  Nanos link_latency = 1'000'000;
  Nanos processing = 10'000;
  Nanos jitter = 20'000;
  // Per device and packet.
  double congestion_drop = 0.0;
  // Mean extra queuing per hop while congested.
  Nanos queue_mean = 500'000;
  int ttl = 64;
  int label_bits = kDefaultLabelBits;
  // Gap between probes of one batch.
  Nanos injection_spacing = 2'000;
};

struct FireRecord {
  int implant = 0;
  PacketLabel label = 0;
  Nanos at = 0;
};

struct Flow {
  DeviceId source;
  PortId port = 0;
  PacketHeaderFields fields;
};

class Simulator : public ProbeChannel {
 public:
  Simulator(NetworkState state, SimOptions options);

  // InvalidArgument for unknown devices or ports, out-of-range parameters
  // and a second implant on the same device with the same scope.
  absl::Status AddImplant(AttackImplant implant);
  absl::Status SetImplantEnabled(int id, bool enabled);
  const std::vector<AttackImplant>& implants() const { return implants_; }

  absl::StatusOr<ProbeResult> Inject(const std::vector<Probe>& probes) override;
  const NetworkState& LiveState() const override { return state_; }
  NetworkState& mutable_state() { return state_; }

  // Sends the flows one by one and returns what the collector saw.
  ObservationLog Run(const std::vector<Flow>& flows);

  const std::vector<FireRecord>& fires() const { return fires_; }
  Nanos now() const { return now_; }
  void set_congestion(double rate) { options_.congestion_drop = rate; }
  const SimOptions& options() const { return options_; }

 private:
  struct Packet {
    PacketHeaderFields fields;
    PacketLabel label = 0;
    int ttl = 64;
    bool copy = false;  // replay copies are not replayed again
  };
  struct Event {
    Nanos at = 0;
    uint64_t seq = 0;
    DeviceId device;  // ControllerId() for the controller
    PortId in_port = 0;
    DeviceId from;    // sender, for controller arrivals
    Packet packet;
  };
  struct Emission {
    OutPort out;
    Packet packet;
  };

  void Schedule(Event e);
  void Drain(std::vector<Observation>& log);
  void Arrive(const Event& e, std::vector<Observation>& log);
  std::vector<Emission> Forward(const ForwardingDevice& d, PortId in_port,
                                const Packet& p, uint64_t header);
  const AttackImplant* InScope(const DeviceId& d, PortId in_port,
                               uint64_t header,
                               const std::vector<Emission>& normal,
                               const Packet& p);
  Packet Relabel(PacketHeaderFields fields, const Packet& like) const;

  NetworkState state_;
  SimOptions options_;
  std::mt19937_64 rng_;
  std::vector<AttackImplant> implants_;
  std::vector<Event> queue_;  // heap
  uint64_t seq_ = 0;
  Nanos now_ = 0;
  std::vector<FireRecord> fires_;
};

// Random unicast flows from a device's edge port to a header owned by
// another device. Labels are unique within the returned batch.
std::vector<Flow> RandomFlows(const NetworkState& state,
                              const std::vector<PrefixOwner>& prefixes,
                              int count, int label_bits, std::mt19937_64& rng);

}  // namespace wedgetail::sim

#endif  // WEDGETAIL_SIM_SIMULATOR_H_
