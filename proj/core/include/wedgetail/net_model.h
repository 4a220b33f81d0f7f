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

// Model of a software defined network: forwarding devices with priority
// ordered flow tables, bidirectional links, attached hosts and a controller
// sentinel. `NetworkState` is the mutable live network; `NetworkSnapshot` is
// an immutable, shareable capture of it that scans are evaluated against.

#ifndef WEDGETAIL_NET_MODEL_H_
#define WEDGETAIL_NET_MODEL_H_

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "wedgetail/header_space.h"

namespace wedgetail {

class DeviceId {
 public:
  DeviceId() = default;
  explicit DeviceId(std::string value) : value_(std::move(value)) {}

  const std::string& str() const { return value_; }
  bool empty() const { return value_.empty(); }

  friend bool operator==(const DeviceId&, const DeviceId&) = default;
  friend auto operator<=>(const DeviceId&, const DeviceId&) = default;

 private:
  std::string value_;
};

// The controller is addressed like a device so that packets punted to it
// form ordinary trajectories. No forwarding device may use this id.
const DeviceId& ControllerId();

using PortId = uint32_t;
using HostId = std::string;
// Simulated time in nanoseconds.
using Nanos = int64_t;

struct Endpoint {
  DeviceId device;
  PortId port = 0;

  friend bool operator==(const Endpoint&, const Endpoint&) = default;
  friend auto operator<=>(const Endpoint&, const Endpoint&) = default;
};

struct Link {
  Endpoint a;
  Endpoint b;

  friend bool operator==(const Link&, const Link&) = default;
  friend auto operator<=>(const Link&, const Link&) = default;
};

enum class ActionType {
  kForward,     // one output port
  kGroup,       // exactly one of several ports, chosen per packet
  kFlood,       // every port except the ingress port
  kDrop,
  kController,  // punt to the controller
};

absl::string_view ActionTypeName(ActionType type);

struct Action {
  ActionType type = ActionType::kDrop;
  std::vector<PortId> ports;

  static Action Forward(PortId port) { return {ActionType::kForward, {port}}; }
  static Action Group(std::vector<PortId> ports) {
    return {ActionType::kGroup, std::move(ports)};
  }
  static Action Flood() { return {ActionType::kFlood, {}}; }
  static Action Drop() { return {ActionType::kDrop, {}}; }
  static Action ToController() { return {ActionType::kController, {}}; }

  friend bool operator==(const Action&, const Action&) = default;
};

struct FlowRule {
  int priority = 0;
  HeaderPattern match = HeaderPattern::FromMasks(32, 0, 0);
  std::optional<PortId> in_port;  // nullopt matches any ingress port
  Action action;
  std::optional<HeaderPattern> rewrite;

  bool Matches(uint64_t header, PortId ingress) const {
    return (!in_port || *in_port == ingress) && match.Matches(header);
  }

  friend bool operator==(const FlowRule&, const FlowRule&) = default;
};

struct ForwardingDevice {
  DeviceId id;
  std::vector<PortId> ports;
  // Sorted by descending priority; equal priorities keep insertion order.
  std::vector<FlowRule> flow_table;

  bool HasPort(PortId port) const;
  // First matching rule, or nullptr for a table miss.
  const FlowRule* Lookup(uint64_t header, PortId ingress) const;

  friend bool operator==(const ForwardingDevice&,
                         const ForwardingDevice&) = default;
};

// Where a device sent a packet.
struct OutPort {
  enum class Kind { kPort, kDrop, kController, kAbsorbed };
  Kind kind = Kind::kDrop;
  PortId port = 0;

  static OutPort Port(PortId p) { return {Kind::kPort, p}; }
  static OutPort Drop() { return {Kind::kDrop, 0}; }
  static OutPort Controller() { return {Kind::kController, 0}; }
  // The controller consumed the packet.
  static OutPort Absorbed() { return {Kind::kAbsorbed, 0}; }

  std::string ToString() const;
  static absl::StatusOr<OutPort> Parse(absl::string_view text);

  friend bool operator==(const OutPort&, const OutPort&) = default;
  friend auto operator<=>(const OutPort&, const OutPort&) = default;
};

struct ControllerState {
  // Devices whose controller-bound messages are discarded.
  std::set<DeviceId> blocked_devices;
};

class NetworkState {
 public:
  explicit NetworkState(int header_bits = 32) : header_bits_(header_bits) {}

  int header_bits() const { return header_bits_; }
  const std::map<DeviceId, ForwardingDevice>& devices() const {
    return devices_;
  }
  const std::vector<Link>& links() const { return links_; }
  const std::map<HostId, Endpoint>& hosts() const { return hosts_; }
  const ControllerState& controller() const { return controller_; }
  ControllerState& mutable_controller() { return controller_; }

  absl::Status AddDevice(const DeviceId& id, int port_count);
  absl::Status AddLink(const Endpoint& a, const Endpoint& b);
  absl::Status AttachHost(const HostId& host, const Endpoint& at);
  // Inserts in priority order, after existing rules of equal priority.
  absl::Status InstallRule(const DeviceId& device, FlowRule rule);
  absl::Status ReplaceFlowTable(const DeviceId& device,
                                std::vector<FlowRule> rules);
  absl::Status RemoveLinksOf(const DeviceId& device);
  absl::Status RemoveLink(const Endpoint& end);

  const ForwardingDevice* FindDevice(const DeviceId& id) const;
  std::optional<Endpoint> Peer(const Endpoint& end) const;
  std::optional<HostId> HostAt(const Endpoint& end) const;
  // Link-attached neighbors of a device, in port order.
  std::vector<std::pair<PortId, DeviceId>> Neighbors(const DeviceId& id) const;

  // Flow tables and links are equal. Hosts and controller state are ignored.
  bool SameForwardingState(const NetworkState& other) const;

 private:
  absl::Status CheckRule(const ForwardingDevice& device,
                         const FlowRule& rule) const;

  int header_bits_;
  std::map<DeviceId, ForwardingDevice> devices_;
  std::vector<Link> links_;
  std::map<Endpoint, Endpoint> peers_;
  std::map<HostId, Endpoint> hosts_;
  ControllerState controller_;
};

class NetworkSnapshot {
 public:
  // Copies `state`. Each capture gets the next epoch of a process-wide
  // counter.
  static NetworkSnapshot Capture(const NetworkState& state);

  uint64_t epoch() const { return epoch_; }
  const NetworkState& state() const { return *state_; }
  int header_bits() const { return state_->header_bits(); }
  const std::map<DeviceId, ForwardingDevice>& devices() const {
    return state_->devices();
  }
  const ForwardingDevice* FindDevice(const DeviceId& id) const {
    return state_->FindDevice(id);
  }
  std::optional<Endpoint> Peer(const Endpoint& end) const {
    return state_->Peer(end);
  }
  std::vector<DeviceId> DeviceIds() const;

 private:
  NetworkSnapshot(std::shared_ptr<const NetworkState> state, uint64_t epoch)
      : state_(std::move(state)), epoch_(epoch) {}

  std::shared_ptr<const NetworkState> state_;
  uint64_t epoch_;
};

// Parses the topology and rules documents (JSON, see README) into a live
// network state. Unknown devices or ports are reported as NotFound.
absl::StatusOr<NetworkState> ParseNetwork(absl::string_view topology_json,
                                          absl::string_view rules_json);
absl::StatusOr<NetworkSnapshot> BuildSnapshot(absl::string_view topology_json,
                                              absl::string_view rules_json);
absl::StatusOr<NetworkSnapshot> BuildSnapshotFromFiles(
    const std::string& topology_path, const std::string& rules_path);

std::string TopologyToJson(const NetworkState& state,
                           absl::string_view name = "");
std::string RulesToJson(const NetworkState& state);

// True iff any flow table or link of `live` differs from the snapshot.
bool StateChanged(const NetworkSnapshot& snapshot, const NetworkState& live);

absl::StatusOr<std::string> ReadFile(const std::string& path);
absl::Status WriteFile(const std::string& path, absl::string_view contents);

}  // namespace wedgetail

template <>
struct std::hash<wedgetail::DeviceId> {
  size_t operator()(const wedgetail::DeviceId& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};

#endif  // WEDGETAIL_NET_MODEL_H_
