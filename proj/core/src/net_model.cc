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

#include "wedgetail/net_model.h"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "json.hpp"

namespace wedgetail {
namespace {

using nlohmann::json;

std::atomic<uint64_t> g_snapshot_epoch{0};

std::string EndpointString(const Endpoint& e) {
  return absl::StrCat(e.device.str(), ":", e.port);
}

absl::StatusOr<Endpoint> ParseEndpoint(const json& j,
                                       absl::string_view where) {
  if (!j.is_object() || !j.contains("device") || !j.contains("port")) {
    return absl::InvalidArgumentError(
        absl::StrCat(where, ": endpoint needs \"device\" and \"port\""));
  }
  return Endpoint{DeviceId(j.at("device").get<std::string>()),
                  j.at("port").get<PortId>()};
}

absl::StatusOr<Action> ParseAction(const json& j, absl::string_view where) {
  const std::string name = j.value("action", "");
  if (name == "forward") {
    if (!j.contains("out_port")) {
      return absl::InvalidArgumentError(
          absl::StrCat(where, ": forward needs \"out_port\""));
    }
    return Action::Forward(j.at("out_port").get<PortId>());
  }
  if (name == "group") {
    auto ports = j.value("out_ports", std::vector<PortId>{});
    if (ports.empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat(where, ": group needs non-empty \"out_ports\""));
    }
    return Action::Group(std::move(ports));
  }
  if (name == "flood") return Action::Flood();
  if (name == "drop") return Action::Drop();
  if (name == "controller") return Action::ToController();
  return absl::InvalidArgumentError(
      absl::StrCat(where, ": unknown action \"", name, "\""));
}

json ActionToJson(const Action& a) {
  json j;
  j["action"] = std::string(ActionTypeName(a.type));
  if (a.type == ActionType::kForward) j["out_port"] = a.ports.front();
  if (a.type == ActionType::kGroup) j["out_ports"] = a.ports;
  return j;
}

}  // namespace

const DeviceId& ControllerId() {
  static const DeviceId* const kController = new DeviceId("controller");
  return *kController;
}

absl::string_view ActionTypeName(ActionType type) {
  switch (type) {
    case ActionType::kForward:
      return "forward";
    case ActionType::kGroup:
      return "group";
    case ActionType::kFlood:
      return "flood";
    case ActionType::kDrop:
      return "drop";
    case ActionType::kController:
      return "controller";
  }
  return "?";
}

bool ForwardingDevice::HasPort(PortId port) const {
  return std::find(ports.begin(), ports.end(), port) != ports.end();
}

const FlowRule* ForwardingDevice::Lookup(uint64_t header,
                                         PortId ingress) const {
  for (const FlowRule& rule : flow_table) {
    if (rule.Matches(header, ingress)) return &rule;
  }
  return nullptr;
}

std::string OutPort::ToString() const {
  switch (kind) {
    case Kind::kPort:
      return absl::StrCat(port);
    case Kind::kDrop:
      return "drop";
    case Kind::kController:
      return "controller";
    case Kind::kAbsorbed:
      return "absorbed";
  }
  return "?";
}

absl::StatusOr<OutPort> OutPort::Parse(absl::string_view text) {
  if (text == "drop") return Drop();
  if (text == "controller") return Controller();
  if (text == "absorbed") return Absorbed();
  uint32_t port = 0;
  if (!absl::SimpleAtoi(text, &port)) {
    return absl::InvalidArgumentError(
        absl::StrCat("bad output port \"", text, "\""));
  }
  return Port(port);
}

absl::Status NetworkState::AddDevice(const DeviceId& id, int port_count) {
  if (id.empty() || id == ControllerId()) {
    return absl::InvalidArgumentError(
        absl::StrCat("invalid device id \"", id.str(), "\""));
  }
  if (port_count <= 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("device ", id.str(), " needs at least one port"));
  }
  if (devices_.contains(id)) {
    return absl::AlreadyExistsError(
        absl::StrCat("duplicate device ", id.str()));
  }
  ForwardingDevice device{id, {}, {}};
  for (int p = 0; p < port_count; ++p) device.ports.push_back(p);
  devices_.emplace(id, std::move(device));
  return absl::OkStatus();
}

absl::Status NetworkState::AddLink(const Endpoint& a, const Endpoint& b) {
  for (const Endpoint& e : {a, b}) {
    const ForwardingDevice* d = FindDevice(e.device);
    if (d == nullptr) {
      return absl::NotFoundError(
          absl::StrCat("link references unknown device ", e.device.str()));
    }
    if (!d->HasPort(e.port)) {
      return absl::NotFoundError(
          absl::StrCat("link references unknown port ", EndpointString(e)));
    }
    if (peers_.contains(e) || HostAt(e).has_value()) {
      return absl::AlreadyExistsError(
          absl::StrCat("port ", EndpointString(e), " already in use"));
    }
  }
  if (a == b) {
    return absl::InvalidArgumentError(
        absl::StrCat("self link on ", EndpointString(a)));
  }
  links_.push_back({a, b});
  peers_[a] = b;
  peers_[b] = a;
  return absl::OkStatus();
}

absl::Status NetworkState::AttachHost(const HostId& host, const Endpoint& at) {
  const ForwardingDevice* d = FindDevice(at.device);
  if (d == nullptr) {
    return absl::NotFoundError(absl::StrCat(
        "host ", host, " references unknown device ", at.device.str()));
  }
  if (!d->HasPort(at.port)) {
    return absl::NotFoundError(absl::StrCat(
        "host ", host, " references unknown port ", EndpointString(at)));
  }
  if (peers_.contains(at)) {
    return absl::AlreadyExistsError(absl::StrCat(
        "host ", host, " attached to linked port ", EndpointString(at)));
  }
  if (hosts_.contains(host)) {
    return absl::AlreadyExistsError(absl::StrCat("duplicate host ", host));
  }
  hosts_[host] = at;
  return absl::OkStatus();
}

absl::Status NetworkState::CheckRule(const ForwardingDevice& device,
                                     const FlowRule& rule) const {
  if (rule.priority < 0) {
    return absl::InvalidArgumentError(absl::StrCat(
        "negative priority on device ", device.id.str()));
  }
  if (rule.match.width() != header_bits_ ||
      (rule.rewrite && rule.rewrite->width() != header_bits_)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "rule on device ", device.id.str(), " has width ", rule.match.width(),
        ", network uses ", header_bits_, " header bits"));
  }
  if (rule.in_port && !device.HasPort(*rule.in_port)) {
    return absl::NotFoundError(absl::StrCat(
        "rule on device ", device.id.str(), " matches unknown in_port ",
        *rule.in_port));
  }
  for (PortId p : rule.action.ports) {
    if (!device.HasPort(p)) {
      return absl::NotFoundError(absl::StrCat(
          "rule on device ", device.id.str(), " outputs to unknown port ", p));
    }
  }
  if ((rule.action.type == ActionType::kForward &&
       rule.action.ports.size() != 1) ||
      (rule.action.type == ActionType::kGroup && rule.action.ports.empty())) {
    return absl::InvalidArgumentError(absl::StrCat(
        "rule on device ", device.id.str(), " has malformed port list"));
  }
  return absl::OkStatus();
}

absl::Status NetworkState::InstallRule(const DeviceId& device, FlowRule rule) {
  auto it = devices_.find(device);
  if (it == devices_.end()) {
    return absl::NotFoundError(
        absl::StrCat("rule references unknown device ", device.str()));
  }
  if (absl::Status s = CheckRule(it->second, rule); !s.ok()) return s;
  auto& table = it->second.flow_table;
  auto pos = std::find_if(table.begin(), table.end(), [&](const FlowRule& r) {
    return r.priority < rule.priority;
  });
  table.insert(pos, std::move(rule));
  return absl::OkStatus();
}

absl::Status NetworkState::ReplaceFlowTable(const DeviceId& device,
                                            std::vector<FlowRule> rules) {
  auto it = devices_.find(device);
  if (it == devices_.end()) {
    return absl::NotFoundError(
        absl::StrCat("unknown device ", device.str()));
  }
  for (const FlowRule& r : rules) {
    if (absl::Status s = CheckRule(it->second, r); !s.ok()) return s;
  }
  std::stable_sort(rules.begin(), rules.end(),
                   [](const FlowRule& a, const FlowRule& b) {
                     return a.priority > b.priority;
                   });
  it->second.flow_table = std::move(rules);
  return absl::OkStatus();
}

absl::Status NetworkState::RemoveLinksOf(const DeviceId& device) {
  if (!devices_.contains(device)) {
    return absl::NotFoundError(absl::StrCat("unknown device ", device.str()));
  }
  std::erase_if(links_, [&](const Link& l) {
    if (l.a.device != device && l.b.device != device) return false;
    peers_.erase(l.a);
    peers_.erase(l.b);
    return true;
  });
  return absl::OkStatus();
}

absl::Status NetworkState::RemoveLink(const Endpoint& end) {
  auto peer = Peer(end);
  if (!peer) {
    return absl::NotFoundError(
        absl::StrCat("no link at ", EndpointString(end)));
  }
  std::erase_if(links_, [&](const Link& l) {
    return l.a == end || l.b == end;
  });
  peers_.erase(end);
  peers_.erase(*peer);
  return absl::OkStatus();
}

const ForwardingDevice* NetworkState::FindDevice(const DeviceId& id) const {
  auto it = devices_.find(id);
  return it == devices_.end() ? nullptr : &it->second;
}

std::optional<Endpoint> NetworkState::Peer(const Endpoint& end) const {
  auto it = peers_.find(end);
  if (it == peers_.end()) return std::nullopt;
  return it->second;
}

std::optional<HostId> NetworkState::HostAt(const Endpoint& end) const {
  for (const auto& [host, at] : hosts_) {
    if (at == end) return host;
  }
  return std::nullopt;
}

std::vector<std::pair<PortId, DeviceId>> NetworkState::Neighbors(
    const DeviceId& id) const {
  std::vector<std::pair<PortId, DeviceId>> out;
  const ForwardingDevice* d = FindDevice(id);
  if (d == nullptr) return out;
  for (PortId p : d->ports) {
    if (auto peer = Peer({id, p})) out.emplace_back(p, peer->device);
  }
  return out;
}

bool NetworkState::SameForwardingState(const NetworkState& other) const {
  if (header_bits_ != other.header_bits_) return false;
  if (devices_ != other.devices_) return false;
  std::vector<Link> mine = links_;
  std::vector<Link> theirs = other.links_;
  auto normalize = [](std::vector<Link>& links) {
    for (Link& l : links) {
      if (l.b < l.a) std::swap(l.a, l.b);
    }
    std::sort(links.begin(), links.end());
  };
  normalize(mine);
  normalize(theirs);
  return mine == theirs;
}

NetworkSnapshot NetworkSnapshot::Capture(const NetworkState& state) {
  return NetworkSnapshot(std::make_shared<const NetworkState>(state),
                         ++g_snapshot_epoch);
}

std::vector<DeviceId> NetworkSnapshot::DeviceIds() const {
  std::vector<DeviceId> ids;
  ids.reserve(devices().size());
  for (const auto& [id, _] : devices()) ids.push_back(id);
  return ids;
}

absl::StatusOr<NetworkState> ParseNetwork(absl::string_view topology_json,
                                          absl::string_view rules_json) {
  json topo;
  json rules;
  try {
    topo = json::parse(topology_json.begin(), topology_json.end());
    rules = rules_json.empty()
                ? json::object()
                : json::parse(rules_json.begin(), rules_json.end());
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed network file: ", e.what()));
  }
  try {
    const int bits = rules.value("header_bits", topo.value("header_bits", 32));
    if (bits < 1 || bits > kMaxHeaderBits) {
      return absl::InvalidArgumentError(
          absl::StrCat("header_bits ", bits, " out of range"));
    }
    NetworkState state(bits);
    for (const json& d : topo.value("devices", json::array())) {
      absl::Status s =
          state.AddDevice(DeviceId(d.at("id").get<std::string>()),
                          d.at("ports").get<int>());
      if (!s.ok()) return s;
    }
    for (const json& l : topo.value("links", json::array())) {
      auto a = ParseEndpoint(l.at("a"), "link");
      if (!a.ok()) return a.status();
      auto b = ParseEndpoint(l.at("b"), "link");
      if (!b.ok()) return b.status();
      if (absl::Status s = state.AddLink(*a, *b); !s.ok()) return s;
    }
    for (const json& h : topo.value("hosts", json::array())) {
      auto at = ParseEndpoint(h, "host");
      if (!at.ok()) return at.status();
      absl::Status s = state.AttachHost(h.at("id").get<std::string>(), *at);
      if (!s.ok()) return s;
    }
    const json tables = rules.value("devices", json::object());
    for (const auto& [device, table] : tables.items()) {
      for (size_t i = 0; i < table.size(); ++i) {
        const json& r = table[i];
        const std::string where =
            absl::StrCat("rule ", i, " of device ", device);
        FlowRule rule;
        rule.priority = r.value("priority", 0);
        auto match = HeaderPattern::Parse(r.at("match").get<std::string>());
        if (!match.ok()) {
          return absl::InvalidArgumentError(
              absl::StrCat(where, ": ", match.status().message()));
        }
        rule.match = *match;
        if (r.contains("in_port") && !r.at("in_port").is_string()) {
          rule.in_port = r.at("in_port").get<PortId>();
        }
        auto action = ParseAction(r, where);
        if (!action.ok()) return action.status();
        rule.action = *std::move(action);
        if (r.contains("rewrite")) {
          auto rw = HeaderPattern::Parse(r.at("rewrite").get<std::string>());
          if (!rw.ok()) {
            return absl::InvalidArgumentError(
                absl::StrCat(where, ": ", rw.status().message()));
          }
          rule.rewrite = *rw;
        }
        absl::Status s = state.InstallRule(DeviceId(device), std::move(rule));
        if (!s.ok()) return s;
      }
    }
    return state;
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed network file: ", e.what()));
  }
}

absl::StatusOr<NetworkSnapshot> BuildSnapshot(absl::string_view topology_json,
                                              absl::string_view rules_json) {
  auto state = ParseNetwork(topology_json, rules_json);
  if (!state.ok()) return state.status();
  return NetworkSnapshot::Capture(*state);
}

absl::StatusOr<NetworkSnapshot> BuildSnapshotFromFiles(
    const std::string& topology_path, const std::string& rules_path) {
  auto topo = ReadFile(topology_path);
  if (!topo.ok()) return topo.status();
  auto rules = ReadFile(rules_path);
  if (!rules.ok()) return rules.status();
  return BuildSnapshot(*topo, *rules);
}

std::string TopologyToJson(const NetworkState& state, absl::string_view name) {
  json j;
  if (!name.empty()) j["name"] = std::string(name);
  j["devices"] = json::array();
  for (const auto& [id, d] : state.devices()) {
    j["devices"].push_back({{"id", id.str()}, {"ports", d.ports.size()}});
  }
  j["links"] = json::array();
  for (const Link& l : state.links()) {
    j["links"].push_back(
        {{"a", {{"device", l.a.device.str()}, {"port", l.a.port}}},
         {"b", {{"device", l.b.device.str()}, {"port", l.b.port}}}});
  }
  j["hosts"] = json::array();
  for (const auto& [host, at] : state.hosts()) {
    j["hosts"].push_back(
        {{"id", host}, {"device", at.device.str()}, {"port", at.port}});
  }
  return j.dump(2);
}

std::string RulesToJson(const NetworkState& state) {
  json j;
  j["header_bits"] = state.header_bits();
  j["devices"] = json::object();
  for (const auto& [id, d] : state.devices()) {
    json table = json::array();
    for (const FlowRule& r : d.flow_table) {
      json rule = ActionToJson(r.action);
      rule["priority"] = r.priority;
      rule["match"] = r.match.ToString();
      if (r.in_port) {
        rule["in_port"] = *r.in_port;
      } else {
        rule["in_port"] = "*";
      }
      if (r.rewrite) rule["rewrite"] = r.rewrite->ToString();
      table.push_back(std::move(rule));
    }
    j["devices"][id.str()] = std::move(table);
  }
  return j.dump(2);
}

bool StateChanged(const NetworkSnapshot& snapshot, const NetworkState& live) {
  return !snapshot.state().SameForwardingState(live);
}

absl::StatusOr<std::string> ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

absl::Status WriteFile(const std::string& path, absl::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    return absl::PermissionDeniedError(absl::StrCat("cannot write ", path));
  }
  out << contents;
  return out ? absl::OkStatus()
             : absl::DataLossError(absl::StrCat("short write to ", path));
}

}  // namespace wedgetail
