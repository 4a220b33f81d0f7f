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

#include "wedgetail/sim/rules_gen.h"

#include <algorithm>
#include <deque>
#include <random>
#include <set>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"

namespace wedgetail::sim {
namespace {

constexpr int kControlPriority = 100;

HeaderPattern Prefix(int width, int length, uint64_t value) {
  const uint64_t care =
      (length >= 64 ? ~uint64_t{0} : ((uint64_t{1} << length) - 1))
      << (width - length);
  return HeaderPattern::FromMasks(width, value << (width - length), care);
}

// Hop distance from `root` to every device, not passing through `avoid`.
std::map<DeviceId, int> Distances(const NetworkState& state,
                                  const DeviceId& root,
                                  const std::optional<DeviceId>& avoid) {
  std::map<DeviceId, int> dist;
  if (avoid && *avoid == root) return dist;
  dist[root] = 0;
  std::deque<DeviceId> queue = {root};
  while (!queue.empty()) {
    const DeviceId d = queue.front();
    queue.pop_front();
    for (const auto& [port, n] : state.Neighbors(d)) {
      if ((avoid && n == *avoid) || dist.contains(n)) continue;
      dist[n] = dist[d] + 1;
      queue.push_back(n);
    }
  }
  return dist;
}

absl::Status CheckConnected(const NetworkState& state) {
  std::set<DeviceId> left;
  for (const auto& [id, _] : state.devices()) left.insert(id);
  std::vector<std::string> components;
  while (!left.empty()) {
    const auto reach = Distances(state, *left.begin(), std::nullopt);
    std::vector<std::string> names;
    for (const auto& [d, _] : reach) {
      names.push_back(d.str());
      left.erase(d);
    }
    components.push_back(absl::StrCat("{", absl::StrJoin(names, ","), "}"));
  }
  if (components.size() > 1) {
    return absl::FailedPreconditionError(absl::StrCat(
        "topology is disconnected: ", absl::StrJoin(components, " ")));
  }
  return absl::OkStatus();
}

std::vector<FlowRule> TableFor(const DeviceId& device, int width,
                               const std::vector<PrefixOwner>& prefixes,
                               const std::map<DeviceId, std::map<DeviceId, PortId>>& hops,
                               bool controller_prefix) {
  std::vector<FlowRule> table;
  if (controller_prefix) {
    FlowRule punt;
    punt.priority = kControlPriority;
    punt.match = ControlPrefix(width);
    punt.action = Action::ToController();
    table.push_back(punt);
  }
  for (const PrefixOwner& p : prefixes) {
    auto owner = hops.find(p.owner);
    if (owner == hops.end()) continue;
    auto port = owner->second.find(device);
    if (port == owner->second.end()) continue;
    FlowRule r;
    r.priority = width - p.prefix.wildcard_count();
    r.match = p.prefix;
    r.action = Action::Forward(port->second);
    table.push_back(r);
  }
  std::stable_sort(table.begin(), table.end(),
                   [](const FlowRule& a, const FlowRule& b) {
                     return a.priority > b.priority;
                   });
  return table;
}

}  // namespace

HeaderPattern ControlPrefix(int header_bits) {
  return Prefix(header_bits, std::min(8, header_bits), 0xff >>
                                                           (8 - std::min(8, header_bits)));
}

absl::StatusOr<std::map<DeviceId, std::map<DeviceId, PortId>>> NextHops(
    const NetworkState& state, const std::optional<DeviceId>& avoid) {
  std::map<DeviceId, std::map<DeviceId, PortId>> out;
  for (const auto& [owner, _] : state.devices()) {
    const auto dist = Distances(state, owner, avoid);
    auto& hops = out[owner];
    for (const auto& [d, k] : dist) {
      if (k == 0) {
        hops[d] = 0;
        continue;
      }
      std::optional<std::pair<DeviceId, PortId>> best;
      for (const auto& [port, n] : state.Neighbors(d)) {
        auto it = dist.find(n);
        if (it == dist.end() || it->second != k - 1) continue;
        if (!best || n < best->first) best = {n, port};
      }
      hops[d] = best->second;
    }
  }
  return out;
}

absl::StatusOr<GeneratedRules> GenerateRules(NetworkState& state,
                                             const RuleGenOptions& options) {
  const int width = state.header_bits();
  if (state.devices().empty()) {
    return absl::InvalidArgumentError("no devices to generate rules for");
  }
  if (options.min_length < 1 || options.min_length > options.max_length) {
    return absl::InvalidArgumentError(absl::StrCat(
        "bad prefix lengths ", options.min_length, "..", options.max_length));
  }
  if (absl::Status s = CheckConnected(state); !s.ok()) return s;

  std::mt19937_64 rng(options.seed);
  const int lo = std::min(options.min_length, width);
  const int hi = std::min(options.max_length, width);
  const HeaderPattern control = ControlPrefix(width);
  std::vector<HeaderPattern> chosen;
  int attempts = 0;
  while (static_cast<int>(chosen.size()) < options.prefixes) {
    if (++attempts > 1000 * std::max(options.prefixes, 1)) {
      return absl::ResourceExhaustedError(absl::StrCat(
          "could not place ", options.prefixes,
          " disjoint prefixes in a ", width, "-bit header"));
    }
    const int len = lo + static_cast<int>(rng() % (hi - lo + 1));
    const uint64_t value =
        len >= 64 ? rng() : rng() & ((uint64_t{1} << len) - 1);
    const HeaderPattern p = Prefix(width, len, value);
    if (options.controller_prefix && p.Overlaps(control)) continue;
    if (std::any_of(chosen.begin(), chosen.end(),
                    [&](const HeaderPattern& q) { return q.Overlaps(p); })) {
      continue;
    }
    chosen.push_back(p);
  }

  std::vector<DeviceId> owners;
  for (const auto& [id, _] : state.devices()) owners.push_back(id);
  std::shuffle(owners.begin(), owners.end(), rng);
  GeneratedRules out;
  for (size_t i = 0; i < chosen.size(); ++i) {
    out.prefixes.push_back({chosen[i], owners[i % owners.size()]});
  }

  auto hops = NextHops(state);
  if (!hops.ok()) return hops.status();
  std::vector<DeviceId> ids = owners;
  std::sort(ids.begin(), ids.end());
  for (const DeviceId& d : ids) {
    std::vector<FlowRule> table =
        TableFor(d, width, out.prefixes, *hops, options.controller_prefix);
    out.rule_count += table.size();
    if (absl::Status s = state.ReplaceFlowTable(d, std::move(table)); !s.ok()) {
      return s;
    }
  }
  return out;
}

absl::StatusOr<std::vector<FlowRule>> RoutesAvoiding(
    const NetworkState& state, const GeneratedRules& rules,
    const DeviceId& device, const DeviceId& avoid) {
  if (state.FindDevice(device) == nullptr) {
    return absl::NotFoundError(absl::StrCat("unknown device ", device.str()));
  }
  if (device == avoid) {
    return absl::InvalidArgumentError(
        absl::StrCat(device.str(), " cannot route around itself"));
  }
  auto hops = NextHops(state, avoid);
  if (!hops.ok()) return hops.status();
  const bool punts =
      !state.FindDevice(device)->flow_table.empty() &&
      state.FindDevice(device)->flow_table.front().action.type ==
          ActionType::kController;
  return TableFor(device, state.header_bits(), rules.prefixes, *hops, punts);
}

absl::Status GroupRoutesAt(NetworkState& state, const GeneratedRules& rules,
                           const DeviceId& device,
                           const std::vector<PortId>& ports) {
  const ForwardingDevice* d = state.FindDevice(device);
  if (d == nullptr) {
    return absl::NotFoundError(absl::StrCat("unknown device ", device.str()));
  }
  std::set<DeviceId> behind;
  for (PortId p : ports) {
    auto peer = state.Peer({device, p});
    if (!peer) {
      return absl::InvalidArgumentError(
          absl::StrCat(device.str(), " port ", p, " has no link"));
    }
    behind.insert(peer->device);
  }
  std::set<HeaderPattern> keep;
  for (const PrefixOwner& p : rules.prefixes) {
    if (behind.contains(p.owner)) keep.insert(p.prefix);
  }
  std::vector<FlowRule> table = d->flow_table;
  for (FlowRule& r : table) {
    if (r.action.type != ActionType::kForward || keep.contains(r.match)) {
      continue;
    }
    if (std::find(ports.begin(), ports.end(), r.action.ports.front()) !=
        ports.end()) {
      r.action = Action::Group(ports);
    }
  }
  return state.ReplaceFlowTable(device, std::move(table));
}

}  // namespace wedgetail::sim
