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

#include "wedgetail/oracle/concrete_forwarding.h"

#include <algorithm>
#include <numeric>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"

namespace wedgetail::oracle {
namespace {

std::string PathString(const std::vector<DeviceId>& path) {
  return absl::StrJoin(path, "->", [](std::string* out, const DeviceId& d) {
    out->append(d.str());
  });
}

class Walker {
 public:
  Walker(const NetworkState& state, const DeviceId& source,
         ConcretePaths& out)
      : state_(state), source_(source), out_(out) {}

  void Walk(const DeviceId& device, PortId ingress, uint64_t header,
            uint64_t injected, std::vector<DeviceId>& path) {
    const ForwardingDevice* d = state_.FindDevice(device);
    path.push_back(device);
    const FlowRule* rule = d->Lookup(header, ingress);
    if (rule != nullptr) {
      const uint64_t next =
          rule->rewrite ? rule->rewrite->RewriteHeader(header) : header;
      std::vector<PortId> ports;
      switch (rule->action.type) {
        case ActionType::kForward:
        case ActionType::kGroup:
          ports = rule->action.ports;
          break;
        case ActionType::kFlood:
          for (PortId p : d->ports) {
            if (p != ingress) ports.push_back(p);
          }
          break;
        case ActionType::kDrop:
          break;
        case ActionType::kController:
          path.push_back(ControllerId());
          Record(path, injected);
          path.pop_back();
          break;
      }
      for (PortId p : ports) {
        auto peer = state_.Peer({device, p});
        if (!peer) {
          Record(path, injected);
        } else if (std::find(path.begin(), path.end(), peer->device) !=
                   path.end()) {
          ++out_.loops;
        } else {
          Walk(peer->device, peer->port, next, injected, path);
        }
      }
    }
    path.pop_back();
  }

 private:
  void Record(const std::vector<DeviceId>& path, uint64_t injected) {
    if (path.back() == source_) return;
    out_.by_destination[path.back()][path].insert(injected);
  }

  const NetworkState& state_;
  const DeviceId& source_;
  ConcretePaths& out_;
};

}  // namespace

absl::StatusOr<ConcretePaths> ForwardEveryHeader(const NetworkState& state,
                                                 const DeviceId& source,
                                                 PortId port) {
  if (state.header_bits() > 20) {
    return absl::InvalidArgumentError(absl::StrCat(
        "exhaustive forwarding needs header_bits <= 20, got ",
        state.header_bits()));
  }
  const ForwardingDevice* src = state.FindDevice(source);
  if (src == nullptr || !src->HasPort(port)) {
    return absl::NotFoundError(
        absl::StrCat("unknown injection point ", source.str(), ":", port));
  }
  ConcretePaths out;
  Walker walker(state, source, out);
  const uint64_t count = uint64_t{1} << state.header_bits();
  std::vector<DeviceId> path;
  for (uint64_t h = 0; h < count; ++h) walker.Walk(source, port, h, h, path);
  return out;
}

std::vector<std::string> Compare(const ConcretePaths& concrete,
                                 const ExpectedFromSource& symbolic) {
  std::vector<std::string> diffs;
  for (const auto& [dst, _] : symbolic.by_destination) {
    if (!concrete.by_destination.contains(dst)) {
      diffs.push_back(absl::StrCat("symbolic-only destination ", dst.str()));
    }
  }
  for (const auto& [dst, paths] : concrete.by_destination) {
    const ExpectedSet* set = symbolic.Find(dst);
    if (set == nullptr) {
      diffs.push_back(absl::StrCat("concrete-only destination ", dst.str()));
      continue;
    }
    std::set<uint64_t> reaching;
    for (const auto& [path, headers] : paths) {
      reaching.insert(headers.begin(), headers.end());
      auto it = std::find_if(
          set->trajectories.begin(), set->trajectories.end(),
          [&](const ExpectedTrajectory& t) { return t.devices == path; });
      if (it == set->trajectories.end()) {
        diffs.push_back(absl::StrCat("missing trajectory ", PathString(path)));
        continue;
      }
      const double symbolic_count = it->origin.Cardinality();
      if (symbolic_count != static_cast<double>(headers.size())) {
        diffs.push_back(absl::StrCat("trajectory ", PathString(path),
                                     " carries ", symbolic_count,
                                     " headers, expected ", headers.size()));
        continue;
      }
      for (uint64_t h : headers) {
        if (!it->origin.Contains(h)) {
          diffs.push_back(absl::StrCat("trajectory ", PathString(path),
                                       " lacks header ", h));
          break;
        }
      }
    }
    if (set->trajectories.size() != paths.size()) {
      diffs.push_back(absl::StrCat("destination ", dst.str(), " has ",
                                   set->trajectories.size(),
                                   " symbolic trajectories vs ", paths.size()));
    }
    if (set->space.Cardinality() != static_cast<double>(reaching.size())) {
      diffs.push_back(absl::StrCat("destination ", dst.str(),
                                   " header space size ",
                                   set->space.Cardinality(), " vs ",
                                   reaching.size()));
    } else {
      for (uint64_t h : reaching) {
        if (!set->space.Contains(h)) {
          diffs.push_back(absl::StrCat("destination ", dst.str(),
                                       " space lacks header ", h));
          break;
        }
      }
    }
  }
  return diffs;
}

NetworkState RandomNetwork(std::mt19937_64& rng,
                           const RandomNetworkOptions& options) {
  const int n = std::max(1, options.devices);
  const int bits = options.header_bits;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  auto pick = [&](int bound) {
    return std::uniform_int_distribution<int>(0, bound - 1)(rng);
  };

  // Random spanning tree plus a few chords.
  std::vector<std::pair<int, int>> edges;
  for (int i = 1; i < n; ++i) edges.emplace_back(pick(i), i);
  const int chords = n > 2 ? pick(n) : 0;
  for (int c = 0; c < chords; ++c) {
    int a = pick(n);
    int b = pick(n);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (std::find(edges.begin(), edges.end(), std::make_pair(a, b)) !=
        edges.end()) {
      continue;
    }
    edges.emplace_back(a, b);
  }
  std::vector<int> degree(n, 0);
  for (auto [a, b] : edges) {
    ++degree[a];
    ++degree[b];
  }

  NetworkState state(bits);
  auto id = [](int i) { return DeviceId(absl::StrCat("d", i)); };
  for (int i = 0; i < n; ++i) {
    // Port 0 is the edge port, then one port per link, then maybe a spare
    // unlinked port.
    const int spare = coin(rng) < 0.3 ? 1 : 0;
    (void)state.AddDevice(id(i), 1 + degree[i] + spare);
  }
  std::vector<PortId> next_port(n, 1);
  for (auto [a, b] : edges) {
    (void)state.AddLink({id(a), next_port[a]++}, {id(b), next_port[b]++});
  }

  auto random_pattern = [&](double wildcard) {
    uint64_t value = 0;
    uint64_t care = 0;
    for (int b = 0; b < bits; ++b) {
      if (coin(rng) < wildcard) continue;
      care |= uint64_t{1} << b;
      if (coin(rng) < 0.5) value |= uint64_t{1} << b;
    }
    return HeaderPattern::FromMasks(bits, value, care);
  };

  for (int i = 0; i < n; ++i) {
    const ForwardingDevice& d = *state.FindDevice(id(i));
    const int ports = static_cast<int>(d.ports.size());
    const int rules = 1 + pick(options.max_rules_per_device);
    for (int r = 0; r < rules; ++r) {
      FlowRule rule;
      rule.priority = pick(4);
      rule.match = random_pattern(0.7);
      if (coin(rng) < options.in_port_probability) {
        rule.in_port = static_cast<PortId>(pick(ports));
      }
      const double a = coin(rng);
      if (a < 0.5) {
        rule.action = Action::Forward(static_cast<PortId>(pick(ports)));
      } else if (a < 0.6 && ports > 1) {
        std::vector<PortId> group(ports);
        std::iota(group.begin(), group.end(), 0);
        std::shuffle(group.begin(), group.end(), rng);
        group.resize(2);
        rule.action = Action::Group(group);
      } else if (a < 0.7) {
        rule.action = Action::Flood();
      } else if (a < 0.85) {
        rule.action = Action::Drop();
      } else {
        rule.action = Action::ToController();
      }
      if (coin(rng) < options.rewrite_probability) {
        rule.rewrite = random_pattern(0.8);
      }
      (void)state.InstallRule(d.id, std::move(rule));
    }
  }
  return state;
}

EquivalenceReport RunEquivalenceSuite(uint64_t seed, int networks,
                                      int max_devices, int max_bits) {
  EquivalenceReport report;
  std::mt19937_64 rng(seed);
  for (int i = 0; i < networks; ++i) {
    RandomNetworkOptions options;
    options.devices =
        std::uniform_int_distribution<int>(1, std::max(1, max_devices))(rng);
    options.header_bits =
        std::uniform_int_distribution<int>(1, std::max(1, max_bits))(rng);
    const NetworkState state = RandomNetwork(rng, options);
    const NetworkSnapshot snapshot = NetworkSnapshot::Capture(state);
    const TransferFunctions tfs(snapshot);
    ++report.networks;
    for (const auto& [id, device] : state.devices()) {
      ++report.sources;
      auto concrete = ForwardEveryHeader(state, id, 0);
      auto symbolic = ExpectedTrajectoriesFrom(snapshot, tfs, id, 0);
      if (!concrete.ok() || !symbolic.ok()) {
        report.mismatches.push_back(absl::StrCat(
            "network ", i, " source ", id.str(), ": ",
            concrete.ok() ? symbolic.status().ToString()
                          : concrete.status().ToString()));
        continue;
      }
      for (const std::string& d : Compare(*concrete, *symbolic)) {
        report.mismatches.push_back(
            absl::StrCat("network ", i, " source ", id.str(), ": ", d));
      }
    }
  }
  return report;
}

}  // namespace wedgetail::oracle
