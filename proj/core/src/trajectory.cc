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

#include "wedgetail/trajectory.h"

#include <algorithm>
#include <array>
#include <mutex>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"

namespace wedgetail {
namespace {

constexpr uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr uint64_t kFnvPrime = 0x100000001b3ULL;

uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t Combined(const PacketHeaderFields& f) {
  return (uint64_t{f.dst_ip} << 32) | f.src_ip;
}

}  // namespace

PacketLabel LabelPacket(const PacketHeaderFields& f, int label_bits) {
  const bool has_ports = f.protocol == 6 || f.protocol == 17;
  const uint16_t sport = has_ports ? f.src_port : 0;
  const uint16_t dport = has_ports ? f.dst_port : 0;
  const std::array<uint8_t, 15> bytes = {
      static_cast<uint8_t>(f.src_ip >> 24), static_cast<uint8_t>(f.src_ip >> 16),
      static_cast<uint8_t>(f.src_ip >> 8),  static_cast<uint8_t>(f.src_ip),
      static_cast<uint8_t>(f.dst_ip >> 24), static_cast<uint8_t>(f.dst_ip >> 16),
      static_cast<uint8_t>(f.dst_ip >> 8),  static_cast<uint8_t>(f.dst_ip),
      f.protocol,
      static_cast<uint8_t>(f.ip_id >> 8),   static_cast<uint8_t>(f.ip_id),
      static_cast<uint8_t>(sport >> 8),     static_cast<uint8_t>(sport),
      static_cast<uint8_t>(dport >> 8),     static_cast<uint8_t>(dport)};
  uint64_t h = kFnvOffset;
  for (uint8_t b : bytes) {
    h ^= b;
    h *= kFnvPrime;
  }
  const int bits = std::clamp(label_bits, 1, 32);
  return static_cast<PacketLabel>(SplitMix64(h) >> (64 - bits));
}

uint64_t ModelHeader(const PacketHeaderFields& fields, int header_bits) {
  return Combined(fields) >> (64 - header_bits);
}

PacketHeaderFields WithModelHeader(PacketHeaderFields fields, uint64_t header,
                                   int header_bits) {
  const int shift = 64 - header_bits;
  const uint64_t low_mask =
      shift >= 64 ? ~uint64_t{0} : (uint64_t{1} << shift) - 1;
  const uint64_t high = shift >= 64 ? 0 : header << shift;
  const uint64_t combined = (Combined(fields) & low_mask) | high;
  fields.dst_ip = static_cast<uint32_t>(combined >> 32);
  fields.src_ip = static_cast<uint32_t>(combined);
  return fields;
}

std::string FormatObservation(const Observation& obs) {
  return absl::StrCat(obs.label, "\t", obs.device.str(), "\t", obs.in_port,
                      "\t", obs.out.ToString(), "\t", obs.timestamp);
}

absl::StatusOr<Observation> ParseObservation(absl::string_view line) {
  std::vector<absl::string_view> f = absl::StrSplit(line, '\t');
  if (f.size() != 5) {
    return absl::InvalidArgumentError(
        absl::StrCat("observation needs 5 fields, got ", f.size(), ": ", line));
  }
  Observation obs;
  obs.device = DeviceId(std::string(f[1]));
  auto out = OutPort::Parse(f[3]);
  if (!absl::SimpleAtoi(f[0], &obs.label) ||
      !absl::SimpleAtoi(f[2], &obs.in_port) || !out.ok() ||
      !absl::SimpleAtoi(f[4], &obs.timestamp) || obs.device.empty()) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed observation: ", line));
  }
  obs.out = *out;
  return obs;
}

std::string FormatObservationLog(const std::vector<Observation>& log) {
  std::string out;
  for (const Observation& o : log) absl::StrAppend(&out, FormatObservation(o), "\n");
  return out;
}

absl::StatusOr<std::vector<Observation>> ParseObservationLog(
    absl::string_view text) {
  std::vector<Observation> log;
  for (absl::string_view line : absl::StrSplit(text, '\n', absl::SkipEmpty())) {
    if (line.front() == '#') continue;
    auto obs = ParseObservation(line);
    if (!obs.ok()) return obs.status();
    log.push_back(*std::move(obs));
  }
  return log;
}

std::map<PacketLabel, std::vector<Observation>> GroupByLabel(
    const std::vector<Observation>& log) {
  std::map<PacketLabel, std::vector<Observation>> out;
  for (const Observation& o : log) out[o.label].push_back(o);
  return out;
}

absl::string_view WalkOutcomeName(WalkOutcome outcome) {
  switch (outcome) {
    case WalkOutcome::kDelivered:
      return "delivered";
    case WalkOutcome::kController:
      return "controller";
    case WalkOutcome::kDropped:
      return "dropped";
    case WalkOutcome::kVanished:
      return "vanished";
  }
  return "?";
}

Reconstruction ReconstructActual(const std::vector<Observation>& observations,
                                 PacketLabel label, const NetworkState& net) {
  Reconstruction r;
  ActualTrajectory& t = r.trajectory;
  t.label = label;
  for (const Observation& o : observations) {
    if (o.label == label) t.nodes.push_back(o);
  }
  if (t.nodes.empty()) {
    r.status = Reconstruction::Status::kNoTrajectory;
    r.reason = "no observations";
    return r;
  }
  std::stable_sort(t.nodes.begin(), t.nodes.end(),
                   [](const Observation& a, const Observation& b) {
                     return a.timestamp < b.timestamp;
                   });
  const size_t n = t.nodes.size();
  t.parent.assign(n, -1);
  std::vector<bool> has_child(n, false);
  std::vector<std::vector<size_t>> children(n);
  int roots = 0;
  std::vector<size_t> root_nodes;
  for (size_t i = 0; i < n; ++i) {
    const Observation& child = t.nodes[i];
    for (size_t j = i; j-- > 0;) {
      const Observation& p = t.nodes[j];
      if (has_child[j] || p.timestamp >= child.timestamp) continue;
      bool leads_here = false;
      if (child.device == ControllerId()) {
        leads_here = p.out.kind == OutPort::Kind::kController;
      } else if (p.out.kind == OutPort::Kind::kPort) {
        auto peer = net.Peer({p.device, p.out.port});
        leads_here = peer && *peer == Endpoint{child.device, child.in_port};
      }
      if (leads_here) {
        t.parent[i] = static_cast<int>(j);
        has_child[j] = true;
        children[j].push_back(i);
        break;
      }
    }
    if (t.parent[i] < 0) {
      // Another emission of an earlier arrival at the same device and port
      // (flood, group fan-out or an injected copy) shares that parent.
      bool sibling = false;
      for (size_t k = i; k-- > 0;) {
        if (t.nodes[k].device == child.device &&
            t.nodes[k].in_port == child.in_port) {
          t.parent[i] = t.parent[k];
          if (t.parent[k] >= 0) children[t.parent[k]].push_back(i);
          sibling = true;
          break;
        }
      }
      if (!sibling) ++roots;
      if (t.parent[i] < 0) root_nodes.push_back(i);
    }
  }
  if (roots != 1) {
    r.status = Reconstruction::Status::kInvalid;
    r.reason = absl::StrCat(roots, " disjoint walks share label ", label);
    return r;
  }
  // Depth-first from the root, children in time order.
  std::vector<std::vector<size_t>> stack;
  for (auto it = root_nodes.rbegin(); it != root_nodes.rend(); ++it) {
    stack.push_back({*it});
  }
  while (!stack.empty()) {
    std::vector<size_t> path = std::move(stack.back());
    stack.pop_back();
    const size_t leaf = path.back();
    if (!children[leaf].empty()) {
      for (auto it = children[leaf].rbegin(); it != children[leaf].rend();
           ++it) {
        std::vector<size_t> next = path;
        next.push_back(*it);
        stack.push_back(std::move(next));
      }
      continue;
    }
    Walk w;
    w.nodes = path;
    for (size_t k : path) w.devices.push_back(t.nodes[k].device);
    const Observation& last = t.nodes[leaf];
    switch (last.out.kind) {
      case OutPort::Kind::kDrop:
        w.outcome = WalkOutcome::kDropped;
        break;
      case OutPort::Kind::kAbsorbed:
        w.outcome = last.device == ControllerId() ? WalkOutcome::kController
                                                  : WalkOutcome::kDelivered;
        break;
      case OutPort::Kind::kController:
        w.outcome = WalkOutcome::kVanished;
        w.next_device = ControllerId();
        break;
      case OutPort::Kind::kPort: {
        auto peer = net.Peer({last.device, last.out.port});
        if (peer) {
          w.outcome = WalkOutcome::kVanished;
          w.next_device = peer->device;
        } else {
          w.outcome = WalkOutcome::kDelivered;
        }
        break;
      }
    }
    t.walks.push_back(std::move(w));
  }
  r.status = Reconstruction::Status::kOk;
  return r;
}

std::vector<DeviceId> Trajectory::Devices() const {
  std::vector<DeviceId> out;
  out.reserve(hops.size());
  for (const TimedHop& h : hops) out.push_back(h.device);
  return out;
}

std::vector<Trajectory> TrajectoriesOf(const ActualTrajectory& actual,
                                       PortId port) {
  std::vector<Trajectory> out;
  for (const Walk& w : actual.walks) {
    Trajectory t{actual.label, port, {}};
    for (size_t k : w.nodes) {
      t.hops.push_back({actual.nodes[k].device, actual.nodes[k].timestamp});
    }
    out.push_back(std::move(t));
  }
  return out;
}

bool TrajectoryStore::Insert(const Trajectory& trajectory) {
  std::unique_lock lock(mu_);
  if (!keys_.emplace(trajectory.label, trajectory.Devices()).second) {
    return false;
  }
  trajectories_.push_back(trajectory);
  return true;
}

size_t TrajectoryStore::size() const {
  std::shared_lock lock(mu_);
  return trajectories_.size();
}

std::vector<Trajectory> TrajectoryStore::All() const {
  std::shared_lock lock(mu_);
  return trajectories_;
}

}  // namespace wedgetail
