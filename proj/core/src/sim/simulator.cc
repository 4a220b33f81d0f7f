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

#include "wedgetail/sim/simulator.h"

#include <algorithm>
#include <set>

#include "absl/strings/str_cat.h"

namespace wedgetail::sim {
namespace {

bool Later(const auto& a, const auto& b) {
  return a.at != b.at ? a.at > b.at : a.seq > b.seq;
}

bool PortScoped(ImplantScope s) {
  return s != ImplantScope::kAll && s != ImplantScope::kControllerBound;
}

}  // namespace

absl::string_view ImplantActionName(ImplantAction a) {
  switch (a) {
    case ImplantAction::kReplay:
      return "replay";
    case ImplantAction::kDrop:
      return "drop";
    case ImplantAction::kMisroute:
      return "misroute";
    case ImplantAction::kGenerate:
      return "generate";
    case ImplantAction::kDelay:
      return "delay";
  }
  return "?";
}

absl::string_view ImplantScopeName(ImplantScope s) {
  switch (s) {
    case ImplantScope::kAll:
      return "all";
    case ImplantScope::kIngressSubset:
      return "ingress-subset";
    case ImplantScope::kIngressSampled:
      return "ingress-sampled";
    case ImplantScope::kEgress:
      return "egress";
    case ImplantScope::kEgressSubset:
      return "egress-subset";
    case ImplantScope::kControllerBound:
      return "controller-bound";
  }
  return "?";
}

VerdictKind ExpectedVerdict(ImplantAction a) {
  switch (a) {
    case ImplantAction::kReplay:
      return VerdictKind::kReplay;
    case ImplantAction::kDrop:
      return VerdictKind::kDrop;
    case ImplantAction::kMisroute:
      return VerdictKind::kMisroute;
    case ImplantAction::kGenerate:
      return VerdictKind::kGeneration;
    case ImplantAction::kDelay:
      return VerdictKind::kDelay;
  }
  return VerdictKind::kBenign;
}

std::string AttackImplant::ToString() const {
  std::string s = absl::StrCat("#", id, " ", ImplantActionName(action), "@",
                               device.str(), " scope=", ImplantScopeName(scope));
  if (PortScoped(scope)) absl::StrAppend(&s, " port=", port);
  if (subset) absl::StrAppend(&s, " subset=", subset->ToString());
  if (probability < 1) absl::StrAppend(&s, " p=", probability);
  switch (action) {
    case ImplantAction::kReplay:
      absl::StrAppend(&s, " to=", replay_to.str());
      break;
    case ImplantAction::kDrop:
      absl::StrAppend(&s, " selectivity=", selectivity);
      break;
    case ImplantAction::kMisroute:
      absl::StrAppend(&s, " out=", misroute_port);
      break;
    case ImplantAction::kGenerate:
      absl::StrAppend(&s, " rewrite=", rewrite ? rewrite->ToString() : "-",
                      fabricate ? " fabricate" : "");
      break;
    case ImplantAction::kDelay:
      absl::StrAppend(&s, " delay_ns=", delay);
      break;
  }
  return s;
}

Simulator::Simulator(NetworkState state, SimOptions options)
    : state_(std::move(state)), options_(options), rng_(options.seed) {}

absl::Status Simulator::AddImplant(AttackImplant implant) {
  const ForwardingDevice* d = state_.FindDevice(implant.device);
  if (d == nullptr) {
    return absl::InvalidArgumentError(
        absl::StrCat("implant on unknown device '", implant.device.str(), "'"));
  }
  const std::string what = implant.ToString();
  if (PortScoped(implant.scope) && !d->HasPort(implant.port)) {
    return absl::InvalidArgumentError(
        absl::StrCat(what, ": device has no port ", implant.port));
  }
  const bool subset_scope = implant.scope == ImplantScope::kIngressSubset ||
                            implant.scope == ImplantScope::kEgressSubset;
  if (subset_scope && (!implant.subset ||
                       implant.subset->width() != state_.header_bits())) {
    return absl::InvalidArgumentError(
        absl::StrCat(what, ": subset scope needs a header pattern of width ",
                     state_.header_bits()));
  }
  if (!(implant.probability > 0 && implant.probability <= 1)) {
    return absl::InvalidArgumentError(
        absl::StrCat(what, ": probability must be in (0,1]"));
  }
  switch (implant.action) {
    case ImplantAction::kReplay: {
      if (implant.replay_to == ControllerId()) break;
      bool neighbor = false;
      for (const auto& [port, n] : state_.Neighbors(implant.device)) {
        if (n == implant.replay_to) neighbor = true;
      }
      if (!neighbor) {
        return absl::InvalidArgumentError(
            absl::StrCat(what, ": replay target is not a neighbor"));
      }
      break;
    }
    case ImplantAction::kDrop:
      if (!(implant.selectivity > 0 && implant.selectivity <= 1)) {
        return absl::InvalidArgumentError(
            absl::StrCat(what, ": selectivity must be in (0,1]"));
      }
      break;
    case ImplantAction::kMisroute:
      if (!d->HasPort(implant.misroute_port)) {
        return absl::InvalidArgumentError(
            absl::StrCat(what, ": no port ", implant.misroute_port));
      }
      break;
    case ImplantAction::kGenerate:
      if (!implant.rewrite || implant.rewrite->width() != state_.header_bits()) {
        return absl::InvalidArgumentError(
            absl::StrCat(what, ": generate needs a rewrite pattern of width ",
                         state_.header_bits()));
      }
      break;
    case ImplantAction::kDelay:
      if (implant.delay <= 0) {
        return absl::InvalidArgumentError(
            absl::StrCat(what, ": delay must be positive"));
      }
      break;
  }
  for (const AttackImplant& other : implants_) {
    if (other.device == implant.device && other.scope == implant.scope &&
        (!PortScoped(implant.scope) || other.port == implant.port)) {
      return absl::InvalidArgumentError(absl::StrCat(
          what, ": conflicts with ", other.ToString(), " on the same scope"));
    }
  }
  if (implant.id == 0) implant.id = static_cast<int>(implants_.size()) + 1;
  implants_.push_back(std::move(implant));
  return absl::OkStatus();
}

absl::Status Simulator::SetImplantEnabled(int id, bool enabled) {
  for (AttackImplant& a : implants_) {
    if (a.id == id) {
      a.enabled = enabled;
      return absl::OkStatus();
    }
  }
  return absl::NotFoundError(absl::StrCat("no implant #", id));
}

void Simulator::Schedule(Event e) {
  e.seq = seq_++;
  queue_.push_back(std::move(e));
  std::push_heap(queue_.begin(), queue_.end(),
                 [](const Event& a, const Event& b) { return Later(a, b); });
}

void Simulator::Drain(std::vector<Observation>& log) {
  while (!queue_.empty()) {
    std::pop_heap(queue_.begin(), queue_.end(),
                  [](const Event& a, const Event& b) { return Later(a, b); });
    Event e = std::move(queue_.back());
    queue_.pop_back();
    now_ = std::max(now_, e.at);
    Arrive(e, log);
  }
  std::stable_sort(log.begin(), log.end(),
                   [](const Observation& a, const Observation& b) {
                     return a.timestamp < b.timestamp;
                   });
  for (const Observation& o : log) now_ = std::max(now_, o.timestamp);
}

Simulator::Packet Simulator::Relabel(PacketHeaderFields fields,
                                     const Packet& like) const {
  Packet p = like;
  p.fields = fields;
  p.label = LabelPacket(fields, options_.label_bits);
  return p;
}

std::vector<Simulator::Emission> Simulator::Forward(const ForwardingDevice& d,
                                                    PortId in_port,
                                                    const Packet& p,
                                                    uint64_t header) {
  const FlowRule* rule = d.Lookup(header, in_port);
  if (rule == nullptr) return {{OutPort::Drop(), p}};
  Packet out = p;
  if (rule->rewrite) {
    out = Relabel(WithModelHeader(p.fields, rule->rewrite->RewriteHeader(header),
                                  state_.header_bits()),
                  p);
  }
  switch (rule->action.type) {
    case ActionType::kForward:
      return {{OutPort::Port(rule->action.ports.front()), out}};
    case ActionType::kGroup: {
      const auto& ports = rule->action.ports;
      return {{OutPort::Port(ports[p.label % ports.size()]), out}};
    }
    case ActionType::kFlood: {
      std::vector<Emission> all;
      for (PortId port : d.ports) {
        if (port != in_port) all.push_back({OutPort::Port(port), out});
      }
      return all;
    }
    case ActionType::kDrop:
      return {{OutPort::Drop(), out}};
    case ActionType::kController:
      return {{OutPort::Controller(), out}};
  }
  return {{OutPort::Drop(), out}};
}

const AttackImplant* Simulator::InScope(const DeviceId& d, PortId in_port,
                                        uint64_t header,
                                        const std::vector<Emission>& normal,
                                        const Packet& p) {
  auto sends = [&](OutPort o) {
    return std::any_of(normal.begin(), normal.end(),
                       [&](const Emission& e) { return e.out == o; });
  };
  for (const AttackImplant& a : implants_) {
    if (!a.enabled || a.device != d) continue;
    if (a.action == ImplantAction::kReplay && p.copy) continue;
    bool in = false;
    switch (a.scope) {
      case ImplantScope::kAll:
        in = true;
        break;
      case ImplantScope::kIngressSubset:
        in = in_port == a.port && a.subset->Matches(header);
        break;
      case ImplantScope::kIngressSampled:
        in = in_port == a.port;
        break;
      case ImplantScope::kEgress:
        in = sends(OutPort::Port(a.port));
        break;
      case ImplantScope::kEgressSubset:
        in = sends(OutPort::Port(a.port)) && a.subset->Matches(header);
        break;
      case ImplantScope::kControllerBound:
        in = sends(OutPort::Controller());
        break;
    }
    if (!in) continue;
    if (a.probability < 1 &&
        std::uniform_real_distribution<double>(0, 1)(rng_) >= a.probability) {
      continue;
    }
    return &a;
  }
  return nullptr;
}

void Simulator::Arrive(const Event& e, std::vector<Observation>& log) {
  std::uniform_real_distribution<double> unit(0, 1);
  if (e.device == ControllerId()) {
    if (state_.controller().blocked_devices.contains(e.from)) return;
    log.push_back({e.packet.label, ControllerId(), 0, OutPort::Absorbed(),
                   e.at + options_.processing});
    return;
  }
  const ForwardingDevice* d = state_.FindDevice(e.device);
  if (d == nullptr) return;

  Nanos emit = e.at + options_.processing;
  if (options_.jitter > 0) {
    emit += static_cast<Nanos>(rng_() % (options_.jitter + 1));
  }
  if (options_.congestion_drop > 0) {
    emit += static_cast<Nanos>(std::exponential_distribution<double>(
        1.0 / static_cast<double>(options_.queue_mean))(rng_));
    if (unit(rng_) < options_.congestion_drop) {
      log.push_back({e.packet.label, e.device, e.in_port, OutPort::Drop(), emit});
      return;
    }
  }
  if (e.packet.ttl <= 0) {
    log.push_back({e.packet.label, e.device, e.in_port, OutPort::Drop(), emit});
    return;
  }

  const int bits = state_.header_bits();
  const uint64_t header = ModelHeader(e.packet.fields, bits);
  std::vector<Emission> outs = Forward(*d, e.in_port, e.packet, header);
  if (const AttackImplant* a = InScope(e.device, e.in_port, header, outs,
                                       e.packet)) {
    bool fired = true;
    switch (a->action) {
      case ImplantAction::kReplay: {
        Packet copy = e.packet;
        copy.copy = true;
        if (a->replay_to == ControllerId()) {
          outs.push_back({OutPort::Controller(), copy});
        } else {
          for (const auto& [port, n] : state_.Neighbors(e.device)) {
            if (n == a->replay_to) {
              outs.push_back({OutPort::Port(port), copy});
              break;
            }
          }
        }
        break;
      }
      case ImplantAction::kDrop:
        if (unit(rng_) < a->selectivity) {
          outs = {{OutPort::Drop(), e.packet}};
        } else {
          fired = false;
        }
        break;
      case ImplantAction::kMisroute: {
        fired = false;
        for (Emission& em : outs) {
          if (em.out != OutPort::Port(a->misroute_port)) {
            em.out = OutPort::Port(a->misroute_port);
            fired = true;
          }
        }
        break;
      }
      case ImplantAction::kGenerate: {
        const uint64_t forged = a->rewrite->RewriteHeader(header);
        PacketHeaderFields f = WithModelHeader(e.packet.fields, forged, bits);
        f.src_port ^= 0x5a5a;
        const Packet made = Relabel(f, e.packet);
        std::vector<Emission> made_outs = Forward(*d, e.in_port, made, forged);
        if (a->fabricate) {
          outs.insert(outs.end(), made_outs.begin(), made_outs.end());
        } else {
          outs = std::move(made_outs);
        }
        break;
      }
      case ImplantAction::kDelay:
        emit += a->delay;
        break;
    }
    if (fired) fires_.push_back({a->id, e.packet.label, e.at});
  }

  for (const Emission& em : outs) {
    log.push_back({em.packet.label, e.device, e.in_port, em.out, emit});
    Packet next = em.packet;
    next.ttl -= 1;
    switch (em.out.kind) {
      case OutPort::Kind::kPort: {
        auto peer = state_.Peer({e.device, em.out.port});
        if (!peer) break;  // left the network
        Schedule({emit + options_.link_latency, 0, peer->device, peer->port,
                  e.device, next});
        break;
      }
      case OutPort::Kind::kController:
        Schedule({emit + options_.link_latency, 0, ControllerId(), 0, e.device,
                  next});
        break;
      default:
        break;
    }
  }
}

absl::StatusOr<ProbeResult> Simulator::Inject(const std::vector<Probe>& probes) {
  ProbeResult result;
  const Nanos start = now_ + options_.link_latency;
  for (size_t i = 0; i < probes.size(); ++i) {
    const Probe& probe = probes[i];
    const ForwardingDevice* d = state_.FindDevice(probe.source);
    if (d == nullptr || !d->HasPort(probe.port)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "cannot inject at ", probe.source.str(), " port ", probe.port));
    }
    Packet p;
    p.fields = probe.fields;
    p.label = LabelPacket(probe.fields, options_.label_bits);
    p.ttl = options_.ttl;
    if (p.label != probe.label) {
      return absl::InvalidArgumentError(absl::StrCat(
          "probe label ", probe.label, " does not match the ",
          options_.label_bits, "-bit label of its header fields"));
    }
    const Nanos at = start + static_cast<Nanos>(i) * options_.injection_spacing;
    result.injected_at[p.label] = at;
    Schedule({at, 0, probe.source, probe.port, DeviceId(), p});
  }
  Drain(result.observations);
  now_ += options_.link_latency;
  return result;
}

ObservationLog Simulator::Run(const std::vector<Flow>& flows) {
  ObservationLog log;
  const Nanos start = now_ + options_.link_latency;
  for (size_t i = 0; i < flows.size(); ++i) {
    const Flow& f = flows[i];
    Packet p;
    p.fields = f.fields;
    p.label = LabelPacket(f.fields, options_.label_bits);
    p.ttl = options_.ttl;
    const Nanos at = start + static_cast<Nanos>(i) * options_.injection_spacing;
    log.probes.push_back({p.label, at, f.source, f.port});
    Schedule({at, 0, f.source, f.port, DeviceId(), p});
  }
  Drain(log.observations);
  now_ += options_.link_latency;
  return log;
}

std::vector<Flow> RandomFlows(const NetworkState& state,
                              const std::vector<PrefixOwner>& prefixes,
                              int count, int label_bits,
                              std::mt19937_64& rng) {
  std::vector<DeviceId> devices;
  for (const auto& [id, _] : state.devices()) devices.push_back(id);
  std::vector<Flow> out;
  if (devices.size() < 2 || prefixes.empty()) return out;
  std::set<PacketLabel> labels;
  const int bits = state.header_bits();
  while (static_cast<int>(out.size()) < count) {
    const PrefixOwner& dst = prefixes[rng() % prefixes.size()];
    const DeviceId& src = devices[rng() % devices.size()];
    if (src == dst.owner) continue;
    Flow f;
    f.source = src;
    f.port = 0;
    f.fields.src_ip = static_cast<uint32_t>(rng());
    f.fields.dst_ip = static_cast<uint32_t>(rng());
    f.fields.protocol = (rng() % 4 == 0) ? 17 : 6;
    f.fields.ip_id = static_cast<uint16_t>(rng());
    f.fields.src_port = static_cast<uint16_t>(1024 + rng() % 64512);
    f.fields.dst_port = static_cast<uint16_t>(rng() % 2 ? 443 : 80);
    const uint64_t header =
        (dst.prefix.value() | (rng() & ~dst.prefix.care())) &
        dst.prefix.width_mask();
    f.fields = WithModelHeader(f.fields, header, bits);
    PacketLabel label = LabelPacket(f.fields, label_bits);
    while (labels.contains(label)) {
      ++f.fields.ip_id;
      label = LabelPacket(f.fields, label_bits);
    }
    labels.insert(label);
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace wedgetail::sim
