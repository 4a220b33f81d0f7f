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

#include "wedgetail/scanner.h"

#include <algorithm>

#include "absl/strings/str_cat.h"
#include "json.hpp"

namespace wedgetail {
namespace {

std::vector<std::vector<DeviceId>> Paths(
    const std::vector<const ExpectedTrajectory*>& ts) {
  std::vector<std::vector<DeviceId>> out;
  for (const ExpectedTrajectory* t : ts) out.push_back(t->devices);
  return out;
}

bool SameFinding(const Verdict& a, const Verdict& b) {
  return a.kind == b.kind && a.malicious_devices == b.malicious_devices;
}

nlohmann::json DevicesJson(const std::vector<DeviceId>& ids) {
  nlohmann::json j = nlohmann::json::array();
  for (const DeviceId& d : ids) j.push_back(d.str());
  return j;
}

}  // namespace

std::vector<Verdict> SweepResult::Malicious() const {
  std::vector<Verdict> out;
  for (const Verdict& v : verdicts) {
    if (v.kind != VerdictKind::kBenign) out.push_back(v);
  }
  return out;
}

Scanner::Scanner(ExpectedCache& expected,
                 const CongestionEstimator& congestion, ScanConfig config)
    : expected_(expected),
      congestion_(congestion),
      config_(std::move(config)),
      rng_(config_.seed) {}

absl::Status Scanner::CheckFresh(const ProbeChannel& channel) const {
  if (StateChanged(expected_.snapshot(), channel.LiveState())) {
    return absl::AbortedError(absl::StrCat(
        "network changed since snapshot epoch ", expected_.snapshot().epoch()));
  }
  return absl::OkStatus();
}

Probe Scanner::MakeProbe(const DeviceId& source, PortId port,
                         const DeviceId& destination, uint64_t header) {
  const int bits = expected_.snapshot().header_bits();
  PacketHeaderFields f;
  f.src_ip = static_cast<uint32_t>(rng_());
  f.dst_ip = static_cast<uint32_t>(rng_());
  f.protocol = 6;
  f.ip_id = static_cast<uint16_t>(rng_());
  f.src_port = static_cast<uint16_t>(1024 + rng_() % 64512);
  f.dst_port = static_cast<uint16_t>(1024 + rng_() % 64512);
  f = WithModelHeader(f, header, bits);
  const size_t label_space = size_t{1} << config_.label_bits;
  if (used_labels_.size() * 2 > label_space) used_labels_.clear();
  PacketLabel label = LabelPacket(f, config_.label_bits);
  while (used_labels_.contains(label)) {
    ++f.ip_id;
    label = LabelPacket(f, config_.label_bits);
  }
  used_labels_.insert(label);
  return {label, f, header, source, port, destination};
}

Verdict Scanner::JudgeProbe(const Probe& probe,
                            const ExpectedFromSource& expected,
                            const Reconstruction& r, Nanos injected_at) {
  TrajectoryPair pair;
  pair.source = probe.source;
  pair.destination = probe.destination;
  if (const ExpectedSet* set = expected.Find(probe.destination)) {
    pair.expected = Paths(set->For(probe.header));
  }
  pair.explained = Paths(expected.AllFor(probe.header));
  if (r.ok()) pair.actual = WalksOf(r.trajectory);
  pair.injected_at = injected_at;
  const std::vector<DeviceId> best = BestExpected(pair);
  pair.t_e = congestion_.ExpectedTime(best);
  pair.t_d = congestion_.DelayBound(best);
  pair.expected_hops = congestion_.ExpectedHops(best);
  const ActualWalk* primary = nullptr;
  for (const ActualWalk& w : pair.actual) {
    if (w.devices == best) primary = &w;
  }
  if (primary == nullptr && !pair.actual.empty()) {
    primary = &pair.actual.front();
  }
  if (primary != nullptr && !primary->timestamps.empty()) {
    pair.t_a = primary->timestamps.back() - injected_at;
  }

  Verdict v = Judge(pair, config_.classify);
  v.port = probe.port;
  v.label = probe.label;
  v.header = probe.header;
  v.sweep = sweep_;
  if (v.kind == VerdictKind::kBenign || !r.ok()) return v;

  // Keep checking the rest of the actual trajectory against each device's
  // own table; more than one device may be misbehaving.
  const NetworkState& net = expected_.snapshot().state();
  for (const DeviceId& d : DeviatingDevices(net, probe.header, r.trajectory)) {
    if (std::find(v.malicious_devices.begin(), v.malicious_devices.end(), d) !=
        v.malicious_devices.end()) {
      continue;
    }
    bool only_drops = true;
    for (const Observation& o : r.trajectory.nodes) {
      if (o.device == d && o.out.kind != OutPort::Kind::kDrop) {
        only_drops = false;
      }
    }
    if (only_drops && congestion_.DeviceDropRate(d) > 0) continue;
    v.malicious_devices.push_back(d);
    v.notes.push_back(
        absl::StrCat(d.str(), " deviates from its flow table downstream"));
  }
  v.unlocalizable = v.malicious_devices.empty();
  return v;
}

absl::StatusOr<std::vector<Verdict>> Scanner::Evaluate(
    const std::vector<Probe>& probes, const ProbeResult& result,
    ScanStats& stats) {
  const NetworkState& net = expected_.snapshot().state();
  auto by_label = GroupByLabel(result.observations);
  std::vector<Verdict> verdicts;
  std::vector<Reconstruction> recs;
  std::set<PacketLabel> injected;
  for (const Probe& p : probes) {
    injected.insert(p.label);
    auto exp = expected_.Get(p.source, p.port);
    if (!exp.ok()) return exp.status();
    auto it = by_label.find(p.label);
    Reconstruction r = it == by_label.end()
                           ? Reconstruction{}
                           : ReconstructActual(it->second, p.label, net);
    if (r.status == Reconstruction::Status::kInvalid) ++stats.invalid;
    auto at = result.injected_at.find(p.label);
    const Nanos t0 = at == result.injected_at.end() ? 0 : at->second;
    Verdict v = JudgeProbe(p, **exp, r, t0);
    if (r.status == Reconstruction::Status::kNoTrajectory) {
      v.kind = VerdictKind::kDrop;
      v.malicious_devices = {p.source};
      v.unlocalizable = false;
      v.notes.push_back("probe never observed");
    } else if (r.status == Reconstruction::Status::kInvalid) {
      v = Verdict{};
      v.target = p.source;
      v.peer = p.destination;
      v.port = p.port;
      v.label = p.label;
      v.sweep = sweep_;
      v.notes.push_back(r.reason);
    }
    verdicts.push_back(std::move(v));
    recs.push_back(std::move(r));
  }

  // Packets under labels nobody injected were fabricated or rewritten in
  // flight. Pair each with the probe that disappeared where it appeared.
  for (const auto& [label, obs] : by_label) {
    if (injected.contains(label)) continue;
    ++stats.orphans;
    Reconstruction r = ReconstructActual(obs, label, net);
    if (!r.ok()) {
      ++stats.invalid;
      continue;
    }
    const Observation& root = r.trajectory.root();
    const Endpoint appeared{root.device, root.in_port};
    std::vector<DeviceId> walk_devices;
    for (const Walk& w : r.trajectory.walks) {
      for (const DeviceId& d : w.devices) {
        if (std::find(walk_devices.begin(), walk_devices.end(), d) ==
            walk_devices.end()) {
          walk_devices.push_back(d);
        }
      }
    }
    bool matched = false;
    for (size_t i = 0; i < probes.size() && !matched; ++i) {
      const Probe& p = probes[i];
      const Reconstruction& pr = recs[i];
      bool vanished_here = false;
      if (pr.status == Reconstruction::Status::kNoTrajectory) {
        vanished_here = appeared == Endpoint{p.source, p.port};
      } else if (pr.ok()) {
        for (const Walk& w : pr.trajectory.walks) {
          if (w.outcome != WalkOutcome::kVanished) continue;
          const Observation& last = pr.trajectory.nodes[w.nodes.back()];
          if (last.out.kind != OutPort::Kind::kPort) continue;
          auto peer = net.Peer({last.device, last.out.port});
          if (peer && *peer == appeared && last.timestamp < root.timestamp) {
            vanished_here = true;
          }
        }
      }
      if (!vanished_here) continue;
      matched = true;
      Verdict& v = verdicts[i];
      v.kind = VerdictKind::kGeneration;
      v.malicious_devices = {root.device};
      v.unlocalizable = false;
      v.actual = walk_devices;
      v.notes.push_back(absl::StrCat("packet rewritten at ", root.device.str(),
                                     " (new label ", label, ")"));
    }
    if (matched) continue;
    Verdict v;
    v.kind = VerdictKind::kGeneration;
    v.target = probes.empty() ? root.device : probes.front().source;
    v.peer = r.trajectory.walks.front().devices.back();
    v.port = probes.empty() ? 0 : probes.front().port;
    v.label = label;
    v.malicious_devices = {root.device};
    v.actual = walk_devices;
    v.sweep = sweep_;
    v.notes.push_back("packet under a label that was never injected");
    verdicts.push_back(std::move(v));
  }
  return verdicts;
}

absl::StatusOr<std::vector<Verdict>> Scanner::Reprobe(
    ProbeChannel& channel, const std::vector<Probe>& probes) {
  std::vector<Probe> fresh;
  for (const Probe& p : probes) {
    fresh.push_back(MakeProbe(p.source, p.port, p.destination, p.header));
  }
  auto result = channel.Inject(fresh);
  if (!result.ok()) return result.status();
  ScanStats ignored;
  return Evaluate(fresh, *result, ignored);
}

absl::StatusOr<Verdict> Scanner::Confirm(ProbeChannel& channel,
                                         const Probe& probe, Verdict verdict,
                                         ScanStats& stats) {
  const bool lossy_drop = verdict.kind == VerdictKind::kDrop &&
                          congestion_.Lossy(verdict.expected);
  const bool delay = verdict.kind == VerdictKind::kDelay;
  if (!lossy_drop && !delay) return verdict;

  if (lossy_drop) {
    // Re-probe drops confirm only the device they blame; another device
    // dropping on the same route is a finding of its own.
    std::map<std::vector<DeviceId>, std::pair<int, Verdict>> tally;
    for (int i = 0; i < config_.confirmations; ++i) {
      auto again = Reprobe(channel, {probe});
      if (!again.ok()) return again.status();
      ++stats.reprobes;
      for (const Verdict& v : *again) {
        if (v.kind == VerdictKind::kDrop) {
          auto& [count, last] = tally[v.malicious_devices];
          ++count;
          last = v;
          break;
        }
        // A late arrival still arrived; delays have their own test.
        if (v.kind != VerdictKind::kBenign && v.kind != VerdictKind::kDelay) {
          Verdict out = v;
          out.notes.push_back("found while re-probing a suspected drop");
          return out;
        }
      }
    }
    const double p = congestion_.TrajectoryDropRate(verdict.expected);
    const int drops = tally[verdict.malicious_devices].first;
    if (const double tail = BinomialTail(drops, config_.confirmations, p);
        tail < config_.alpha) {
      verdict.notes.push_back(absl::StrCat(
          drops, "/", config_.confirmations,
          " re-probes dropped on a lossy route (p=", tail, ")"));
      return verdict;
    }
    for (auto& [blamed, entry] : tally) {
      auto& [count, v] = entry;
      if (blamed == verdict.malicious_devices) continue;
      if (const double tail = BinomialTail(count, config_.confirmations, p);
          tail < config_.alpha) {
        v.notes.push_back(absl::StrCat(
            count, "/", config_.confirmations,
            " re-probes dropped on a lossy route (p=", tail,
            "), not where the first probe was lost"));
        return v;
      }
    }
    ++stats.demoted;
    Verdict benign = verdict;
    benign.kind = VerdictKind::kBenign;
    benign.malicious_devices.clear();
    benign.notes.push_back(absl::StrCat(
        "drop attributed to congestion, ", drops, "/", config_.confirmations,
        " re-probes dropped there"));
    return benign;
  }

  // The probe that raised the suspicion is not counted; re-probes alone
  // must show the route is slower than congestion explains.
  const double p = congestion_.DelayExceedance(verdict.expected);
  int exceed = 0;
  int tries = 0;
  while (tries < config_.max_reprobes) {
    auto again = Reprobe(channel, {probe});
    if (!again.ok()) return again.status();
    ++stats.reprobes;
    ++tries;
    if (!again->empty() && again->front().kind == VerdictKind::kDelay) {
      ++exceed;
    }
    if (exceed >= config_.confirmations &&
        BinomialTail(exceed, tries, p) < config_.alpha) {
      verdict.notes.push_back(absl::StrCat(exceed, " of ", tries,
                                           " re-probes exceeded T_d (p=", p,
                                           ")"));
      return verdict;
    }
  }
  ++stats.demoted;
  Verdict benign = verdict;
  benign.kind = VerdictKind::kBenign;
  benign.malicious_devices.clear();
  benign.notes.push_back(absl::StrCat("delay not repeatable, ", exceed, " of ",
                                      tries, " re-probes exceeded T_d"));
  return benign;
}

absl::StatusOr<SweepResult> Scanner::ScanForAttacks(ProbeChannel& channel,
                                                    const DeviceId& target,
                                                    PortId port) {
  if (absl::Status s = CheckFresh(channel); !s.ok()) return s;
  auto exp = expected_.Get(target, port);
  if (!exp.ok()) return exp.status();
  const ExpectedFromSource& expected = **exp;

  SweepResult out;
  out.sweep = sweep_;
  std::vector<Probe> probes;
  for (const auto& [dst, set] : expected.by_destination) {
    if (dst == ControllerId() && !config_.include_controller) continue;
    if (set.space.empty()) continue;
    for (int i = 0; i < config_.probes_per_pair; ++i) {
      probes.push_back(
          MakeProbe(target, port, dst, set.space.Sample(rng_)));
    }
  }
  for (const auto& [id, _] : expected_.snapshot().devices()) {
    if (id != target && expected.Find(id) == nullptr) {
      out.unreachable.push_back(absl::StrCat(target.str(), "->", id.str()));
    }
  }
  if (probes.empty()) return out;

  auto result = channel.Inject(probes);
  if (!result.ok()) return result.status();
  if (absl::Status s = CheckFresh(channel); !s.ok()) return s;
  out.stats.probes += static_cast<int>(probes.size());
  auto verdicts = Evaluate(probes, *result, out.stats);
  if (!verdicts.ok()) return verdicts.status();

  // Per-probe verdicts come first, orphan findings after.
  std::map<DeviceId, std::vector<Verdict>> by_peer;
  std::vector<DeviceId> peer_order;
  for (size_t i = 0; i < verdicts->size(); ++i) {
    Verdict v = (*verdicts)[i];
    if (i < probes.size()) {
      auto confirmed = Confirm(channel, probes[i], std::move(v), out.stats);
      if (!confirmed.ok()) return confirmed.status();
      v = *std::move(confirmed);
    }
    if (!by_peer.contains(v.peer)) peer_order.push_back(v.peer);
    by_peer[v.peer].push_back(std::move(v));
  }
  for (const DeviceId& peer : peer_order) {
    std::vector<Verdict>& vs = by_peer[peer];
    std::vector<Verdict> findings;
    for (Verdict& v : vs) {
      if (v.kind == VerdictKind::kBenign) continue;
      const bool dup = std::any_of(
          findings.begin(), findings.end(),
          [&](const Verdict& f) { return SameFinding(f, v); });
      if (!dup) findings.push_back(std::move(v));
    }
    if (findings.empty()) {
      out.verdicts.push_back(std::move(vs.front()));
    } else {
      for (Verdict& f : findings) out.verdicts.push_back(std::move(f));
    }
  }
  return out;
}

absl::StatusOr<SweepResult> Scanner::Sweep(ProbeChannel& channel,
                                           const ScanPlan& plan) {
  ++sweep_;
  used_labels_.clear();
  SweepResult out;
  out.sweep = sweep_;
  for (const DeviceId& target : plan.Order()) {
    const ForwardingDevice* d = expected_.snapshot().FindDevice(target);
    if (d == nullptr) continue;
    for (PortId port : config_.ports) {
      if (!d->HasPort(port)) continue;
      auto part = ScanForAttacks(channel, target, port);
      if (!part.ok()) return part.status();
      for (Verdict& v : part->verdicts) {
        v.sweep = sweep_;
        out.verdicts.push_back(std::move(v));
      }
      out.unreachable.insert(out.unreachable.end(), part->unreachable.begin(),
                             part->unreachable.end());
      out.stats.probes += part->stats.probes;
      out.stats.reprobes += part->stats.reprobes;
      out.stats.invalid += part->stats.invalid;
      out.stats.demoted += part->stats.demoted;
      out.stats.orphans += part->stats.orphans;
    }
  }
  return out;
}

std::string VerdictsToJsonLines(const std::vector<Verdict>& verdicts) {
  std::string out;
  for (const Verdict& v : verdicts) {
    nlohmann::json j;
    j["sweep"] = v.sweep;
    j["target"] = v.target.str();
    j["peer"] = v.peer.str();
    j["port"] = v.port;
    j["label"] = v.label;
    j["kind"] = std::string(VerdictKindName(v.kind));
    j["malicious_devices"] = DevicesJson(v.malicious_devices);
    j["unlocalizable"] = v.unlocalizable;
    j["unverified"] = DevicesJson(v.unverified);
    j["E"] = DevicesJson(v.expected);
    j["A"] = DevicesJson(v.actual);
    j["T_e"] = v.t_e;
    j["T_a"] = v.t_a;
    j["T_d"] = v.t_d;
    j["notes"] = v.notes;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace wedgetail
