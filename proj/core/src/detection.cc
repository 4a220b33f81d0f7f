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

#include "wedgetail/detection.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "absl/strings/str_cat.h"

namespace wedgetail {
namespace {

using Path = std::vector<DeviceId>;

bool Reached(const ActualWalk& w, const Path& e) {
  if (w.devices != e) return false;
  return e.back() == ControllerId() ? w.outcome == WalkOutcome::kController
                                    : w.outcome == WalkOutcome::kDelivered;
}

bool MatchesAny(const ActualWalk& w, const std::vector<Path>& set) {
  for (const Path& e : set) {
    if (Reached(w, e)) return true;
  }
  return false;
}

size_t CommonPrefix(const Path& a, const Path& b) {
  size_t n = 0;
  while (n < a.size() && n < b.size() && a[n] == b[n]) ++n;
  return n;
}

bool IsPrefix(const Path& a, const Path& b) {
  return a.size() <= b.size() && CommonPrefix(a, b) == a.size();
}

// A walk that follows E and then stops short of delivering.
bool DropShaped(const ActualWalk& w, const Path& e) {
  if (!IsPrefix(w.devices, e)) return false;
  if (w.outcome == WalkOutcome::kDropped ||
      w.outcome == WalkOutcome::kVanished) {
    return true;
  }
  return false;
}

// Walk follows all of E: either delivered like E or continued beyond it.
bool Covers(const ActualWalk& w, const Path& e) {
  if (e.empty() || !IsPrefix(e, w.devices)) return false;
  return w.devices.size() > e.size() || Reached(w, e);
}

struct Analysis {
  Path best;
  std::vector<const ActualWalk*> unexplained;
  bool intact = false;
  bool covered = false;
  bool overlap = false;
  Path actual;  // first-visit order
  Path extra;   // A \ E
};

Analysis Analyze(const TrajectoryPair& pair) {
  Analysis a;
  const std::vector<Path>& explained =
      pair.explained.empty() ? pair.expected : pair.explained;
  // Expected trajectories are distinct paths, so a second walk along the
  // same path is a copy nobody asked for.
  std::set<std::pair<Path, WalkOutcome>> walked;
  for (const ActualWalk& w : pair.actual) {
    if (MatchesAny(w, pair.expected)) a.intact = true;
    const bool repeat = !walked.insert({w.devices, w.outcome}).second;
    if (repeat || !MatchesAny(w, explained)) a.unexplained.push_back(&w);
  }
  a.best = BestExpected(pair);
  std::set<DeviceId> in_e(a.best.begin(), a.best.end());
  std::set<DeviceId> seen;
  for (const ActualWalk& w : pair.actual) {
    for (const DeviceId& d : w.devices) {
      if (!seen.insert(d).second) continue;
      a.actual.push_back(d);
      if (in_e.contains(d)) {
        a.overlap = true;
      } else {
        a.extra.push_back(d);
      }
    }
    if (Covers(w, a.best)) a.covered = true;
  }
  return a;
}

struct Classification {
  VerdictKind kind;
  bool anomaly = false;
};

Classification ClassifyDetailed(const TrajectoryPair& pair,
                                const ClassifyOptions& options) {
  const Analysis a = Analyze(pair);
  const bool structurally_benign = a.intact && a.unexplained.empty();
  const Nanos delta = pair.t_a - pair.t_e;
  if (structurally_benign && delta <= pair.t_d) return {VerdictKind::kBenign};
  // A copy leaves the original walk intact. A single walk that runs past
  // E without one bounced off the path instead.
  const bool copied = a.covered && a.intact;
  if (copied && (!a.extra.empty() || !a.unexplained.empty())) {
    return {VerdictKind::kReplay};
  }
  bool strays = !a.extra.empty();
  for (const ActualWalk* u : a.unexplained) {
    if (!DropShaped(*u, a.best)) strays = true;
  }
  if (a.overlap && !copied && strays) return {VerdictKind::kMisroute};
  if (options.strict_drop) {
    std::set<DeviceId> in_e(a.best.begin(), a.best.end());
    const bool subset = std::all_of(a.actual.begin(), a.actual.end(),
                                    [&](const DeviceId& d) {
                                      return in_e.contains(d);
                                    });
    if (!subset && a.actual.size() < a.best.size()) {
      return {VerdictKind::kDrop};
    }
  } else if (a.extra.empty() && !a.unexplained.empty() && !strays) {
    return {VerdictKind::kDrop};
  }
  if (!a.overlap) return {VerdictKind::kGeneration};
  if (structurally_benign) return {VerdictKind::kDelay};
  return {VerdictKind::kMisroute, true};
}

std::vector<Nanos> HopDurations(const ActualWalk& w, Nanos injected_at) {
  std::vector<Nanos> out;
  Nanos prev = injected_at;
  for (Nanos t : w.timestamps) {
    out.push_back(t - prev);
    prev = t;
  }
  return out;
}

void AddUnique(std::vector<DeviceId>& out, const DeviceId& d) {
  if (std::find(out.begin(), out.end(), d) == out.end()) out.push_back(d);
}

}  // namespace

absl::string_view VerdictKindName(VerdictKind kind) {
  switch (kind) {
    case VerdictKind::kBenign:
      return "benign";
    case VerdictKind::kReplay:
      return "replay";
    case VerdictKind::kMisroute:
      return "misroute";
    case VerdictKind::kDrop:
      return "drop";
    case VerdictKind::kGeneration:
      return "generation";
    case VerdictKind::kDelay:
      return "delay";
  }
  return "?";
}

absl::StatusOr<VerdictKind> ParseVerdictKind(absl::string_view name) {
  for (VerdictKind k :
       {VerdictKind::kBenign, VerdictKind::kReplay, VerdictKind::kMisroute,
        VerdictKind::kDrop, VerdictKind::kGeneration, VerdictKind::kDelay}) {
    if (VerdictKindName(k) == name) return k;
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown verdict kind \"", name, "\""));
}

ActualWalk ActualWalk::Of(std::vector<DeviceId> devices, WalkOutcome outcome) {
  ActualWalk w;
  w.devices = std::move(devices);
  w.outcome = outcome;
  return w;
}

std::vector<ActualWalk> WalksOf(const ActualTrajectory& actual) {
  std::vector<ActualWalk> out;
  for (const Walk& w : actual.walks) {
    ActualWalk a;
    a.devices = w.devices;
    a.outcome = w.outcome;
    a.next_device = w.next_device;
    a.nodes = w.nodes;
    for (size_t k : w.nodes) a.timestamps.push_back(actual.nodes[k].timestamp);
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<DeviceId> BestExpected(const TrajectoryPair& pair) {
  if (pair.expected.empty()) return {};
  for (const ActualWalk& w : pair.actual) {
    for (const Path& e : pair.expected) {
      if (w.devices == e) return e;
    }
  }
  const std::vector<Path>& explained =
      pair.explained.empty() ? pair.expected : pair.explained;
  const ActualWalk* probe = nullptr;
  for (const ActualWalk& w : pair.actual) {
    if (!MatchesAny(w, explained)) {
      probe = &w;
      break;
    }
  }
  if (probe == nullptr && !pair.actual.empty()) probe = &pair.actual.front();
  const Path* best = nullptr;
  size_t best_len = 0;
  for (const Path& e : pair.expected) {
    const size_t len = probe ? CommonPrefix(probe->devices, e) : 0;
    if (best == nullptr || len > best_len ||
        (len == best_len && e < *best)) {
      best = &e;
      best_len = len;
    }
  }
  return *best;
}

VerdictKind Classify(const TrajectoryPair& pair,
                     const ClassifyOptions& options) {
  return ClassifyDetailed(pair, options).kind;
}

std::optional<size_t> LocalizeDelay(const std::vector<Nanos>& actual_hops,
                                    const std::vector<Nanos>& expected_hops,
                                    Nanos t_d) {
  const size_t n = std::min(actual_hops.size(), expected_hops.size());
  double excess = 0;
  bool over = false;
  size_t worst = 0;
  for (size_t k = 0; k < n; ++k) {
    const Nanos own = actual_hops[k] - expected_hops[k];
    if (own > actual_hops[worst] - expected_hops[worst]) worst = k;
    excess += static_cast<double>(own);
    const double share =
        static_cast<double>(t_d) * static_cast<double>(k + 1) / n;
    if (excess > share) over = true;
  }
  if (!over) return std::nullopt;
  return worst;
}

std::vector<DeviceId> Localize(const TrajectoryPair& pair, VerdictKind kind) {
  const Analysis a = Analyze(pair);
  std::vector<const ActualWalk*> walks = a.unexplained;
  if (walks.empty()) {
    for (const ActualWalk& w : pair.actual) walks.push_back(&w);
  }
  std::vector<DeviceId> out;
  const Path& e = a.best;
  auto last_common = [&](const ActualWalk& w) {
    const size_t n = CommonPrefix(w.devices, e);
    return n == 0 ? w.devices.front() : w.devices[n - 1];
  };
  switch (kind) {
    case VerdictKind::kBenign:
      break;
    case VerdictKind::kReplay: {
      const ActualWalk* cover = nullptr;
      for (const ActualWalk& w : pair.actual) {
        if (Covers(w, e) && MatchesAny(w, pair.expected)) {
          cover = &w;
          break;
        }
      }
      for (const ActualWalk* u : walks) {
        if (u == cover || u->devices.empty()) continue;
        if (cover && !u->nodes.empty() && !cover->nodes.empty()) {
          size_t n = 0;
          while (n < u->nodes.size() && n < cover->nodes.size() &&
                 u->nodes[n] == cover->nodes[n]) {
            ++n;
          }
          // Sibling emissions of one arrival branch at that device.
          if (n < u->nodes.size() && n < cover->nodes.size() &&
              u->devices[n] == cover->devices[n]) {
            ++n;
          }
          if (n > 0) {
            AddUnique(out, u->devices[n - 1]);
            continue;
          }
        }
        AddUnique(out, last_common(*u));
      }
      break;
    }
    case VerdictKind::kMisroute:
      for (const ActualWalk* u : walks) {
        if (!u->devices.empty() && !DropShaped(*u, e)) {
          AddUnique(out, last_common(*u));
        }
      }
      if (out.empty() && !walks.empty() && !walks.front()->devices.empty()) {
        AddUnique(out, last_common(*walks.front()));
      }
      break;
    case VerdictKind::kDrop:
      for (const ActualWalk* u : walks) {
        if (u->devices.empty()) continue;
        if (u->outcome == WalkOutcome::kVanished && !u->next_device.empty()) {
          AddUnique(out, u->next_device);
        } else {
          AddUnique(out, u->devices.back());
        }
      }
      break;
    case VerdictKind::kGeneration:
      for (const ActualWalk* u : walks) {
        if (!u->devices.empty()) AddUnique(out, u->devices.front());
      }
      break;
    case VerdictKind::kDelay: {
      for (const ActualWalk& w : pair.actual) {
        if (!MatchesAny(w, pair.expected) ||
            w.timestamps.size() != w.devices.size()) {
          continue;
        }
        const auto hop = LocalizeDelay(HopDurations(w, pair.injected_at),
                                       pair.expected_hops, pair.t_d);
        if (hop) AddUnique(out, w.devices[*hop]);
        break;
      }
      break;
    }
  }
  std::erase(out, ControllerId());
  return out;
}

Verdict Judge(const TrajectoryPair& pair, const ClassifyOptions& options) {
  const Classification c = ClassifyDetailed(pair, options);
  const Analysis a = Analyze(pair);
  Verdict v;
  v.kind = c.kind;
  v.target = pair.source;
  v.peer = pair.destination;
  v.expected = a.best;
  v.actual = a.actual;
  v.t_e = pair.t_e;
  v.t_a = pair.t_a;
  v.t_d = pair.t_d;
  if (c.anomaly) {
    v.notes.push_back("no rule matched exactly; reported as misroute");
  }
  if (c.kind == VerdictKind::kBenign) return v;
  v.malicious_devices = Localize(pair, c.kind);
  v.unlocalizable = v.malicious_devices.empty();
  std::set<DeviceId> seen(a.actual.begin(), a.actual.end());
  for (const DeviceId& d : a.best) {
    if (!seen.contains(d)) v.unverified.push_back(d);
  }
  return v;
}

std::vector<DeviceId> DeviatingDevices(const NetworkState& net,
                                       uint64_t injected_header,
                                       const ActualTrajectory& actual,
                                       int ttl) {
  std::vector<DeviceId> out;
  const size_t n = actual.nodes.size();
  std::vector<uint64_t> header(n, injected_header);
  std::vector<int> depth(n, 0);
  for (size_t i = 0; i < n; ++i) {
    const Observation& o = actual.nodes[i];
    if (actual.parent[i] >= 0) {
      const size_t p = static_cast<size_t>(actual.parent[i]);
      depth[i] = depth[p] + 1;
      header[i] = header[p];
      const Observation& po = actual.nodes[p];
      if (const ForwardingDevice* pd = net.FindDevice(po.device)) {
        const FlowRule* rule = pd->Lookup(header[p], po.in_port);
        if (rule && rule->rewrite) {
          header[i] = rule->rewrite->RewriteHeader(header[p]);
        }
      }
    }
    if (o.device == ControllerId()) continue;
    const ForwardingDevice* d = net.FindDevice(o.device);
    if (d == nullptr) continue;
    const FlowRule* rule = d->Lookup(header[i], o.in_port);
    bool allowed = false;
    if (o.out.kind == OutPort::Kind::kDrop) {
      allowed = rule == nullptr || rule->action.type == ActionType::kDrop ||
                depth[i] + 1 >= ttl;
    } else if (rule != nullptr) {
      switch (rule->action.type) {
        case ActionType::kForward:
        case ActionType::kGroup:
          allowed = o.out.kind == OutPort::Kind::kPort &&
                    std::find(rule->action.ports.begin(),
                              rule->action.ports.end(),
                              o.out.port) != rule->action.ports.end();
          break;
        case ActionType::kFlood:
          allowed = o.out.kind == OutPort::Kind::kPort &&
                    o.out.port != o.in_port && d->HasPort(o.out.port);
          break;
        case ActionType::kController:
          allowed = o.out.kind == OutPort::Kind::kController;
          break;
        case ActionType::kDrop:
          break;
      }
    }
    if (!allowed) AddUnique(out, o.device);
  }
  return out;
}

CongestionEstimator::CongestionEstimator(CongestionOptions options)
    : options_(options), delay_bound_(options.delay_floor) {}

Nanos CongestionEstimator::NominalHop(size_t index) const {
  return index == 0 ? options_.nominal_processing
                    : options_.nominal_link + options_.nominal_processing;
}

CongestionEstimator CongestionEstimator::Estimate(const ObservationLog& benign,
                                                  const NetworkState& net,
                                                  CongestionOptions options) {
  CongestionEstimator est(options);
  std::map<DeviceId, std::pair<size_t, size_t>> visits;  // (drops, seen)
  for (const Observation& o : benign.observations) {
    auto& [drops, seen] = visits[o.device];
    ++seen;
    if (o.out.kind == OutPort::Kind::kDrop) ++drops;
  }
  for (const auto& [d, v] : visits) {
    est.drop_rate_[d] = static_cast<double>(v.first) / v.second;
  }

  struct Sample {
    Path route;
    Nanos total;
  };
  std::vector<Sample> samples;
  std::map<std::pair<DeviceId, bool>, std::pair<double, size_t>> hop_sum;
  std::map<Path, std::pair<double, size_t>> route_sum;
  const auto by_label = GroupByLabel(benign.observations);
  for (const ProbeRecord& p : benign.probes) {
    auto it = by_label.find(p.label);
    if (it == by_label.end()) continue;
    Reconstruction r = ReconstructActual(it->second, p.label, net);
    if (!r.ok() || r.trajectory.walks.size() != 1) continue;
    const Walk& w = r.trajectory.walks.front();
    if (w.outcome != WalkOutcome::kDelivered &&
        w.outcome != WalkOutcome::kController) {
      continue;
    }
    Nanos prev = p.injected_at;
    for (size_t k = 0; k < w.nodes.size(); ++k) {
      const Nanos t = r.trajectory.nodes[w.nodes[k]].timestamp;
      auto& [sum, count] = hop_sum[{w.devices[k], k == 0}];
      sum += static_cast<double>(t - prev - est.NominalHop(k));
      ++count;
      prev = t;
    }
    auto& [rsum, rcount] = route_sum[w.devices];
    rsum += static_cast<double>(prev - p.injected_at);
    ++rcount;
    samples.push_back({w.devices, prev - p.injected_at});
  }
  for (const auto& [key, v] : hop_sum) {
    est.hop_excess_[key] = v.first / v.second;
  }
  for (const auto& [route, v] : route_sum) {
    // A mean over a handful of samples hugs those samples and makes the
    // excess quantile below too tight.
    if (v.second >= options.min_samples) {
      est.route_mean_[route] = v.first / v.second;
    }
  }
  est.samples_ = samples.size();
  if (samples.size() < options.min_samples) {
    est.delay_bound_ =
        std::max(options.delay_floor, options.fallback_delay_bound);
    est.warnings_.push_back(absl::StrCat(
        "only ", samples.size(), " calibration trajectories; using ",
        est.delay_bound_, " ns as delay bound"));
    return est;
  }
  const auto quantile = [&](std::vector<Nanos> excess) {
    std::sort(excess.begin(), excess.end());
    const size_t idx = static_cast<size_t>(std::ceil(
        options.delay_quantile * static_cast<double>(excess.size())));
    return std::max(options.delay_floor,
                    excess[std::clamp<size_t>(idx, 1, excess.size()) - 1]);
  };
  std::vector<Nanos> all;
  std::map<Path, std::vector<Nanos>> by_route;
  std::map<size_t, std::vector<Nanos>> by_length;
  for (const Sample& s : samples) {
    const Nanos e = s.total - est.ExpectedTime(s.route);
    all.push_back(e);
    by_route[s.route].push_back(e);
    by_length[s.route.size()].push_back(e);
  }
  est.delay_bound_ = quantile(all);
  for (auto& [route, v] : by_route) {
    if (v.size() >= options.min_samples) {
      est.route_bound_[route] = {quantile(v), v.size()};
    }
  }
  for (auto& [length, v] : by_length) {
    if (v.size() >= options.min_samples) {
      est.length_bound_[length] = {quantile(v), v.size()};
    }
  }
  return est;
}

CongestionEstimator::Bound CongestionEstimator::BoundFor(
    const Path& devices) const {
  if (auto it = route_bound_.find(devices); it != route_bound_.end()) {
    return it->second;
  }
  if (auto it = length_bound_.find(devices.size());
      it != length_bound_.end()) {
    return it->second;
  }
  return {delay_bound_, samples_};
}

Nanos CongestionEstimator::DelayBound(const Path& devices) const {
  return BoundFor(devices).t_d;
}

double CongestionEstimator::DelayExceedance(const Path& devices) const {
  const double q = options_.delay_quantile;
  const Bound b = BoundFor(devices);
  if (b.samples < options_.min_samples) {
    // Fallback bound; nothing to say about how often it is exceeded.
    return std::max(1 - q, 0.1);
  }
  // Three standard errors above the nominal tail mass.
  return std::min(
      1.0, (1 - q) + 3 * std::sqrt(q * (1 - q) / static_cast<double>(b.samples)));
}

double CongestionEstimator::DeviceDropRate(const DeviceId& device) const {
  auto it = drop_rate_.find(device);
  return it == drop_rate_.end() ? 0.0 : it->second;
}

double CongestionEstimator::TrajectoryDropRate(const Path& devices) const {
  double survive = 1.0;
  for (const DeviceId& d : devices) survive *= 1.0 - DeviceDropRate(d);
  return 1.0 - survive;
}

bool CongestionEstimator::Lossy(const Path& devices) const {
  return TrajectoryDropRate(devices) > options_.lossy_threshold;
}

std::vector<Nanos> CongestionEstimator::ExpectedHops(
    const Path& devices) const {
  std::vector<Nanos> hops;
  for (size_t k = 0; k < devices.size(); ++k) {
    double t = static_cast<double>(NominalHop(k));
    auto it = hop_excess_.find({devices[k], k == 0});
    if (it != hop_excess_.end()) t += it->second;
    hops.push_back(static_cast<Nanos>(std::llround(t)));
  }
  return hops;
}

Nanos CongestionEstimator::ExpectedTime(const Path& devices) const {
  auto it = route_mean_.find(devices);
  if (it != route_mean_.end()) return static_cast<Nanos>(std::llround(it->second));
  const std::vector<Nanos> hops = ExpectedHops(devices);
  return std::accumulate(hops.begin(), hops.end(), Nanos{0});
}

double BinomialTail(int k, int n, double p) {
  if (k <= 0) return 1.0;
  if (k > n) return 0.0;
  double total = 0;
  for (int i = k; i <= n; ++i) {
    const double log_choose = std::lgamma(n + 1.0) - std::lgamma(i + 1.0) -
                              std::lgamma(n - i + 1.0);
    double term;
    if (p <= 0) {
      term = 0;
    } else if (p >= 1) {
      term = i == n ? 1.0 : 0.0;
    } else {
      term = std::exp(log_choose + i * std::log(p) + (n - i) * std::log1p(-p));
    }
    total += term;
  }
  return std::min(1.0, total);
}

void ControllerLoadMonitor::Calibrate(
    const std::vector<std::map<DeviceId, int>>& windows) {
  std::set<DeviceId> devices;
  for (const auto& w : windows) {
    for (const auto& [d, _] : w) devices.insert(d);
  }
  std::vector<double> values;
  for (const auto& w : windows) {
    for (const DeviceId& d : devices) {
      auto it = w.find(d);
      values.push_back(it == w.end() ? 0.0 : it->second);
    }
  }
  if (values.empty()) {
    threshold_ = 0;
    return;
  }
  const double mean =
      std::accumulate(values.begin(), values.end(), 0.0) / values.size();
  double var = 0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= values.size();
  threshold_ = mean + sigmas_ * std::sqrt(var);
}

std::vector<DeviceId> ControllerLoadMonitor::Excessive(
    const std::map<DeviceId, int>& counts) const {
  std::vector<DeviceId> out;
  for (const auto& [d, c] : counts) {
    if (c > threshold_) out.push_back(d);
  }
  return out;
}

std::map<DeviceId, int> ControllerBoundCounts(
    const std::vector<ActualTrajectory>& trajectories) {
  std::map<DeviceId, int> out;
  for (const ActualTrajectory& t : trajectories) {
    for (const Walk& w : t.walks) {
      if (w.outcome == WalkOutcome::kController && w.devices.size() >= 2) {
        ++out[w.devices[w.devices.size() - 2]];
      }
    }
  }
  return out;
}

}  // namespace wedgetail
