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

// Comparing actual with expected trajectories: classification of the
// malicious action, localization of the responsible device and the
// congestion model that keeps benign loss and delay from being reported.

#ifndef WEDGETAIL_DETECTION_H_
#define WEDGETAIL_DETECTION_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "wedgetail/net_model.h"
#include "wedgetail/trajectory.h"

namespace wedgetail {

enum class VerdictKind {
  kBenign,
  kReplay,
  kMisroute,
  kDrop,
  kGeneration,
  kDelay,
};

absl::string_view VerdictKindName(VerdictKind kind);
absl::StatusOr<VerdictKind> ParseVerdictKind(absl::string_view name);

// One root-to-leaf path of an actual trajectory, detached from the tree.
struct ActualWalk {
  std::vector<DeviceId> devices;
  // Emission time at each device; may be empty when timing is irrelevant.
  std::vector<Nanos> timestamps;
  WalkOutcome outcome = WalkOutcome::kDelivered;
  DeviceId next_device;
  // Tree node ids, used to find where copies branched. May be empty.
  std::vector<size_t> nodes;

  static ActualWalk Of(std::vector<DeviceId> devices,
                       WalkOutcome outcome = WalkOutcome::kDelivered);
};

std::vector<ActualWalk> WalksOf(const ActualTrajectory& actual);

struct TrajectoryPair {
  DeviceId source;
  DeviceId destination;
  // Expected trajectories to `destination` for the probe header (E).
  std::vector<std::vector<DeviceId>> expected;
  // Expected trajectories to any destination for the probe header; a walk
  // matching one of them is explained (flood copies, for instance). Treated
  // as `expected` when empty.
  std::vector<std::vector<DeviceId>> explained;
  // Walks of the actual trajectory (A).
  std::vector<ActualWalk> actual;
  Nanos injected_at = 0;
  Nanos t_e = 0;  // expected traversal time
  Nanos t_a = 0;  // actual traversal time
  Nanos t_d = 0;  // largest delay congestion can explain
  // Expected duration of each hop of the best expected trajectory; hop 0 is
  // processing at the first device.
  std::vector<Nanos> expected_hops;
};

struct ClassifyOptions {
  // Use the literal "A not within E and |A| < |E|" drop rule instead of the
  // prefix rule.
  bool strict_drop = false;
};

// The expected trajectory the classification is judged against: one equal
// to an actual walk if any, else the longest common prefix with the first
// unexplained walk, ties broken by device ids.
std::vector<DeviceId> BestExpected(const TrajectoryPair& pair);

// Checked in order: benign, replay, misroute, drop, generation, delay;
// leftovers are misroute.
VerdictKind Classify(const TrajectoryPair& pair,
                     const ClassifyOptions& options = {});

// Devices responsible for `kind`. Empty means unlocalizable.
std::vector<DeviceId> Localize(const TrajectoryPair& pair, VerdictKind kind);

// The delay is attributed when some prefix of the walk runs over its share
// of `t_d`, i.e. excess(k) > t_d * (k + 1) / n for some k; the hop blamed is
// the one with the largest excess of its own, so that queuing on earlier
// hops does not take the blame. nullopt if no prefix qualifies.
std::optional<size_t> LocalizeDelay(const std::vector<Nanos>& actual_hops,
                                    const std::vector<Nanos>& expected_hops,
                                    Nanos t_d);

struct Verdict {
  VerdictKind kind = VerdictKind::kBenign;
  std::vector<DeviceId> malicious_devices;
  bool unlocalizable = false;
  // Expected devices never seen, left for later analysis.
  std::vector<DeviceId> unverified;
  DeviceId target;
  DeviceId peer;
  PortId port = 0;
  PacketLabel label = 0;
  uint64_t header = 0;
  std::vector<DeviceId> expected;  // best E
  std::vector<DeviceId> actual;    // A, devices in first-visit order
  Nanos t_e = 0;
  Nanos t_a = 0;
  Nanos t_d = 0;
  int sweep = 0;
  std::vector<std::string> notes;
};

// Classify and localize in one step; fills the evidence fields.
Verdict Judge(const TrajectoryPair& pair, const ClassifyOptions& options = {});

// Devices in the tree whose reported output contradicts their own flow table
// for the packet, given the header injected at the root. Drops after `ttl`
// hops are legitimate expiry.
std::vector<DeviceId> DeviatingDevices(const NetworkState& net,
                                       uint64_t injected_header,
                                       const ActualTrajectory& actual,
                                       int ttl = 64);

// Injection record of a packet in a calibration or probe run.
struct ProbeRecord {
  PacketLabel label = 0;
  Nanos injected_at = 0;
  DeviceId device;
  PortId in_port = 0;
};

struct ObservationLog {
  std::vector<Observation> observations;
  std::vector<ProbeRecord> probes;
};

struct CongestionOptions {
  Nanos nominal_link = 1'000'000;
  Nanos nominal_processing = 10'000;
  Nanos delay_floor = 500'000;
  // Used when calibration data is too thin.
  Nanos fallback_delay_bound = 5'000'000;
  double delay_quantile = 0.99;
  size_t min_samples = 20;
  // A trajectory is lossy when its benign drop probability exceeds this.
  double lossy_threshold = 0.0;
};

class CongestionEstimator {
 public:
  // Model with no calibration: nominal timings, no loss, the configured
  // floor as delay bound.
  explicit CongestionEstimator(CongestionOptions options = {});

  static CongestionEstimator Estimate(const ObservationLog& benign,
                                      const NetworkState& net,
                                      CongestionOptions options = {});

  // Network-wide bound, used for routes without enough calibration of their
  // own or of their length.
  Nanos delay_bound() const { return delay_bound_; }
  size_t samples() const { return samples_; }

  // T_d for one trajectory.
  Nanos DelayBound(const std::vector<DeviceId>& devices) const;
  // Upper estimate of how often a benign probe on this trajectory exceeds
  // DelayBound; grows as the calibration behind the bound gets thinner.
  double DelayExceedance(const std::vector<DeviceId>& devices) const;
  const std::vector<std::string>& warnings() const { return warnings_; }

  double DeviceDropRate(const DeviceId& device) const;
  // 1 - prod(1 - rate) over the devices.
  double TrajectoryDropRate(const std::vector<DeviceId>& devices) const;
  bool Lossy(const std::vector<DeviceId>& devices) const;

  std::vector<Nanos> ExpectedHops(const std::vector<DeviceId>& devices) const;
  Nanos ExpectedTime(const std::vector<DeviceId>& devices) const;

 private:
  struct Bound {
    Nanos t_d = 0;
    size_t samples = 0;
  };

  Nanos NominalHop(size_t index) const;
  Bound BoundFor(const std::vector<DeviceId>& devices) const;

  CongestionOptions options_;
  Nanos delay_bound_;
  size_t samples_ = 0;
  std::vector<std::string> warnings_;
  std::map<DeviceId, double> drop_rate_;
  // Mean extra time per hop into a device, beyond the nominal hop time,
  // keyed by (device, first hop?).
  std::map<std::pair<DeviceId, bool>, double> hop_excess_;
  std::map<std::vector<DeviceId>, double> route_mean_;
  std::map<std::vector<DeviceId>, Bound> route_bound_;
  std::map<size_t, Bound> length_bound_;
};

// P(X >= k) for X ~ Binomial(n, p).
double BinomialTail(int k, int n, double p);

// Flags devices that send the controller unusually many trajectories. The
// threshold is mean + sigmas * stddev of per-device counts over calibration
// windows unless set explicitly.
class ControllerLoadMonitor {
 public:
  explicit ControllerLoadMonitor(double sigmas = 3.0) : sigmas_(sigmas) {}

  void Calibrate(const std::vector<std::map<DeviceId, int>>& windows);
  void set_threshold(double t) { threshold_ = t; }
  double threshold() const { return threshold_; }
  std::vector<DeviceId> Excessive(const std::map<DeviceId, int>& counts) const;

 private:
  double sigmas_;
  double threshold_ = 0;
};

// Counts, per device, walks that end at the controller.
std::map<DeviceId, int> ControllerBoundCounts(
    const std::vector<ActualTrajectory>& trajectories);

}  // namespace wedgetail

#endif  // WEDGETAIL_DETECTION_H_
