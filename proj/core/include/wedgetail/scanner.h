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

// The scanning loop. For a target device and port, random probe packets
// are drawn from the header space towards every reachable peer, injected
// through a ProbeChannel, and their actual trajectories judged against the
// expected ones. Suspected drops on lossy routes and delays are re-probed
// before they are reported.

#ifndef WEDGETAIL_SCANNER_H_
#define WEDGETAIL_SCANNER_H_

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "wedgetail/detection.h"
#include "wedgetail/expected_trajectories.h"
#include "wedgetail/net_model.h"
#include "wedgetail/target_id.h"
#include "wedgetail/trajectory.h"

namespace wedgetail {

struct Probe {
  PacketLabel label = 0;
  PacketHeaderFields fields;
  uint64_t header = 0;  // model header, see ModelHeader()
  DeviceId source;
  PortId port = 0;
  DeviceId destination;
};

struct ProbeResult {
  std::map<PacketLabel, Nanos> injected_at;
  // Everything observed while the probes were in flight, including packets
  // under labels that were never injected.
  std::vector<Observation> observations;
};

// Where probes go. The simulator implements this; a deployment would wrap
// packet injection and the trajectory collector.
class ProbeChannel {
 public:
  virtual ~ProbeChannel() = default;
  virtual absl::StatusOr<ProbeResult> Inject(const std::vector<Probe>& probes) = 0;
  // Forwarding state right now, used to detect a stale snapshot.
  virtual const NetworkState& LiveState() const = 0;
};

struct ScanConfig {
  uint64_t seed = 1;
  int probes_per_pair = 2;
  int label_bits = kDefaultLabelBits;
  // Injection ports scanned on each target.
  std::vector<PortId> ports = {0};
  bool include_controller = true;
  // Re-probes needed to confirm a delay, and used to test a drop on a lossy
  // route.
  int confirmations = 3;
  int max_reprobes = 16;
  // Significance for confirming drops on lossy routes.
  double alpha = 1e-3;
  ClassifyOptions classify;
};

struct ScanStats {
  int probes = 0;
  int reprobes = 0;
  int invalid = 0;
  int demoted = 0;
  int orphans = 0;
};

struct SweepResult {
  int sweep = 0;
  // One verdict per (target, peer, port) when benign, otherwise one per
  // distinct finding.
  std::vector<Verdict> verdicts;
  // "target->peer" pairs with an empty header space.
  std::vector<std::string> unreachable;
  ScanStats stats;

  std::vector<Verdict> Malicious() const;
};

class Scanner {
 public:
  Scanner(ExpectedCache& expected, const CongestionEstimator& congestion,
          ScanConfig config);

  // Probes every peer of `target` injected on `port`. Fails with Aborted if
  // the live network no longer matches the snapshot.
  absl::StatusOr<SweepResult> ScanForAttacks(ProbeChannel& channel,
                                             const DeviceId& target,
                                             PortId port);

  // Scans every device in plan order on every configured port.
  absl::StatusOr<SweepResult> Sweep(ProbeChannel& channel,
                                    const ScanPlan& plan);

  // Re-injects the given probes' headers with fresh labels and judges them.
  absl::StatusOr<std::vector<Verdict>> Reprobe(ProbeChannel& channel,
                                               const std::vector<Probe>& probes);

  int sweeps_done() const { return sweep_; }

 private:
  Probe MakeProbe(const DeviceId& source, PortId port,
                  const DeviceId& destination, uint64_t header);
  absl::StatusOr<std::vector<Verdict>> Evaluate(
      const std::vector<Probe>& probes, const ProbeResult& result,
      ScanStats& stats);
  Verdict JudgeProbe(const Probe& probe, const ExpectedFromSource& expected,
                     const Reconstruction& r, Nanos injected_at);
  absl::StatusOr<Verdict> Confirm(ProbeChannel& channel, const Probe& probe,
                                  Verdict verdict, ScanStats& stats);
  absl::Status CheckFresh(const ProbeChannel& channel) const;

  ExpectedCache& expected_;
  const CongestionEstimator& congestion_;
  ScanConfig config_;
  std::mt19937_64 rng_;
  std::set<PacketLabel> used_labels_;
  int sweep_ = 0;
};

// JSON lines, one verdict per line.
std::string VerdictsToJsonLines(const std::vector<Verdict>& verdicts);

}  // namespace wedgetail

#endif  // WEDGETAIL_SCANNER_H_
