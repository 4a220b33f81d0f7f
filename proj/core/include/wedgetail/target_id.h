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

// Scan prioritization. Devices are scored by how often they show up in the
// observed trajectory corpus and bucketed into ordered scan groups. The
// first group holds the densest devices plus the least represented ones
// that still carry traffic; devices absent from every trajectory go last
// and are flagged, since a device that should carry traffic but is never
// seen is itself suspicious.

#ifndef WEDGETAIL_TARGET_ID_H_
#define WEDGETAIL_TARGET_ID_H_

#include <map>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "wedgetail/net_model.h"
#include "wedgetail/trajectory.h"

namespace wedgetail {

inline constexpr int kDefaultScanGroups = 3;

// score(d) = trajectories visiting d / all trajectories. Every snapshot
// device gets an entry; devices outside the snapshot (the controller) are
// ignored. Fails on an empty corpus.
absl::StatusOr<std::map<DeviceId, double>> Representativeness(
    const std::vector<Trajectory>& corpus, const NetworkSnapshot& snapshot);

struct ScanGroup {
  std::vector<DeviceId> devices;  // by descending score, then id
  // Devices that appear in no trajectory.
  bool silent = false;
};

struct ScanPlan {
  std::vector<ScanGroup> groups;
  std::map<DeviceId, double> scores;

  // All devices in scan order.
  std::vector<DeviceId> Order() const;
  std::string ToJson() const;
};

// `groups` (k) must be at least 2: k - 1 quantile buckets for devices with
// nonzero score plus the silent group. Empty groups are omitted.
absl::StatusOr<ScanPlan> BuildScanPlan(const std::vector<Trajectory>& corpus,
                                       const NetworkSnapshot& snapshot,
                                       int groups = kDefaultScanGroups);

// Plan used when there is no corpus: every device in one group, id order.
ScanPlan UniformScanPlan(const NetworkSnapshot& snapshot);

}  // namespace wedgetail

#endif  // WEDGETAIL_TARGET_ID_H_
