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

// Expected trajectories: push the whole header space injected at a device
// through the snapshot's transfer functions and record, per destination,
// which headers arrive and along which device sequences.
//
// A packet's journey ends when it leaves the network through a port with no
// link (a host or edge port, "delivered" at that device) or when it is
// punted to the controller, in which case the controller sentinel is the
// last element of the trajectory.

#ifndef WEDGETAIL_EXPECTED_TRAJECTORIES_H_
#define WEDGETAIL_EXPECTED_TRAJECTORIES_H_

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "wedgetail/header_space.h"
#include "wedgetail/net_model.h"
#include "wedgetail/transfer_function.h"

namespace wedgetail {

struct ExpectedTrajectory {
  std::vector<DeviceId> devices;
  // Injected headers that follow exactly this device sequence.
  HeaderSpace origin;
};

struct ExpectedSet {
  // Injected headers that reach the destination along any trajectory.
  HeaderSpace space;
  // Sorted by device sequence, no duplicates.
  std::vector<ExpectedTrajectory> trajectories;

  bool empty() const { return trajectories.empty(); }
  // Trajectories whose origin space contains `header`.
  std::vector<const ExpectedTrajectory*> For(uint64_t header) const;
};

struct ExpectedFromSource {
  DeviceId source;
  PortId port = 0;
  std::map<DeviceId, ExpectedSet> by_destination;
  // One line per forwarding loop found during propagation.
  std::vector<std::string> loops;

  const ExpectedSet* Find(const DeviceId& destination) const;
  // Every expected trajectory, for any destination, that `header` follows.
  std::vector<const ExpectedTrajectory*> AllFor(uint64_t header) const;
};

// Transfer functions for every device of a snapshot.
class TransferFunctions {
 public:
  explicit TransferFunctions(const NetworkSnapshot& snapshot);
  const TransferFunction* Find(const DeviceId& id) const;

 private:
  std::map<DeviceId, TransferFunction> by_device_;
};

// Propagates the all-wildcard header space injected at `source` on `port`.
// The hop limit is the number of devices in the snapshot.
absl::StatusOr<ExpectedFromSource> ExpectedTrajectoriesFrom(
    const NetworkSnapshot& snapshot, const TransferFunctions& tfs,
    const DeviceId& source, PortId port);
absl::StatusOr<ExpectedFromSource> ExpectedTrajectoriesFrom(
    const NetworkSnapshot& snapshot, const DeviceId& source, PortId port);

// Single pair form. A destination with no path yields an empty set.
absl::StatusOr<ExpectedSet> ExpectedTrajectories(
    const NetworkSnapshot& snapshot, const DeviceId& source,
    const DeviceId& destination, PortId port);

// Memoizes per-source propagation for one snapshot. Thread-safe.
class ExpectedCache {
 public:
  explicit ExpectedCache(NetworkSnapshot snapshot);

  const NetworkSnapshot& snapshot() const { return snapshot_; }
  const TransferFunctions& transfer_functions() const { return tfs_; }
  absl::StatusOr<std::shared_ptr<const ExpectedFromSource>> Get(
      const DeviceId& source, PortId port);

 private:
  NetworkSnapshot snapshot_;
  TransferFunctions tfs_;
  std::mutex mu_;
  std::map<std::pair<DeviceId, PortId>,
           std::shared_ptr<const ExpectedFromSource>>
      cache_;
};

}  // namespace wedgetail

#endif  // WEDGETAIL_EXPECTED_TRAJECTORIES_H_
