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

#include "wedgetail/expected_trajectories.h"

#include <algorithm>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"

namespace wedgetail {
namespace {

std::string PathString(const std::vector<DeviceId>& path) {
  return absl::StrJoin(path, "->", [](std::string* out, const DeviceId& d) {
    out->append(d.str());
  });
}

class Propagator {
 public:
  Propagator(const NetworkSnapshot& snapshot, const TransferFunctions& tfs,
             ExpectedFromSource& result)
      : snapshot_(snapshot),
        tfs_(tfs),
        result_(result),
        hop_limit_(snapshot.devices().size()) {}

  void Run(const DeviceId& device, PortId ingress, const TrackedPattern& in,
           std::vector<DeviceId>& path) {
    const TransferFunction* tf = tfs_.Find(device);
    if (tf == nullptr) return;
    path.push_back(device);
    for (const TrackedOutput& o : ApplyTracked(*tf, in, ingress, false)) {
      switch (o.out.kind) {
        case OutPort::Kind::kDrop:
        case OutPort::Kind::kAbsorbed:
          break;
        case OutPort::Kind::kController: {
          path.push_back(ControllerId());
          Record(path, o.pattern.origin);
          path.pop_back();
          break;
        }
        case OutPort::Kind::kPort: {
          auto peer = snapshot_.Peer({device, o.out.port});
          if (!peer) {
            Record(path, o.pattern.origin);
            break;
          }
          if (std::find(path.begin(), path.end(), peer->device) !=
              path.end()) {
            path.push_back(peer->device);
            result_.loops.push_back(absl::StrCat(
                "loop ", PathString(path), " for headers ",
                o.pattern.origin.ToString()));
            path.pop_back();
            break;
          }
          if (path.size() >= hop_limit_) break;
          Run(peer->device, peer->port, o.pattern, path);
          break;
        }
      }
    }
    path.pop_back();
  }

 private:
  void Record(const std::vector<DeviceId>& path, const HeaderPattern& origin) {
    const DeviceId& dst = path.back();
    if (dst == result_.source) return;
    ExpectedSet& set = result_.by_destination
                           .try_emplace(dst, ExpectedSet{
                                                 HeaderSpace(origin.width()),
                                                 {}})
                           .first->second;
    set.space.Add(origin);
    auto it = std::find_if(
        set.trajectories.begin(), set.trajectories.end(),
        [&](const ExpectedTrajectory& t) { return t.devices == path; });
    if (it == set.trajectories.end()) {
      set.trajectories.push_back({path, HeaderSpace::Of(origin)});
    } else {
      it->origin.Add(origin);
    }
  }

  const NetworkSnapshot& snapshot_;
  const TransferFunctions& tfs_;
  ExpectedFromSource& result_;
  size_t hop_limit_;
};

}  // namespace

std::vector<const ExpectedTrajectory*> ExpectedSet::For(
    uint64_t header) const {
  std::vector<const ExpectedTrajectory*> out;
  for (const ExpectedTrajectory& t : trajectories) {
    if (t.origin.Contains(header)) out.push_back(&t);
  }
  return out;
}

const ExpectedSet* ExpectedFromSource::Find(
    const DeviceId& destination) const {
  auto it = by_destination.find(destination);
  return it == by_destination.end() ? nullptr : &it->second;
}

std::vector<const ExpectedTrajectory*> ExpectedFromSource::AllFor(
    uint64_t header) const {
  std::vector<const ExpectedTrajectory*> out;
  for (const auto& [_, set] : by_destination) {
    for (const ExpectedTrajectory* t : set.For(header)) out.push_back(t);
  }
  return out;
}

TransferFunctions::TransferFunctions(const NetworkSnapshot& snapshot) {
  for (const auto& [id, device] : snapshot.devices()) {
    by_device_.emplace(id, TransferFunction::FromDevice(device));
  }
}

const TransferFunction* TransferFunctions::Find(const DeviceId& id) const {
  auto it = by_device_.find(id);
  return it == by_device_.end() ? nullptr : &it->second;
}

absl::StatusOr<ExpectedFromSource> ExpectedTrajectoriesFrom(
    const NetworkSnapshot& snapshot, const TransferFunctions& tfs,
    const DeviceId& source, PortId port) {
  const ForwardingDevice* src = snapshot.FindDevice(source);
  if (src == nullptr) {
    return absl::NotFoundError(
        absl::StrCat("unknown source device ", source.str()));
  }
  if (!src->HasPort(port)) {
    return absl::NotFoundError(
        absl::StrCat("device ", source.str(), " has no port ", port));
  }
  ExpectedFromSource result;
  result.source = source;
  result.port = port;
  const HeaderPattern all =
      HeaderPattern::FromMasks(snapshot.header_bits(), 0, 0);
  std::vector<DeviceId> path;
  Propagator(snapshot, tfs, result)
      .Run(source, port, TrackedPattern::Start(all), path);
  for (auto& [_, set] : result.by_destination) {
    std::sort(set.trajectories.begin(), set.trajectories.end(),
              [](const ExpectedTrajectory& a, const ExpectedTrajectory& b) {
                return a.devices < b.devices;
              });
  }
  return result;
}

absl::StatusOr<ExpectedFromSource> ExpectedTrajectoriesFrom(
    const NetworkSnapshot& snapshot, const DeviceId& source, PortId port) {
  return ExpectedTrajectoriesFrom(snapshot, TransferFunctions(snapshot),
                                  source, port);
}

absl::StatusOr<ExpectedSet> ExpectedTrajectories(
    const NetworkSnapshot& snapshot, const DeviceId& source,
    const DeviceId& destination, PortId port) {
  if (source == destination) {
    return absl::InvalidArgumentError("source and destination coincide");
  }
  if (destination != ControllerId() &&
      snapshot.FindDevice(destination) == nullptr) {
    return absl::NotFoundError(
        absl::StrCat("unknown destination device ", destination.str()));
  }
  auto all = ExpectedTrajectoriesFrom(snapshot, source, port);
  if (!all.ok()) return all.status();
  if (const ExpectedSet* set = all->Find(destination)) return *set;
  return ExpectedSet{HeaderSpace(snapshot.header_bits()), {}};
}

ExpectedCache::ExpectedCache(NetworkSnapshot snapshot)
    : snapshot_(std::move(snapshot)), tfs_(snapshot_) {}

absl::StatusOr<std::shared_ptr<const ExpectedFromSource>> ExpectedCache::Get(
    const DeviceId& source, PortId port) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find({source, port});
    if (it != cache_.end()) return it->second;
  }
  auto computed = ExpectedTrajectoriesFrom(snapshot_, tfs_, source, port);
  if (!computed.ok()) return computed.status();
  auto shared =
      std::make_shared<const ExpectedFromSource>(*std::move(computed));
  std::lock_guard<std::mutex> lock(mu_);
  return cache_.try_emplace({source, port}, std::move(shared)).first->second;
}

}  // namespace wedgetail
