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

#include "wedgetail/target_id.h"

#include <algorithm>
#include <set>

#include "absl/strings/str_cat.h"
#include "json.hpp"

namespace wedgetail {

absl::StatusOr<std::map<DeviceId, double>> Representativeness(
    const std::vector<Trajectory>& corpus, const NetworkSnapshot& snapshot) {
  if (corpus.empty()) {
    return absl::FailedPreconditionError(
        "empty trajectory corpus, no basis for prioritization");
  }
  std::map<DeviceId, size_t> visits;
  for (const auto& [id, _] : snapshot.devices()) visits[id] = 0;
  for (const Trajectory& t : corpus) {
    std::set<DeviceId> seen;
    for (const TimedHop& h : t.hops) seen.insert(h.device);
    for (const DeviceId& d : seen) {
      auto it = visits.find(d);
      if (it != visits.end()) ++it->second;
    }
  }
  std::map<DeviceId, double> scores;
  const double total = static_cast<double>(corpus.size());
  for (const auto& [id, count] : visits) scores[id] = count / total;
  return scores;
}

std::vector<DeviceId> ScanPlan::Order() const {
  std::vector<DeviceId> out;
  for (const ScanGroup& g : groups) {
    out.insert(out.end(), g.devices.begin(), g.devices.end());
  }
  return out;
}

std::string ScanPlan::ToJson() const {
  nlohmann::json j;
  j["groups"] = nlohmann::json::array();
  for (const ScanGroup& g : groups) {
    nlohmann::json group;
    group["silent"] = g.silent;
    group["devices"] = nlohmann::json::array();
    for (const DeviceId& d : g.devices) {
      group["devices"].push_back({{"id", d.str()}, {"score", scores.at(d)}});
    }
    j["groups"].push_back(std::move(group));
  }
  return j.dump(2);
}

absl::StatusOr<ScanPlan> BuildScanPlan(const std::vector<Trajectory>& corpus,
                                       const NetworkSnapshot& snapshot,
                                       int groups) {
  if (groups < 2) {
    return absl::InvalidArgumentError(
        absl::StrCat("need at least 2 scan groups, got ", groups));
  }
  auto scores = Representativeness(corpus, snapshot);
  if (!scores.ok()) return scores.status();

  ScanPlan plan;
  plan.scores = *std::move(scores);
  std::vector<DeviceId> active;
  std::vector<DeviceId> silent;
  for (const auto& [id, s] : plan.scores) {
    (s > 0 ? active : silent).push_back(id);
  }
  auto by_score = [&](const DeviceId& a, const DeviceId& b) {
    const double sa = plan.scores.at(a);
    const double sb = plan.scores.at(b);
    return sa != sb ? sa > sb : a < b;
  };
  std::sort(active.begin(), active.end(), by_score);

  const int buckets = groups - 1;
  std::vector<ScanGroup> bucketed(buckets);
  if (!active.empty()) {
    const double lowest = plan.scores.at(active.back());
    size_t rank = 0;
    for (size_t i = 0; i < active.size(); ++i) {
      // Equal scores share the rank of the first of them.
      if (i > 0 && plan.scores.at(active[i]) != plan.scores.at(active[i - 1])) {
        rank = i;
      }
      size_t b = rank * buckets / active.size();
      // Least represented devices join the top group.
      if (plan.scores.at(active[i]) == lowest) b = 0;
      bucketed[b].devices.push_back(active[i]);
    }
  }
  for (ScanGroup& g : bucketed) {
    std::sort(g.devices.begin(), g.devices.end(), by_score);
    if (!g.devices.empty()) plan.groups.push_back(std::move(g));
  }
  if (!silent.empty()) plan.groups.push_back({silent, true});
  return plan;
}

ScanPlan UniformScanPlan(const NetworkSnapshot& snapshot) {
  ScanPlan plan;
  ScanGroup all;
  for (const auto& [id, _] : snapshot.devices()) {
    all.devices.push_back(id);
    plan.scores[id] = 0;
  }
  if (!all.devices.empty()) plan.groups.push_back(std::move(all));
  return plan;
}

}  // namespace wedgetail
