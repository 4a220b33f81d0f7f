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

#include <map>
#include <set>

#include "gtest/gtest.h"
#include "wedgetail/sim/topologies.h"

namespace wedgetail {
namespace {

Trajectory T(std::initializer_list<const char*> devices) {
  Trajectory t;
  Nanos at = 0;
  for (const char* d : devices) t.hops.push_back({DeviceId(d), at += 10});
  return t;
}

NetworkSnapshot FiveDevices() {
  NetworkState s(8);
  for (const char* d : {"a", "b", "c", "d", "e"}) {
    EXPECT_TRUE(s.AddDevice(DeviceId(d), 2).ok());
  }
  return NetworkSnapshot::Capture(s);
}

TEST(RepresentativenessTest, FractionOfTrajectoriesVisiting) {
  const NetworkSnapshot snap = FiveDevices();
  // b in 4 of 4 (once per trajectory even when revisited), a in 2, c in 1.
  const std::vector<Trajectory> corpus = {
      T({"a", "b"}), T({"b", "c", "b"}), T({"a", "b"}), T({"b", "zz"})};
  auto s = Representativeness(corpus, snap);
  ASSERT_TRUE(s.ok());
  EXPECT_DOUBLE_EQ(s->at(DeviceId("b")), 1.0);
  EXPECT_DOUBLE_EQ(s->at(DeviceId("a")), 0.5);
  EXPECT_DOUBLE_EQ(s->at(DeviceId("c")), 0.25);
  EXPECT_DOUBLE_EQ(s->at(DeviceId("e")), 0.0);
  EXPECT_FALSE(s->contains(DeviceId("zz")));
  EXPECT_EQ(Representativeness({}, snap).status().code(),
            absl::StatusCode::kFailedPrecondition);
}

TEST(ScanPlanTest, GroupsAndOrder) {
  const NetworkSnapshot snap = FiveDevices();
  // Scores: b 1.0, a 0.75, c 0.5, d 0.25, e silent.
  const std::vector<Trajectory> corpus = {
      T({"a", "b", "c", "d"}), T({"a", "b", "c"}), T({"a", "b"}), T({"b"})};
  auto plan = BuildScanPlan(corpus, snap, 3);
  ASSERT_TRUE(plan.ok());
  std::vector<std::vector<std::string>> groups;
  for (const ScanGroup& g : plan->groups) {
    groups.emplace_back();
    for (const DeviceId& d : g.devices) groups.back().push_back(d.str());
  }
  // Two quantile buckets over four active devices; the least represented
  // device is scanned with the top group; silent devices go last.
  const std::vector<std::vector<std::string>> want = {
      {"b", "a", "d"}, {"c"}, {"e"}};
  EXPECT_EQ(groups, want);
  EXPECT_TRUE(plan->groups.back().silent);
  EXPECT_EQ(plan->Order().size(), 5u);
  EXPECT_FALSE(BuildScanPlan(corpus, snap, 1).ok());
}

TEST(ScanPlanTest, UniformPlanCoversEveryDevice) {
  const ScanPlan plan = UniformScanPlan(FiveDevices());
  ASSERT_EQ(plan.groups.size(), 1u);
  EXPECT_EQ(plan.Order().front(), DeviceId("a"));
  EXPECT_EQ(plan.Order().size(), 5u);
}

TEST(ScanPlanTest, HubsOfFigure2ComeFirst) {
  const NetworkState s = sim::Figure2Topology();
  const NetworkSnapshot snap = NetworkSnapshot::Capture(s);
  // Shortest paths between every pair of leaves.
  std::map<std::string, std::string> hub = {
      {"a", "b"}, {"c", "b"}, {"d", "b"}, {"h", "g"}, {"i", "g"},
      {"j", "g"}, {"e", "f"}, {"k", "f"}, {"l", "f"}};
  std::vector<Trajectory> corpus;
  for (const auto& [x, hx] : hub) {
    for (const auto& [y, hy] : hub) {
      if (x == y) continue;
      corpus.push_back(hx == hy ? T({x.c_str(), hx.c_str(), y.c_str()})
                                : T({x.c_str(), hx.c_str(), hy.c_str(), y.c_str()}));
    }
  }
  auto plan = BuildScanPlan(corpus, snap, 3);
  ASSERT_TRUE(plan.ok());
  const std::set<DeviceId> top(plan->groups[0].devices.begin(),
                               plan->groups[0].devices.end());
  for (const char* h : {"b", "g", "f"}) EXPECT_TRUE(top.contains(DeviceId(h)));
  const std::vector<DeviceId> order = plan->Order();
  const std::set<DeviceId> first3(order.begin(), order.begin() + 3);
  EXPECT_EQ(first3, (std::set<DeviceId>{DeviceId("b"), DeviceId("f"), DeviceId("g")}));
}

}  // namespace
}  // namespace wedgetail
