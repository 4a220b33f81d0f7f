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


#include "wedgetail/net_model.h"

#include <string>

#include "gtest/gtest.h"

namespace wedgetail {
namespace {

constexpr char kTopology[] = R"({
  "name": "tri",
  "devices": [{"id": "s1", "ports": 3}, {"id": "s2", "ports": 3},
              {"id": "s3", "ports": 3}],
  "links": [{"a": {"device": "s1", "port": 1}, "b": {"device": "s2", "port": 1}},
            {"a": {"device": "s2", "port": 2}, "b": {"device": "s3", "port": 1}}],
  "hosts": [{"id": "h1", "device": "s1", "port": 0}]
})";

constexpr char kRules[] = R"({
  "header_bits": 4,
  "devices": {
    "s1": [{"priority": 1, "match": "xxxx", "action": "drop"},
           {"priority": 10, "match": "1xxx", "in_port": 0, "action": "forward", "out_port": 1},
           {"priority": 5, "match": "11xx", "action": "controller"}],
    "s2": [{"priority": 1, "match": "xxxx", "action": "group", "out_ports": [0, 2]},
           {"priority": 2, "match": "0xxx", "action": "flood", "rewrite": "xx11"}]
  }
})";

TEST(NetModelTest, ParsesTopologyAndRules) {
  auto state = ParseNetwork(kTopology, kRules);
  ASSERT_TRUE(state.ok()) << state.status();
  EXPECT_EQ(state->header_bits(), 4);
  EXPECT_EQ(state->devices().size(), 3u);
  EXPECT_EQ(state->links().size(), 2u);
  EXPECT_EQ(state->Peer({DeviceId("s1"), 1})->device, DeviceId("s2"));
  EXPECT_FALSE(state->Peer({DeviceId("s1"), 2}).has_value());
  EXPECT_EQ(*state->HostAt({DeviceId("s1"), 0}), "h1");
  auto n = state->Neighbors(DeviceId("s2"));
  ASSERT_EQ(n.size(), 2u);
  EXPECT_EQ(n[0].second, DeviceId("s1"));
  EXPECT_EQ(n[1].second, DeviceId("s3"));
}

TEST(NetModelTest, LookupHonorsPriorityAndInPort) {
  auto state = ParseNetwork(kTopology, kRules);
  ASSERT_TRUE(state.ok());
  const ForwardingDevice* s1 = state->FindDevice(DeviceId("s1"));
  ASSERT_NE(s1, nullptr);
  // Sorted by priority: 10, 5, 1.
  EXPECT_EQ(s1->flow_table[0].priority, 10);
  EXPECT_EQ(s1->flow_table[2].priority, 1);
  EXPECT_EQ(s1->Lookup(0b1100, 0)->action.type, ActionType::kForward);
  EXPECT_EQ(s1->Lookup(0b1100, 2)->action.type, ActionType::kController);
  EXPECT_EQ(s1->Lookup(0b0100, 0)->action.type, ActionType::kDrop);
  const ForwardingDevice* s3 = state->FindDevice(DeviceId("s3"));
  EXPECT_EQ(s3->Lookup(0, 0), nullptr);
}

TEST(NetModelTest, EqualPrioritiesKeepInsertionOrder) {
  NetworkState s(4);
  ASSERT_TRUE(s.AddDevice(DeviceId("d"), 2).ok());
  FlowRule a{3, *HeaderPattern::Parse("xxxx"), std::nullopt, Action::Forward(0), std::nullopt};
  FlowRule b{3, *HeaderPattern::Parse("xxxx"), std::nullopt, Action::Forward(1), std::nullopt};
  ASSERT_TRUE(s.InstallRule(DeviceId("d"), a).ok());
  ASSERT_TRUE(s.InstallRule(DeviceId("d"), b).ok());
  EXPECT_EQ(s.FindDevice(DeviceId("d"))->Lookup(5, 0)->action.ports[0], 0u);
}

TEST(NetModelTest, RejectsBadInput) {
  EXPECT_FALSE(ParseNetwork("{", "").ok());
  // Unknown device in a link.
  EXPECT_EQ(ParseNetwork(R"({"devices":[{"id":"a","ports":2}],
      "links":[{"a":{"device":"a","port":1},"b":{"device":"zz","port":1}}]})", "")
                .status().code(),
            absl::StatusCode::kNotFound);
  // Port out of range on a rule.
  EXPECT_FALSE(ParseNetwork(kTopology, R"({"header_bits":4,"devices":{"s1":[
      {"match":"xxxx","action":"forward","out_port":9}]}})").ok());
  // Width mismatch.
  EXPECT_FALSE(ParseNetwork(kTopology, R"({"header_bits":4,"devices":{"s1":[
      {"match":"xxx","action":"drop"}]}})").ok());
  // Unknown action.
  EXPECT_FALSE(ParseNetwork(kTopology, R"({"header_bits":4,"devices":{"s1":[
      {"match":"xxxx","action":"teleport"}]}})").ok());
  NetworkState s(4);
  EXPECT_FALSE(s.AddDevice(ControllerId(), 2).ok());
  ASSERT_TRUE(s.AddDevice(DeviceId("a"), 2).ok());
  EXPECT_EQ(s.AddDevice(DeviceId("a"), 2).code(), absl::StatusCode::kAlreadyExists);
  ASSERT_TRUE(s.AddDevice(DeviceId("b"), 2).ok());
  ASSERT_TRUE(s.AddLink({DeviceId("a"), 1}, {DeviceId("b"), 1}).ok());
  EXPECT_FALSE(s.AddLink({DeviceId("a"), 1}, {DeviceId("b"), 0}).ok());
}

TEST(NetModelTest, JsonRoundTrip) {
  auto state = ParseNetwork(kTopology, kRules);
  ASSERT_TRUE(state.ok());
  auto again = ParseNetwork(TopologyToJson(*state, "tri"), RulesToJson(*state));
  ASSERT_TRUE(again.ok()) << again.status();
  EXPECT_TRUE(state->SameForwardingState(*again));
  EXPECT_EQ(again->hosts(), state->hosts());
}

TEST(NetModelTest, SnapshotIsIsolatedFromLiveState) {
  auto state = ParseNetwork(kTopology, kRules);
  ASSERT_TRUE(state.ok());
  const NetworkSnapshot a = NetworkSnapshot::Capture(*state);
  const NetworkSnapshot b = NetworkSnapshot::Capture(*state);
  EXPECT_LT(a.epoch(), b.epoch());
  EXPECT_FALSE(StateChanged(a, *state));
  state->mutable_controller().blocked_devices.insert(DeviceId("s1"));
  EXPECT_FALSE(StateChanged(a, *state));
  ASSERT_TRUE(state->RemoveLinksOf(DeviceId("s3")).ok());
  EXPECT_TRUE(StateChanged(a, *state));
  EXPECT_EQ(a.state().links().size(), 2u);
  EXPECT_EQ(a.DeviceIds().size(), 3u);
}

TEST(NetModelTest, OutPortText) {
  for (const OutPort& o : {OutPort::Port(7), OutPort::Drop(),
                           OutPort::Controller(), OutPort::Absorbed()}) {
    auto parsed = OutPort::Parse(o.ToString());
    ASSERT_TRUE(parsed.ok());
    EXPECT_EQ(*parsed, o);
  }
  EXPECT_FALSE(OutPort::Parse("north").ok());
}

}  // namespace
}  // namespace wedgetail
