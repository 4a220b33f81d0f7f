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


#include "wedgetail/response.h"

#include <string>

#include "gtest/gtest.h"
#include "wedgetail/sim/topologies.h"

namespace wedgetail {
namespace {

constexpr char kPolicies[] = R"(<policies>
  <policy id="P1">
    <subject>FD(g)</subject>
    <object>Switch(f)</object>
    <action>Update_forwarding_table(FD(g))</action>
    <condition>device=f</condition>
    <validity>60000</validity>
  </policy>
  <policy id="P2">
    <subject>Controller</subject>
    <object>Switch(f)</object>
    <action>Block_Messages(FD(f))</action>
    <condition>device=f</condition>
    <validity>60000</validity>
  </policy>
  <policy id="P3">
    <subject>Controller</subject>
    <action>Isolate(FD(b))</action>
    <condition>device=b</condition>
    <exception>P1</exception>
    <validity>30000</validity>
  </policy>
</policies>)";

constexpr Nanos kSecond = 1'000'000'000;

Verdict Finding(VerdictKind kind, const char* device) {
  Verdict v;
  v.kind = kind;
  v.malicious_devices = {DeviceId(device)};
  v.target = DeviceId("a");
  v.peer = DeviceId("e");
  v.label = 77;
  return v;
}

TEST(ParsePoliciesTest, ParsesAllFields) {
  auto p = ParsePolicies(kPolicies);
  ASSERT_TRUE(p.ok()) << p.status();
  ASSERT_EQ(p->size(), 3u);
  const ResponsePolicy& p1 = (*p)[0];
  EXPECT_EQ(p1.id, "P1");
  EXPECT_FALSE(p1.subject.controller);
  EXPECT_EQ(p1.subject.device, DeviceId("g"));
  ASSERT_EQ(p1.actions.size(), 1u);
  EXPECT_EQ(p1.actions[0].action, ResponseAction::kUpdateForwardingTable);
  EXPECT_EQ(p1.actions[0].device, "g");
  EXPECT_EQ(p1.condition.device, "f");
  EXPECT_EQ(p1.validity_ms, 60000);
  EXPECT_EQ((*p)[2].exceptions, std::vector<std::string>{"P1"});
  auto again = ParsePolicies(PoliciesToXml(*p));
  ASSERT_TRUE(again.ok()) << again.status();
  EXPECT_EQ(PoliciesToXml(*again), PoliciesToXml(*p));
}

std::string One(const std::string& body) {
  return "<policies><policy id=\"A\">" + body + "</policy></policies>";
}

TEST(ParsePoliciesTest, ErrorsNameTheElement) {
  auto bad_subject = ParsePolicies(
      "<policies><policy id=\"A\"><subject>Controller</subject>"
      "<action>Alarm</action><validity>1</validity></policy>"
      "<policy id=\"B\"><subject>Router(x)</subject><action>Alarm</action>"
      "<validity>1</validity></policy></policies>");
  ASSERT_FALSE(bad_subject.ok());
  EXPECT_NE(bad_subject.status().message().find("policies.policy[2].subject"),
            std::string::npos)
      << bad_subject.status();

  EXPECT_FALSE(ParsePolicies(One("<subject>Controller</subject><action>Alarm</action>")).ok())
      << "validity is required";
  EXPECT_FALSE(ParsePolicies(One("<subject>Controller</subject><action>Alarm</action>"
                                 "<validity>0</validity>")).ok());
  EXPECT_FALSE(ParsePolicies(One("<subject>Controller</subject><action>Reboot(FD(x))</action>"
                                 "<validity>5</validity>")).ok());
  EXPECT_FALSE(ParsePolicies(One("<subject>Controller</subject><action>Alarm</action>"
                                 "<condition>colour=red</condition><validity>5</validity>")).ok());
  EXPECT_FALSE(ParsePolicies("<policies><policy>").ok());
  EXPECT_FALSE(ParsePolicies("<rules/>").ok());
}

TEST(ParsePoliciesTest, RejectsBadReferences) {
  const std::string policy =
      "<policy id=\"%s\"><subject>Controller</subject><action>Alarm</action>"
      "<exception>%s</exception><validity>5</validity></policy>";
  auto make = [&](const char* id, const char* exc) {
    std::string s = policy;
    s.replace(s.find("%s"), 2, id);
    s.replace(s.find("%s"), 2, exc);
    return s;
  };
  EXPECT_FALSE(ParsePolicies("<policies>" + make("A", "Z") + "</policies>").ok());
  EXPECT_FALSE(ParsePolicies("<policies>" + make("A", "B") + make("B", "A") +
                             "</policies>").ok());
  EXPECT_FALSE(ParsePolicies("<policies>" + make("A", "B") + make("A", "B") +
                             "</policies>").ok());
  EXPECT_TRUE(ParsePolicies("<policies>" + make("A", "B") + make("B", "C") +
                            make("C", "D") +
                            "<policy id=\"D\"><subject>Controller</subject>"
                            "<action>Alarm</action><validity>5</validity>"
                            "</policy></policies>").ok());
}

TEST(NaturalLessTest, NumbersCompareByValue) {
  EXPECT_TRUE(NaturalLess("P2", "P10"));
  EXPECT_FALSE(NaturalLess("P10", "P2"));
  EXPECT_TRUE(NaturalLess("A", "B"));
  EXPECT_FALSE(NaturalLess("P1", "P1"));
}

TEST(ResponseEngineTest, FMaliciousTriggersBothPolicies) {
  ResponseEngine engine(*ParsePolicies(kPolicies));
  const ResponseOutcome out =
      engine.MatchAndExecute({Finding(VerdictKind::kDrop, "f")}, 10 * kSecond);
  ASSERT_EQ(out.actions.size(), 2u);
  EXPECT_EQ(out.actions[0].policy_id, "P1");
  EXPECT_EQ(out.actions[0].action, ResponseAction::kUpdateForwardingTable);
  EXPECT_EQ(out.actions[0].target, DeviceId("g"));
  EXPECT_EQ(out.actions[0].subject, "FD(g)");
  EXPECT_EQ(out.actions[0].expiry, 70 * kSecond);
  EXPECT_EQ(out.actions[1].policy_id, "P2");
  EXPECT_EQ(out.actions[1].action, ResponseAction::kBlockMessages);
  EXPECT_EQ(out.actions[1].target, DeviceId("f"));
  EXPECT_TRUE(out.suppressed.empty());
  EXPECT_TRUE(engine.Active("P1", 69 * kSecond));
  EXPECT_FALSE(engine.Active("P1", 70 * kSecond));
}

TEST(ResponseEngineTest, ExceptionSuppressesWhileActive) {
  ResponseEngine engine(*ParsePolicies(kPolicies));
  engine.MatchAndExecute({Finding(VerdictKind::kDrop, "f")}, 0);
  // b found while P1 is active: P3 is suppressed and no default alarm.
  ResponseOutcome out =
      engine.MatchAndExecute({Finding(VerdictKind::kReplay, "b")}, 5 * kSecond);
  EXPECT_TRUE(out.actions.empty());
  ASSERT_EQ(out.suppressed.size(), 1u);
  EXPECT_EQ(out.suppressed[0].policy_id, "P3");
  EXPECT_EQ(out.suppressed[0].because_of, "P1");
  // After P1 expires P3 acts.
  out = engine.MatchAndExecute({Finding(VerdictKind::kReplay, "b")}, 61 * kSecond);
  ASSERT_EQ(out.actions.size(), 1u);
  EXPECT_EQ(out.actions[0].action, ResponseAction::kIsolate);
  EXPECT_EQ(out.actions[0].target, DeviceId("b"));
  // Both in one sweep: P1 matched now blocks P3.
  ResponseEngine fresh(*ParsePolicies(kPolicies));
  out = fresh.MatchAndExecute({Finding(VerdictKind::kDrop, "b"),
                               Finding(VerdictKind::kDrop, "f")},
                              0);
  EXPECT_EQ(out.actions.size(), 2u);
  EXPECT_EQ(out.suppressed.size(), 1u);
}

TEST(ResponseEngineTest, UnmatchedFindingRaisesDefaultAlarm) {
  ResponseEngine engine(*ParsePolicies(kPolicies));
  Verdict benign;
  ResponseOutcome out = engine.MatchAndExecute(
      {Finding(VerdictKind::kDelay, "x"), Finding(VerdictKind::kDelay, "x"), benign},
      0);
  ASSERT_EQ(out.actions.size(), 1u);
  EXPECT_EQ(out.actions[0].policy_id, std::string(kDefaultPolicyId));
  EXPECT_EQ(out.actions[0].action, ResponseAction::kAlarm);
  EXPECT_EQ(out.actions[0].expiry, 60 * kSecond);
}

TEST(ResponseEngineTest, WildcardTargetsAndConflicts) {
  auto policies = ParsePolicies(
      "<policies>"
      "<policy id=\"I\"><subject>Controller</subject><action>Isolate(FD(*))</action>"
      "<condition>kind=misroute</condition><validity>5</validity></policy>"
      "<policy id=\"T\"><subject>Controller</subject><action>Test_Again(FD(*))</action>"
      "<action>Block_Messages(FD(*))</action><validity>5</validity></policy>"
      "</policies>");
  ASSERT_TRUE(policies.ok()) << policies.status();
  ResponseEngine engine(*policies);
  ResponseOutcome out =
      engine.MatchAndExecute({Finding(VerdictKind::kMisroute, "q")}, 0);
  ASSERT_EQ(out.actions.size(), 3u);
  for (const ActionRequest& r : out.actions) EXPECT_EQ(r.target, DeviceId("q"));
  EXPECT_FALSE(out.actions[0].notes.empty());  // Isolate vs Block_Messages
  out = engine.MatchAndExecute({Finding(VerdictKind::kDrop, "q")}, 0);
  EXPECT_EQ(out.actions.size(), 2u);  // only T
}

TEST(ApplyToNetworkTest, CarriesOutEachAction) {
  const NetworkState state = sim::Figure1Topology();
  AlarmLog alarms;
  std::vector<ScheduledReprobe> reprobes;
  ResponseContext ctx;
  ctx.alarms = &alarms;
  ctx.reprobes = &reprobes;
  ActionRequest r;
  r.target = DeviceId("f");
  r.expiry = 100;
  r.policy_id = "P";

  r.action = ResponseAction::kIsolate;
  auto next = ApplyToNetwork(r, state, 0, ctx);
  ASSERT_TRUE(next.ok());
  EXPECT_TRUE(next->Neighbors(DeviceId("f")).empty());
  EXPECT_FALSE(state.Neighbors(DeviceId("f")).empty());

  r.action = ResponseAction::kBlockMessages;
  next = ApplyToNetwork(r, state, 0, ctx);
  ASSERT_TRUE(next.ok());
  EXPECT_TRUE(next->controller().blocked_devices.contains(DeviceId("f")));

  r.action = ResponseAction::kUpdateForwardingTable;
  EXPECT_EQ(ApplyToNetwork(r, state, 0, ctx).status().code(),
            absl::StatusCode::kFailedPrecondition);
  ctx.replacement_rules[DeviceId("f")] = {};
  next = ApplyToNetwork(r, state, 0, ctx);
  ASSERT_TRUE(next.ok());
  EXPECT_TRUE(next->FindDevice(DeviceId("f"))->flow_table.empty());

  r.action = ResponseAction::kAlarm;
  ASSERT_TRUE(ApplyToNetwork(r, state, 7, ctx).ok());
  EXPECT_EQ(alarms.size(), 1u);
  EXPECT_NE(alarms.Lines()[0].find("t=7"), std::string::npos);

  r.action = ResponseAction::kTestAgain;
  ASSERT_TRUE(ApplyToNetwork(r, state, 0, ctx).ok());
  ASSERT_EQ(reprobes.size(), 1u);
  EXPECT_EQ(reprobes[0].at, ctx.reprobe_interval);

  EXPECT_EQ(ApplyToNetwork(r, state, 100, ctx).status().code(),
            absl::StatusCode::kFailedPrecondition);
  r.target = DeviceId("nowhere");
  EXPECT_EQ(ApplyToNetwork(r, state, 0, ctx).status().code(),
            absl::StatusCode::kNotFound);
}

TEST(CheckRecoveryTest, AllBenignRecovers) {
  ActionRequest r;
  r.target = DeviceId("f");
  r.policy_id = "P";
  Verdict ok;
  ok.label = 5;
  EXPECT_FALSE(CheckRecovery(r, {}, 0).has_value());
  EXPECT_FALSE(CheckRecovery(r, {ok, Finding(VerdictKind::kDrop, "f")}, 0).has_value());
  auto rec = CheckRecovery(r, {ok}, 9);
  ASSERT_TRUE(rec.has_value());
  EXPECT_EQ(rec->device, DeviceId("f"));
  EXPECT_EQ(rec->at, 9);
  EXPECT_EQ(rec->label, 5u);
}

}  // namespace
}  // namespace wedgetail
