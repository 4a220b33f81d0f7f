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

// Administrator policies and the engine that turns verdicts into controller
// actions.
//
// Policy file:
//
//   <policies>
//     <policy id="P1">
//       <subject>FD(g)</subject>
//       <object>Switch(f)</object>
//       <action>Update_forwarding_table(FD(g))</action>
//       <condition>kind=drop AND device=f</condition>
//       <exception>P0</exception>
//       <validity>60000</validity>
//     </policy>
//   </policies>
//
// FD(*) in an action or device=* in a condition stands for the device named
// by the verdict.

#ifndef WEDGETAIL_RESPONSE_H_
#define WEDGETAIL_RESPONSE_H_

#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "wedgetail/detection.h"
#include "wedgetail/net_model.h"

namespace wedgetail {

enum class ResponseAction {
  kIsolate,
  kUpdateForwardingTable,
  kAlarm,
  kBlockMessages,
  kTestAgain,
};

absl::string_view ResponseActionName(ResponseAction action);
absl::StatusOr<ResponseAction> ParseResponseAction(absl::string_view name);

struct PolicySubject {
  bool controller = false;
  DeviceId device;  // unset for the controller

  std::string ToString() const;
};

struct PolicyObject {
  enum class Kind { kSwitch, kFlow, kPacket };
  Kind kind = Kind::kSwitch;
  // Device id for Switch, destination device for Flow, label for Packet.
  std::string id;

  bool Matches(const Verdict& v) const;
  std::string ToString() const;
};

struct PolicyActionSpec {
  ResponseAction action = ResponseAction::kAlarm;
  // Empty for Alarm. "*" is the device named by the verdict.
  std::string device;

  std::string ToString() const;
};

// Conjunction of equality tests. Unset fields match anything.
struct PolicyCondition {
  std::optional<VerdictKind> kind;
  std::optional<std::string> device;  // "*" is any malicious device
  std::optional<PortId> port;

  bool Matches(const Verdict& v) const;
  std::string ToString() const;
};

struct ResponsePolicy {
  std::string id;
  PolicySubject subject;
  // Any one must match; empty matches every verdict.
  std::vector<PolicyObject> objects;
  std::vector<PolicyActionSpec> actions;
  PolicyCondition condition;
  std::vector<std::string> exceptions;
  int64_t validity_ms = 0;

  // Non-benign verdicts only.
  bool Matches(const Verdict& v) const;
};

// Validates ids, exception references and acyclicity. Errors name the
// offending element, e.g. "policies.policy[2].subject".
absl::StatusOr<std::vector<ResponsePolicy>> ParsePolicies(absl::string_view xml);
std::string PoliciesToXml(const std::vector<ResponsePolicy>& policies);

// "P2" < "P10".
bool NaturalLess(absl::string_view a, absl::string_view b);

inline constexpr absl::string_view kDefaultPolicyId = "default";

struct ActionRequest {
  ResponseAction action = ResponseAction::kAlarm;
  DeviceId target;  // unset for alarms without a device
  std::string policy_id;
  std::string subject;
  Nanos issued_at = 0;
  Nanos expiry = 0;  // issued_at + validity
  // The verdict that triggered the request; Test_Again re-sends its packet.
  Verdict trigger;
  std::vector<std::string> notes;

  std::string ToString() const;
};

struct Suppression {
  std::string policy_id;
  std::string because_of;  // active exception policy
  Verdict verdict;
};

struct ResponseOutcome {
  std::vector<ActionRequest> actions;
  std::vector<Suppression> suppressed;
};

class ResponseEngine {
 public:
  explicit ResponseEngine(std::vector<ResponsePolicy> policies,
                          int64_t default_validity_ms = 60'000);

  // Runs once per completed sweep. Deterministic for equal inputs and
  // equal engine history.
  ResponseOutcome MatchAndExecute(const std::vector<Verdict>& verdicts,
                                  Nanos now);

  bool Active(absl::string_view policy_id, Nanos now) const;
  const std::vector<ResponsePolicy>& policies() const { return policies_; }

 private:
  std::vector<ResponsePolicy> policies_;
  int64_t default_validity_ms_;
  // Policy id -> expiry of its latest activation.
  std::map<std::string, Nanos> active_until_;
};

// Append-only, safe for concurrent readers.
class AlarmLog {
 public:
  void Append(const ActionRequest& request, Nanos at);
  std::vector<std::string> Lines() const;
  size_t size() const;

 private:
  mutable std::mutex mu_;
  std::vector<std::string> lines_;
};

struct ScheduledReprobe {
  ActionRequest request;
  Nanos at = 0;
};

// What the simulated controller needs besides the request itself.
struct ResponseContext {
  // Replacement flow tables for Update_forwarding_table, by device.
  std::map<DeviceId, std::vector<FlowRule>> replacement_rules;
  AlarmLog* alarms = nullptr;
  std::vector<ScheduledReprobe>* reprobes = nullptr;
  Nanos reprobe_interval = 1'000'000'000;
};

// Returns the state after the controller carries out `request` at `now`.
absl::StatusOr<NetworkState> ApplyToNetwork(const ActionRequest& request,
                                            const NetworkState& state,
                                            Nanos now, ResponseContext& ctx);

struct RecoveryRecord {
  DeviceId device;
  std::string policy_id;
  Nanos at = 0;
  PacketLabel label = 0;
};

// A Test_Again re-probe came back clean.
std::optional<RecoveryRecord> CheckRecovery(
    const ActionRequest& request, const std::vector<Verdict>& reprobe_verdicts,
    Nanos now);

}  // namespace wedgetail

#endif  // WEDGETAIL_RESPONSE_H_
