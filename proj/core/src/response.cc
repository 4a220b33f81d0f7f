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

#include <algorithm>
#include <cctype>
#include <functional>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "absl/strings/ascii.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"

namespace wedgetail {
namespace {

namespace pt = boost::property_tree;

constexpr std::pair<ResponseAction, absl::string_view> kActionNames[] = {
    {ResponseAction::kIsolate, "Isolate"},
    {ResponseAction::kUpdateForwardingTable, "Update_forwarding_table"},
    {ResponseAction::kAlarm, "Alarm"},
    {ResponseAction::kBlockMessages, "Block_Messages"},
    {ResponseAction::kTestAgain, "Test_Again"},
};

// "Name(arg)" -> {Name, arg}; "Name" -> {Name, ""}.
absl::StatusOr<std::pair<std::string, std::string>> SplitCall(
    absl::string_view text) {
  text = absl::StripAsciiWhitespace(text);
  const size_t open = text.find('(');
  if (open == absl::string_view::npos) {
    return std::make_pair(std::string(text), std::string());
  }
  if (text.back() != ')') {
    return absl::InvalidArgumentError(
        absl::StrCat("unbalanced parentheses in '", text, "'"));
  }
  return std::make_pair(
      std::string(absl::StripAsciiWhitespace(text.substr(0, open))),
      std::string(absl::StripAsciiWhitespace(
          text.substr(open + 1, text.size() - open - 2))));
}

// FD(x) or ForwardingDevice(x) -> x.
absl::StatusOr<std::string> ParseDeviceRef(absl::string_view text) {
  auto call = SplitCall(text);
  if (!call.ok()) return call.status();
  if ((call->first != "FD" && call->first != "ForwardingDevice") ||
      call->second.empty()) {
    return absl::InvalidArgumentError(
        absl::StrCat("expected FD(id), got '", text, "'"));
  }
  return call->second;
}

absl::Status AtPath(const std::string& path, const absl::Status& s) {
  return absl::InvalidArgumentError(absl::StrCat(path, ": ", s.message()));
}

absl::StatusOr<PolicySubject> ParseSubject(absl::string_view text) {
  PolicySubject s;
  if (absl::StripAsciiWhitespace(text) == "Controller") {
    s.controller = true;
    return s;
  }
  auto dev = ParseDeviceRef(text);
  if (!dev.ok()) return dev.status();
  s.device = DeviceId(*dev);
  return s;
}

absl::StatusOr<PolicyObject> ParseObject(absl::string_view text) {
  auto call = SplitCall(text);
  if (!call.ok()) return call.status();
  PolicyObject o;
  if (call->first == "Switch") {
    o.kind = PolicyObject::Kind::kSwitch;
  } else if (call->first == "Flow") {
    o.kind = PolicyObject::Kind::kFlow;
  } else if (call->first == "Packet") {
    o.kind = PolicyObject::Kind::kPacket;
  } else {
    return absl::InvalidArgumentError(
        absl::StrCat("unknown object '", call->first, "'"));
  }
  if (call->second.empty()) {
    return absl::InvalidArgumentError(
        absl::StrCat("object '", text, "' needs an id"));
  }
  o.id = call->second;
  return o;
}

absl::StatusOr<PolicyActionSpec> ParseAction(absl::string_view text) {
  auto call = SplitCall(text);
  if (!call.ok()) return call.status();
  auto kind = ParseResponseAction(call->first);
  if (!kind.ok()) return kind.status();
  PolicyActionSpec a;
  a.action = *kind;
  if (a.action == ResponseAction::kAlarm) {
    if (!call->second.empty()) {
      return absl::InvalidArgumentError("Alarm takes no argument");
    }
    return a;
  }
  auto dev = ParseDeviceRef(call->second);
  if (!dev.ok()) return dev.status();
  a.device = *dev;
  return a;
}

absl::StatusOr<PolicyCondition> ParseCondition(absl::string_view text) {
  PolicyCondition c;
  for (absl::string_view term : absl::StrSplit(text, " AND ")) {
    term = absl::StripAsciiWhitespace(term);
    if (term.empty()) continue;
    std::pair<std::string, std::string> kv = absl::StrSplit(term, '=');
    const std::string key(absl::StripAsciiWhitespace(kv.first));
    const std::string value(absl::StripAsciiWhitespace(kv.second));
    if (value.empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("condition term '", term, "' has no value"));
    }
    if (key == "kind") {
      auto k = ParseVerdictKind(value);
      if (!k.ok()) return k.status();
      c.kind = *k;
    } else if (key == "device") {
      c.device = value;
    } else if (key == "port") {
      PortId p;
      if (!absl::SimpleAtoi(value, &p)) {
        return absl::InvalidArgumentError(
            absl::StrCat("bad port '", value, "'"));
      }
      c.port = p;
    } else {
      return absl::InvalidArgumentError(
          absl::StrCat("unknown condition key '", key, "'"));
    }
  }
  return c;
}

bool Names(const Verdict& v, absl::string_view device) {
  return std::any_of(v.malicious_devices.begin(), v.malicious_devices.end(),
                     [&](const DeviceId& d) { return d.str() == device; });
}

// Devices an action spec resolves to for a verdict.
std::vector<DeviceId> Targets(const PolicyActionSpec& a, const Verdict& v) {
  if (a.action == ResponseAction::kAlarm) {
    if (v.malicious_devices.empty()) return {DeviceId()};
    return v.malicious_devices;
  }
  if (a.device == "*") return v.malicious_devices;
  return {DeviceId(a.device)};
}

bool Disruptive(ResponseAction a) {
  return a == ResponseAction::kIsolate ||
         a == ResponseAction::kUpdateForwardingTable ||
         a == ResponseAction::kBlockMessages;
}

}  // namespace

absl::string_view ResponseActionName(ResponseAction action) {
  for (const auto& [a, name] : kActionNames) {
    if (a == action) return name;
  }
  return "?";
}

absl::StatusOr<ResponseAction> ParseResponseAction(absl::string_view name) {
  for (const auto& [a, n] : kActionNames) {
    if (n == name) return a;
  }
  return absl::InvalidArgumentError(absl::StrCat("unknown action '", name, "'"));
}

std::string PolicySubject::ToString() const {
  return controller ? "Controller" : absl::StrCat("FD(", device.str(), ")");
}

bool PolicyObject::Matches(const Verdict& v) const {
  switch (kind) {
    case Kind::kSwitch:
      return Names(v, id);
    case Kind::kFlow:
      return v.peer.str() == id;
    case Kind::kPacket:
      return absl::StrCat(v.label) == id;
  }
  return false;
}

std::string PolicyObject::ToString() const {
  switch (kind) {
    case Kind::kSwitch:
      return absl::StrCat("Switch(", id, ")");
    case Kind::kFlow:
      return absl::StrCat("Flow(", id, ")");
    case Kind::kPacket:
      return absl::StrCat("Packet(", id, ")");
  }
  return "";
}

std::string PolicyActionSpec::ToString() const {
  if (action == ResponseAction::kAlarm) return "Alarm";
  return absl::StrCat(ResponseActionName(action), "(FD(", device, "))");
}

bool PolicyCondition::Matches(const Verdict& v) const {
  if (kind && *kind != v.kind) return false;
  if (port && *port != v.port) return false;
  if (device) {
    if (*device == "*") return !v.malicious_devices.empty();
    return Names(v, *device);
  }
  return true;
}

std::string PolicyCondition::ToString() const {
  std::vector<std::string> terms;
  if (kind) terms.push_back(absl::StrCat("kind=", VerdictKindName(*kind)));
  if (device) terms.push_back(absl::StrCat("device=", *device));
  if (port) terms.push_back(absl::StrCat("port=", *port));
  return absl::StrJoin(terms, " AND ");
}

bool ResponsePolicy::Matches(const Verdict& v) const {
  if (v.kind == VerdictKind::kBenign) return false;
  if (!condition.Matches(v)) return false;
  if (objects.empty()) return true;
  return std::any_of(objects.begin(), objects.end(),
                     [&](const PolicyObject& o) { return o.Matches(v); });
}

bool NaturalLess(absl::string_view a, absl::string_view b) {
  size_t i = 0;
  size_t j = 0;
  while (i < a.size() && j < b.size()) {
    if (std::isdigit(static_cast<unsigned char>(a[i])) &&
        std::isdigit(static_cast<unsigned char>(b[j]))) {
      size_t ie = i;
      size_t je = j;
      while (ie < a.size() && std::isdigit(static_cast<unsigned char>(a[ie]))) {
        ++ie;
      }
      while (je < b.size() && std::isdigit(static_cast<unsigned char>(b[je]))) {
        ++je;
      }
      absl::string_view na = a.substr(i, ie - i);
      absl::string_view nb = b.substr(j, je - j);
      while (na.size() > 1 && na.front() == '0') na.remove_prefix(1);
      while (nb.size() > 1 && nb.front() == '0') nb.remove_prefix(1);
      if (na.size() != nb.size()) return na.size() < nb.size();
      if (na != nb) return na < nb;
      i = ie;
      j = je;
      continue;
    }
    if (a[i] != b[j]) return a[i] < b[j];
    ++i;
    ++j;
  }
  if (a.size() - i != b.size() - j) return a.size() - i < b.size() - j;
  return a < b;
}

absl::StatusOr<std::vector<ResponsePolicy>> ParsePolicies(
    absl::string_view xml) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(xml)};
    pt::read_xml(in, tree, pt::xml_parser::trim_whitespace);
  } catch (const pt::xml_parser_error& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed policy XML: ", e.what()));
  }
  std::vector<ResponsePolicy> out;
  if (tree.empty()) return out;
  if (tree.size() != 1 || tree.begin()->first != "policies") {
    return absl::InvalidArgumentError(
        "policy document must have a single <policies> root");
  }
  int index = 0;
  std::set<std::string> ids;
  for (const auto& [tag, node] : tree.begin()->second) {
    if (tag == "<xmlattr>" || tag == "<xmlcomment>") continue;
    ++index;
    const std::string path = absl::StrCat("policies.policy[", index, "]");
    if (tag != "policy") {
      return absl::InvalidArgumentError(
          absl::StrCat("policies.", tag, ": unexpected element"));
    }
    ResponsePolicy p;
    p.id = node.get<std::string>("<xmlattr>.id", "");
    if (p.id.empty()) {
      return absl::InvalidArgumentError(absl::StrCat(path, ": missing id"));
    }
    if (!ids.insert(p.id).second) {
      return absl::InvalidArgumentError(
          absl::StrCat(path, ": duplicate policy id '", p.id, "'"));
    }
    int subjects = 0;
    bool has_condition = false;
    bool has_validity = false;
    for (const auto& [field, child] : node) {
      const std::string fpath = absl::StrCat(path, ".", field);
      const std::string text = child.data();
      if (field == "<xmlattr>" || field == "<xmlcomment>") continue;
      if (field == "subject") {
        if (++subjects > 1) {
          return absl::InvalidArgumentError(
              absl::StrCat(fpath, ": a policy may have only one subject"));
        }
        auto s = ParseSubject(text);
        if (!s.ok()) return AtPath(fpath, s.status());
        p.subject = *s;
      } else if (field == "object") {
        auto o = ParseObject(text);
        if (!o.ok()) return AtPath(fpath, o.status());
        p.objects.push_back(*o);
      } else if (field == "action") {
        auto a = ParseAction(text);
        if (!a.ok()) return AtPath(fpath, a.status());
        p.actions.push_back(*a);
      } else if (field == "condition") {
        if (has_condition) {
          return absl::InvalidArgumentError(
              absl::StrCat(fpath, ": more than one condition"));
        }
        has_condition = true;
        auto c = ParseCondition(text);
        if (!c.ok()) return AtPath(fpath, c.status());
        p.condition = *c;
      } else if (field == "exception") {
        const std::string ref(absl::StripAsciiWhitespace(text));
        if (ref.empty()) {
          return absl::InvalidArgumentError(
              absl::StrCat(fpath, ": empty exception"));
        }
        p.exceptions.push_back(ref);
      } else if (field == "validity") {
        if (has_validity) {
          return absl::InvalidArgumentError(
              absl::StrCat(fpath, ": more than one validity"));
        }
        has_validity = true;
        if (!absl::SimpleAtoi(absl::StripAsciiWhitespace(text),
                              &p.validity_ms) ||
            p.validity_ms <= 0) {
          return absl::InvalidArgumentError(absl::StrCat(
              fpath, ": validity must be a positive number of ms, got '", text,
              "'"));
        }
      } else {
        return absl::InvalidArgumentError(
            absl::StrCat(fpath, ": unexpected element"));
      }
    }
    if (subjects == 0) {
      return absl::InvalidArgumentError(
          absl::StrCat(path, ".subject: missing"));
    }
    if (p.actions.empty()) {
      return absl::InvalidArgumentError(absl::StrCat(path, ".action: missing"));
    }
    if (!has_validity) {
      return absl::InvalidArgumentError(
          absl::StrCat(path, ".validity: missing"));
    }
    out.push_back(std::move(p));
  }

  std::map<std::string, const ResponsePolicy*> by_id;
  for (const ResponsePolicy& p : out) by_id[p.id] = &p;
  for (size_t i = 0; i < out.size(); ++i) {
    for (const std::string& e : out[i].exceptions) {
      if (!by_id.contains(e)) {
        return absl::InvalidArgumentError(
            absl::StrCat("policies.policy[", i + 1,
                         "].exception: unknown policy '", e, "'"));
      }
    }
  }
  // 0 unvisited, 1 on stack, 2 done.
  std::map<std::string, int> mark;
  std::vector<std::string> stack;
  std::function<absl::Status(const ResponsePolicy&)> visit =
      [&](const ResponsePolicy& p) -> absl::Status {
    int& m = mark[p.id];
    if (m == 2) return absl::OkStatus();
    if (m == 1) {
      auto from = std::find(stack.begin(), stack.end(), p.id);
      std::vector<std::string> cycle(from, stack.end());
      cycle.push_back(p.id);
      return absl::InvalidArgumentError(absl::StrCat(
          "policies: exception cycle ", absl::StrJoin(cycle, " -> ")));
    }
    m = 1;
    stack.push_back(p.id);
    for (const std::string& e : p.exceptions) {
      if (absl::Status s = visit(*by_id.at(e)); !s.ok()) return s;
    }
    stack.pop_back();
    mark[p.id] = 2;
    return absl::OkStatus();
  };
  for (const ResponsePolicy& p : out) {
    if (absl::Status s = visit(p); !s.ok()) return s;
  }
  return out;
}

std::string PoliciesToXml(const std::vector<ResponsePolicy>& policies) {
  pt::ptree root;
  pt::ptree& list = root.add_child("policies", pt::ptree());
  for (const ResponsePolicy& p : policies) {
    pt::ptree node;
    node.put("<xmlattr>.id", p.id);
    node.add("subject", p.subject.ToString());
    for (const PolicyObject& o : p.objects) node.add("object", o.ToString());
    for (const PolicyActionSpec& a : p.actions) node.add("action", a.ToString());
    const std::string cond = p.condition.ToString();
    if (!cond.empty()) node.add("condition", cond);
    for (const std::string& e : p.exceptions) node.add("exception", e);
    node.add("validity", p.validity_ms);
    list.add_child("policy", node);
  }
  std::ostringstream out;
  pt::write_xml(out, root, pt::xml_writer_make_settings<std::string>(' ', 2));
  return out.str();
}

std::string ActionRequest::ToString() const {
  std::string s = absl::StrCat(ResponseActionName(action));
  if (!target.empty()) absl::StrAppend(&s, "(FD(", target.str(), "))");
  absl::StrAppend(&s, " by ", subject, " [", policy_id, "]");
  return s;
}

ResponseEngine::ResponseEngine(std::vector<ResponsePolicy> policies,
                               int64_t default_validity_ms)
    : policies_(std::move(policies)),
      default_validity_ms_(default_validity_ms) {
  std::stable_sort(policies_.begin(), policies_.end(),
                   [](const ResponsePolicy& a, const ResponsePolicy& b) {
                     return NaturalLess(a.id, b.id);
                   });
}

bool ResponseEngine::Active(absl::string_view policy_id, Nanos now) const {
  auto it = active_until_.find(std::string(policy_id));
  return it != active_until_.end() && it->second > now;
}

ResponseOutcome ResponseEngine::MatchAndExecute(
    const std::vector<Verdict>& verdicts, Nanos now) {
  for (auto it = active_until_.begin(); it != active_until_.end();) {
    it = it->second <= now ? active_until_.erase(it) : std::next(it);
  }

  // matches[i] lists the verdicts policy i matches.
  std::vector<std::vector<size_t>> matches(policies_.size());
  std::set<std::string> matched_now;
  for (size_t i = 0; i < policies_.size(); ++i) {
    for (size_t v = 0; v < verdicts.size(); ++v) {
      if (policies_[i].Matches(verdicts[v])) matches[i].push_back(v);
    }
    if (!matches[i].empty()) matched_now.insert(policies_[i].id);
  }
  auto active = [&](const std::string& id) {
    return matched_now.contains(id) || Active(id, now);
  };

  ResponseOutcome out;
  std::vector<bool> handled(verdicts.size(), false);
  std::set<std::tuple<std::string, ResponseAction, DeviceId>> issued;
  for (size_t i = 0; i < policies_.size(); ++i) {
    const ResponsePolicy& p = policies_[i];
    if (matches[i].empty()) continue;
    std::string blocker;
    for (const std::string& e : p.exceptions) {
      if (active(e)) {
        blocker = e;
        break;
      }
    }
    for (size_t v : matches[i]) handled[v] = true;
    if (!blocker.empty()) {
      for (size_t v : matches[i]) {
        out.suppressed.push_back({p.id, blocker, verdicts[v]});
      }
      continue;
    }
    const Nanos expiry = now + p.validity_ms * 1'000'000;
    active_until_[p.id] = std::max(active_until_[p.id], expiry);
    for (size_t v : matches[i]) {
      for (const PolicyActionSpec& a : p.actions) {
        for (const DeviceId& target : Targets(a, verdicts[v])) {
          if (!issued.insert({p.id, a.action, target}).second) continue;
          ActionRequest r;
          r.action = a.action;
          r.target = target;
          r.policy_id = p.id;
          r.subject = p.subject.ToString();
          r.issued_at = now;
          r.expiry = expiry;
          r.trigger = verdicts[v];
          out.actions.push_back(std::move(r));
        }
      }
    }
  }

  for (size_t v = 0; v < verdicts.size(); ++v) {
    if (handled[v] || verdicts[v].kind == VerdictKind::kBenign) continue;
    PolicyActionSpec alarm;
    for (const DeviceId& target : Targets(alarm, verdicts[v])) {
      if (!issued.insert({std::string(kDefaultPolicyId),
                          ResponseAction::kAlarm, target})
               .second) {
        continue;
      }
      ActionRequest r;
      r.action = ResponseAction::kAlarm;
      r.target = target;
      r.policy_id = std::string(kDefaultPolicyId);
      r.subject = "Controller";
      r.issued_at = now;
      r.expiry = now + default_validity_ms_ * 1'000'000;
      r.trigger = verdicts[v];
      r.notes.push_back("no policy matched");
      out.actions.push_back(std::move(r));
    }
  }

  // Different disruptive actions on one device are all kept, in policy
  // order; flag them.
  std::map<DeviceId, std::vector<size_t>> per_device;
  for (size_t i = 0; i < out.actions.size(); ++i) {
    if (Disruptive(out.actions[i].action) && !out.actions[i].target.empty()) {
      per_device[out.actions[i].target].push_back(i);
    }
  }
  for (const auto& [device, idx] : per_device) {
    for (size_t i : idx) {
      for (size_t j : idx) {
        if (out.actions[i].action == out.actions[j].action) continue;
        out.actions[i].notes.push_back(absl::StrCat(
            "conflicts with ", ResponseActionName(out.actions[j].action),
            " from ", out.actions[j].policy_id));
      }
    }
  }
  return out;
}

void AlarmLog::Append(const ActionRequest& request, Nanos at) {
  const Verdict& v = request.trigger;
  std::vector<std::string> devices;
  for (const DeviceId& d : v.malicious_devices) devices.push_back(d.str());
  std::string line = absl::StrCat(
      "t=", at, "\tpolicy=", request.policy_id, "\tdevice=",
      request.target.empty() ? "-" : request.target.str(),
      "\tkind=", VerdictKindName(v.kind), "\tflow=", v.target.str(), "->",
      v.peer.str(), "\tmalicious=", absl::StrJoin(devices, ","));
  for (const std::string& n : request.notes) absl::StrAppend(&line, "\tnote=", n);
  std::lock_guard<std::mutex> lock(mu_);
  lines_.push_back(std::move(line));
}

std::vector<std::string> AlarmLog::Lines() const {
  std::lock_guard<std::mutex> lock(mu_);
  return lines_;
}

size_t AlarmLog::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return lines_.size();
}

absl::StatusOr<NetworkState> ApplyToNetwork(const ActionRequest& request,
                                            const NetworkState& state,
                                            Nanos now, ResponseContext& ctx) {
  if (now >= request.expiry) {
    return absl::FailedPreconditionError(absl::StrCat(
        request.ToString(), " expired at ", request.expiry, ", now ", now));
  }
  if (request.action != ResponseAction::kAlarm &&
      state.FindDevice(request.target) == nullptr) {
    return absl::NotFoundError(
        absl::StrCat("unknown device '", request.target.str(), "'"));
  }
  NetworkState next = state;
  switch (request.action) {
    case ResponseAction::kIsolate:
      if (absl::Status s = next.RemoveLinksOf(request.target); !s.ok()) {
        return s;
      }
      break;
    case ResponseAction::kUpdateForwardingTable: {
      auto it = ctx.replacement_rules.find(request.target);
      if (it == ctx.replacement_rules.end()) {
        return absl::FailedPreconditionError(absl::StrCat(
            "no replacement rules for ", request.target.str()));
      }
      if (absl::Status s = next.ReplaceFlowTable(request.target, it->second);
          !s.ok()) {
        return s;
      }
      break;
    }
    case ResponseAction::kBlockMessages:
      next.mutable_controller().blocked_devices.insert(request.target);
      break;
    case ResponseAction::kAlarm:
      if (ctx.alarms != nullptr) ctx.alarms->Append(request, now);
      break;
    case ResponseAction::kTestAgain:
      if (ctx.reprobes != nullptr) {
        ctx.reprobes->push_back({request, now + ctx.reprobe_interval});
      }
      break;
  }
  return next;
}

std::optional<RecoveryRecord> CheckRecovery(
    const ActionRequest& request, const std::vector<Verdict>& reprobe_verdicts,
    Nanos now) {
  if (reprobe_verdicts.empty()) return std::nullopt;
  for (const Verdict& v : reprobe_verdicts) {
    if (v.kind != VerdictKind::kBenign) return std::nullopt;
  }
  return RecoveryRecord{request.target, request.policy_id, now,
                        reprobe_verdicts.front().label};
}

}  // namespace wedgetail
