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


// Acceptance run. Prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "wedgetail/detection.h"
#include "wedgetail/oracle/concrete_forwarding.h"
#include "wedgetail/response.h"
#include "wedgetail/sim/config.h"
#include "wedgetail/sim/experiment.h"
#include "wedgetail/sim/rules_gen.h"
#include "wedgetail/sim/simulator.h"
#include "wedgetail/sim/topologies.h"
#include "wedgetail/target_id.h"

namespace wt = wedgetail;
namespace sim = wedgetail::sim;

namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void Report(int id, const char* name, const Outcome& o) {
  std::printf("[%s] %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name,
              o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

Outcome Error(const absl::Status& s) { return {false, s.ToString()}; }

// 50 single-implant trials on AARNet with the default action mix, one sweep.
absl::StatusOr<sim::ExperimentResult> Aarnet50() {
  sim::ExperimentConfig c;
  c.topology = "aarnet";
  c.seed = 2026;
  c.implants = 1;
  c.trials = 50;
  c.sweeps = 1;
  return sim::RunExperiment(c);
}

Outcome Completeness(const absl::StatusOr<sim::ExperimentResult>& r,
                     double elapsed) {
  if (!r.ok()) return Error(r.status());
  const sim::MetricsReport& m = r->report;
  const bool pass = m.triggered > 0 && m.detected == m.triggered &&
                    elapsed < 60.0;
  return {pass, absl::StrFormat(
                    "%d/%d probe-reachable implants detected in one sweep "
                    "(%d implanted), %.1f s (limit 60 s)",
                    m.detected, m.triggered, m.implants, elapsed)};
}

Outcome Classification() {
  // Per action: single-implant trials on AARNet with only that action.
  const std::vector<std::pair<const char*, sim::AttackMix>> mixes = {
      {"replay", {1, 0, 0, 0, 0}},   {"drop", {0, 1, 0, 0, 0}},
      {"misroute", {0, 0, 1, 0, 0}}, {"generate", {0, 0, 0, 1, 0}},
      {"delay", {0, 0, 0, 0, 1}}};
  bool pass = true;
  std::vector<std::string> parts;
  uint64_t seed = 100;
  for (const auto& [name, mix] : mixes) {
    sim::ExperimentConfig c;
    c.topology = "aarnet";
    c.seed = seed++;
    c.implants = 1;
    c.trials = 40;
    c.attack_mix = mix;
    auto r = sim::RunExperiment(c);
    if (!r.ok()) return Error(r.status());
    const int matched = r->report.kind_matches;
    const int total = r->report.triggered;
    const double rate = total ? static_cast<double>(matched) / total : 0;
    if (total == 0 || rate < 0.95) pass = false;
    parts.push_back(absl::StrFormat("%s %d/%d", name, matched, total));
  }
  return {pass, absl::StrCat(absl::StrJoin(parts, ", "), " (floor 95% each)")};
}

Outcome Localization(const absl::StatusOr<sim::ExperimentResult>& r) {
  if (!r.ok()) return Error(r.status());
  // Worked example: E = a b c d e, A = a b f e.
  wt::TrajectoryPair p;
  p.source = wt::DeviceId("a");
  p.destination = wt::DeviceId("e");
  auto ids = [](std::initializer_list<const char*> n) {
    std::vector<wt::DeviceId> out;
    for (const char* s : n) out.emplace_back(s);
    return out;
  };
  p.expected = {ids({"a", "b", "c", "d", "e"})};
  p.actual = {wt::ActualWalk::Of(ids({"a", "b", "f", "e"}))};
  const wt::Verdict v = wt::Judge(p);
  const bool example = v.kind == wt::VerdictKind::kMisroute &&
                       v.malicious_devices == ids({"b"});
  const sim::MetricsReport& m = r->report;
  const bool pass = example && m.detected > 0 && m.localized == m.detected;
  return {pass, absl::StrFormat(
                    "%d/%d detected implants localized to exactly their "
                    "device; example A={b,f}, E={b,c,d} -> {%s} (%s)",
                    m.localized, m.detected,
                    v.malicious_devices.empty() ? ""
                                                : v.malicious_devices[0].str(),
                    wt::VerdictKindName(v.kind))};
}

Outcome Soundness() {
  std::vector<std::string> parts;
  bool pass = true;
  for (const char* topo : {"aarnet", "zib54"}) {
    sim::ExperimentConfig c;
    c.topology = topo;
    c.sweeps = 20;
    c.respond = false;
    auto r = sim::RunExperiment(c);
    if (!r.ok()) return Error(r.status());
    const size_t bad = r->verdicts.size();
    if (bad != 0) pass = false;
    parts.push_back(absl::StrFormat("%s %zu non-benign in 20 sweeps", topo, bad));
  }
  return {pass, absl::StrJoin(parts, ", ")};
}

Outcome Congestion() {
  const std::vector<double> rates = {0.005, 0.0075, 0.01, 0.015, 0.02};
  const std::vector<int> windows = {3, 5, 10};
  constexpr int kTolerance = 2;
  bool pass = true;
  int triggered = 0, detected = 0;
  std::vector<std::string> parts;
  for (double rate : rates) {
    std::vector<int> fp, fn;
    for (int w : windows) {
      sim::ExperimentConfig c;
      c.topology = "aarnet";
      c.seed = 7;  // shared across windows
      c.congestion = rate;
      c.flows = 1000;
      c.unit_flows = 100;
      c.calibration_units = w;
      c.implants = 1;
      c.trials = 20;
      c.respond = false;
      auto r = sim::RunExperiment(c);
      if (!r.ok()) return Error(r.status());
      const sim::MetricsReport& m = r->report;
      triggered += m.triggered;
      detected += m.detected;
      fp.push_back(m.false_positives);
      fn.push_back(m.triggered - m.detected);
    }
    for (size_t i = 1; i < windows.size(); ++i) {
      if (fp[i] > fp[i - 1] + kTolerance || fn[i] > fn[i - 1] + kTolerance) {
        pass = false;
      }
    }
    parts.push_back(absl::StrFormat("p=%g FP %d/%d/%d FN %d/%d/%d", rate, fp[0],
                                    fp[1], fp[2], fn[0], fn[1], fn[2]));
  }
  const double accuracy =
      triggered ? static_cast<double>(detected) / triggered : 0;
  if (accuracy < 0.97) pass = false;
  return {pass, absl::StrFormat(
                    "accuracy %.2f%% (%d/%d, floor 97%%); windows 3/5/10: %s "
                    "(non-increasing within +-%d)",
                    100 * accuracy, detected, triggered,
                    absl::StrJoin(parts, "; "), kTolerance)};
}

Outcome OracleEquivalence() {
  const auto start = Clock::now();
  const wt::oracle::EquivalenceReport r =
      wt::oracle::RunEquivalenceSuite(20260101, 300, 8, 12);
  const double elapsed = Seconds(start);
  const bool pass = r.mismatches.empty() && r.networks > 0 && elapsed < 300;
  return {pass, absl::StrFormat(
                    "%d networks (<= 8 devices, <= 12 bits), %d sources, %zu "
                    "mismatches, %.1f s (limit 300 s)%s",
                    r.networks, r.sources, r.mismatches.size(), elapsed,
                    r.mismatches.empty() ? "" : " first: " + r.mismatches[0])};
}

Outcome TargetIdentification() {
  // Figure 2 style topology from simulated benign traffic.
  sim::ExperimentConfig c;
  c.topology = "figure2";
  auto fig2 = sim::RunExperiment(c);
  if (!fig2.ok()) return Error(fig2.status());
  const std::vector<wt::DeviceId>& top = fig2->plan.groups.front().devices;
  const std::set<wt::DeviceId> top_set(top.begin(), top.end());
  bool hubs = true;
  for (const char* h : {"b", "f", "g"}) hubs &= top_set.contains(wt::DeviceId(h));
  const std::vector<wt::DeviceId> order = fig2->plan.Order();
  const std::set<wt::DeviceId> first3(order.begin(), order.begin() + 3);
  hubs &= first3 == std::set<wt::DeviceId>{wt::DeviceId("b"), wt::DeviceId("f"),
                                           wt::DeviceId("g")};

  c.topology = "star6";
  auto star = sim::RunExperiment(c);
  if (!star.ok()) return Error(star.status());
  bool hub_highest = true;
  const double hub = star->plan.scores.at(wt::DeviceId("hub"));
  for (const auto& [d, s] : star->plan.scores) {
    if (d != wt::DeviceId("hub") && s >= hub) hub_highest = false;
  }

  // 54-device corpus of about 5000 trajectories.
  sim::ExperimentConfig z;
  z.topology = "zib54";
  auto net = sim::GenerateNetwork(z);
  if (!net.ok()) return Error(net.status());
  std::mt19937_64 rng(54);
  const auto flows = sim::RandomFlows(net->state, net->rules.prefixes, 5000, 24, rng);
  sim::Simulator simulator(net->state, {});
  const wt::ObservationLog log = simulator.Run(flows);
  const wt::NetworkSnapshot snap = wt::NetworkSnapshot::Capture(net->state);
  const std::vector<wt::Trajectory> corpus = sim::CorpusFromLog(log, net->state);
  const auto start = Clock::now();
  auto plan = wt::BuildScanPlan(corpus, snap, 3);
  const double elapsed = Seconds(start);
  if (!plan.ok()) return Error(plan.status());
  const bool pass = hubs && hub_highest && elapsed < 30;
  return {pass, absl::StrFormat(
                    "figure2 hubs b,f,g lead the top group: %s; star hub "
                    "strictly highest (%.3f): %s; zib54 %zu trajectories "
                    "ranked in %.3f s (limit 30 s)",
                    hubs ? "yes" : "no", hub, hub_highest ? "yes" : "no",
                    corpus.size(), elapsed)};
}

Outcome Response() {
  const char* xml = R"(<policies>
    <policy id="P1"><subject>FD(g)</subject><object>Switch(f)</object>
      <action>Update_forwarding_table(FD(g))</action>
      <condition>device=f</condition><validity>60000</validity></policy>
    <policy id="P2"><subject>Controller</subject><object>Switch(f)</object>
      <action>Block_Messages(FD(f))</action>
      <condition>device=f</condition><validity>60000</validity></policy>
    <policy id="P3"><subject>Controller</subject>
      <action>Isolate(FD(b))</action><condition>device=b</condition>
      <exception>P1</exception><validity>60000</validity></policy>
  </policies>)";
  auto policies = wt::ParsePolicies(xml);
  if (!policies.ok()) return Error(policies.status());
  auto finding = [](const char* d) {
    wt::Verdict v;
    v.kind = wt::VerdictKind::kMisroute;
    v.malicious_devices = {wt::DeviceId(d)};
    v.target = wt::DeviceId("a");
    v.peer = wt::DeviceId("e");
    return v;
  };
  wt::ResponseEngine engine(*policies);
  const wt::ResponseOutcome f = engine.MatchAndExecute({finding("f")}, 0);
  std::vector<std::string> got;
  for (const wt::ActionRequest& a : f.actions) got.push_back(a.ToString());
  const std::vector<std::string> want_f = {
      "Update_forwarding_table(FD(g)) by FD(g) [P1]",
      "Block_Messages(FD(f)) by Controller [P2]"};
  const bool ex1 = got == want_f && f.suppressed.empty();
  const wt::ResponseOutcome b =
      engine.MatchAndExecute({finding("b")}, 1'000'000'000);
  const bool ex2 = b.actions.empty() && b.suppressed.size() == 1 &&
                   b.suppressed[0].policy_id == "P3" &&
                   b.suppressed[0].because_of == "P1";

  // 1000 policies, one sweep's worth of findings.
  std::string big = "<policies>";
  for (int i = 0; i < 1000; ++i) {
    absl::StrAppend(&big, "<policy id=\"Q", i, "\"><subject>Controller</subject>",
                    "<object>Switch(d", i % 54, ")</object>",
                    "<action>Alarm</action><condition>device=d", i % 54,
                    "</condition>", i > 0 ? absl::StrCat("<exception>Q", i - 1,
                                                         "</exception>")
                                          : "",
                    "<validity>1000</validity></policy>");
  }
  absl::StrAppend(&big, "</policies>");
  auto many = wt::ParsePolicies(big);
  if (!many.ok()) return Error(many.status());
  wt::ResponseEngine big_engine(*many);
  std::vector<wt::Verdict> sweep;
  for (int i = 0; i < 54; ++i) {
    sweep.push_back(finding(absl::StrCat("d", i).c_str()));
  }
  const auto start = Clock::now();
  const wt::ResponseOutcome o = big_engine.MatchAndExecute(sweep, 0);
  const double elapsed = Seconds(start);
  const bool pass = ex1 && ex2 && elapsed < 1.0 && !o.actions.empty();
  return {pass, absl::StrFormat(
                    "f only -> {%s}: %s; b while P1 active -> P3 suppressed: "
                    "%s; 1000 policies x %zu findings matched in %.3f s "
                    "(limit 1 s)",
                    absl::StrJoin(got, ", "), ex1 ? "ok" : "wrong",
                    ex2 ? "ok" : "wrong", sweep.size(), elapsed)};
}

Outcome Compound() {
  // 9 of 12 devices compromised at once, every packet in scope.
  sim::ExperimentConfig c;
  c.topology = "aarnet";
  c.seed = 75;
  c.implants = 9;
  c.trials = 5;
  c.sweeps = 1;
  c.scope_mix = {1, 0, 0, 0, 0, 0};
  auto r = sim::RunExperiment(c);
  if (!r.ok()) return Error(r.status());
  const sim::MetricsReport& m = r->report;
  const bool pass = m.implants == 45 && m.detected == m.implants;
  return {pass, absl::StrFormat(
                    "%d trials x 9 implants: %d/%d detected in one sweep "
                    "(%d triggered)",
                    c.trials, m.detected, m.implants, m.triggered)};
}

}  // namespace

int main() {
  auto start = Clock::now();
  const auto aarnet = Aarnet50();
  const double aarnet_s = Seconds(start);
  Report(1, "detection completeness", Completeness(aarnet, aarnet_s));
  Report(2, "classification", Classification());
  Report(3, "localization", Localization(aarnet));
  Report(4, "soundness", Soundness());
  Report(5, "congestion robustness", Congestion());
  Report(6, "oracle equivalence", OracleEquivalence());
  Report(7, "target identification", TargetIdentification());
  Report(8, "response engine", Response());
  Report(9, "compound attacks", Compound());
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
