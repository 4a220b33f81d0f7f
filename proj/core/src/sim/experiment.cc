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

#include "wedgetail/sim/experiment.h"

#include <algorithm>
#include <chrono>
#include <set>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "json.hpp"
#include "wedgetail/expected_trajectories.h"
#include "wedgetail/scanner.h"
#include "wedgetail/sim/topologies.h"

namespace wedgetail::sim {
namespace {

using Clock = std::chrono::steady_clock;

double Since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

// Independent streams from one seed.
uint64_t Stream(uint64_t seed, uint64_t k) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (k + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

template <typename T>
T Pick(const std::vector<T>& options, const std::vector<double>& weights,
       std::mt19937_64& rng) {
  std::discrete_distribution<size_t> dist(weights.begin(), weights.end());
  return options[dist(rng)];
}

std::optional<double> Ratio(int num, int den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / den;
}

nlohmann::json OptionalJson(std::optional<double> v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

bool Names(const Verdict& v, const DeviceId& d) {
  return std::find(v.malicious_devices.begin(), v.malicious_devices.end(),
                   d) != v.malicious_devices.end();
}

}  // namespace

absl::StatusOr<GeneratedNetwork> GenerateNetwork(
    const ExperimentConfig& config) {
  auto state = TopologyByName(config.topology, config.header_bits);
  if (!state.ok()) return state.status();
  RuleGenOptions opts;
  opts.seed = config.rule_seed != 0 ? config.rule_seed : config.seed;
  if (config.prefixes > 0) {
    opts.prefixes = config.prefixes;
  } else if (config.topology == "aarnet") {
    opts.prefixes = 40;
  } else if (config.topology == "zib54") {
    opts.prefixes = 800;
  } else {
    opts.prefixes = 2 * static_cast<int>(state->devices().size());
  }
  auto rules = GenerateRules(*state, opts);
  if (!rules.ok()) return rules.status();
  if (config.topology == "figure1") {
    std::vector<PortId> ports;
    for (const auto& [port, n] : state->Neighbors(DeviceId("c"))) {
      if (n == DeviceId("d") || n == DeviceId("i")) ports.push_back(port);
    }
    if (absl::Status s = GroupRoutesAt(*state, *rules, DeviceId("c"), ports);
        !s.ok()) {
      return s;
    }
  }
  return GeneratedNetwork{*std::move(state), *std::move(rules)};
}

absl::StatusOr<std::vector<AttackImplant>> GenerateImplants(
    const GeneratedNetwork& net, const ExperimentConfig& config, int count,
    std::mt19937_64& rng) {
  const NetworkState& state = net.state;
  std::vector<DeviceId> devices;
  for (const auto& [id, _] : state.devices()) devices.push_back(id);
  if (count > static_cast<int>(devices.size())) {
    return absl::InvalidArgumentError(absl::StrCat(
        count, " implants on distinct devices but only ", devices.size(),
        " devices"));
  }
  std::shuffle(devices.begin(), devices.end(), rng);

  const AttackMix& m = config.attack_mix;
  const std::vector<ImplantAction> actions = {
      ImplantAction::kReplay, ImplantAction::kDrop, ImplantAction::kMisroute,
      ImplantAction::kGenerate, ImplantAction::kDelay};
  const std::vector<double> action_w = {m.replay, m.drop, m.misroute,
                                        m.generate, m.delay};
  const ScopeMix& s = config.scope_mix;
  const std::vector<ImplantScope> scopes = {
      ImplantScope::kAll,    ImplantScope::kIngressSubset,
      ImplantScope::kIngressSampled, ImplantScope::kEgress,
      ImplantScope::kEgressSubset,   ImplantScope::kControllerBound};
  const std::vector<double> scope_w = {s.all,    s.ingress_subset,
                                       s.ingress_sampled, s.egress,
                                       s.egress_subset,   s.controller_bound};
  const int bits = state.header_bits();

  std::vector<AttackImplant> out;
  for (int k = 0; k < count; ++k) {
    AttackImplant a;
    a.id = k + 1;
    a.device = devices[k];
    a.action = Pick(actions, action_w, rng);
    a.scope = Pick(scopes, scope_w, rng);
    const auto neighbors = state.Neighbors(a.device);
    std::vector<PortId> ports = {0};
    for (const auto& [port, _] : neighbors) ports.push_back(port);
    switch (a.scope) {
      case ImplantScope::kIngressSubset:
      case ImplantScope::kEgressSubset:
        a.port = ports[rng() % ports.size()];
        // Packets with the last header bit set.
        a.subset = HeaderPattern::FromMasks(bits, 1, 1);
        break;
      case ImplantScope::kIngressSampled:
        a.port = ports[rng() % ports.size()];
        a.probability = config.sampled_probability;
        break;
      case ImplantScope::kEgress:
        a.port = ports[rng() % ports.size()];
        break;
      default:
        break;
    }
    switch (a.action) {
      case ImplantAction::kReplay:
        if (a.scope == ImplantScope::kControllerBound || neighbors.empty()) {
          a.replay_to = ControllerId();
        } else {
          a.replay_to = neighbors[rng() % neighbors.size()].second;
        }
        break;
      case ImplantAction::kDrop:
        a.selectivity = config.drop_selectivity;
        break;
      case ImplantAction::kMisroute: {
        std::vector<PortId> choices;
        for (PortId p : ports) {
          const bool egress = a.scope == ImplantScope::kEgress ||
                              a.scope == ImplantScope::kEgressSubset;
          if (!(egress && p == a.port)) choices.push_back(p);
        }
        a.misroute_port = choices[rng() % choices.size()];
        break;
      }
      case ImplantAction::kGenerate: {
        std::vector<const PrefixOwner*> foreign;
        for (const PrefixOwner& p : net.rules.prefixes) {
          if (p.owner != a.device) foreign.push_back(&p);
        }
        a.rewrite = foreign.empty()
                        ? HeaderPattern::FromMasks(bits, 0, 1)
                        : foreign[rng() % foreign.size()]->prefix;
        a.fabricate = rng() % 2 == 0;
        break;
      }
      case ImplantAction::kDelay:
        a.delay = static_cast<Nanos>(config.delay_ms * 1e6);
        break;
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<Trajectory> CorpusFromLog(const ObservationLog& log,
                                      const NetworkState& state) {
  std::map<PacketLabel, PortId> ports;
  for (const ProbeRecord& p : log.probes) ports[p.label] = p.in_port;
  std::vector<Trajectory> corpus;
  for (const auto& [label, obs] : GroupByLabel(log.observations)) {
    auto it = ports.find(label);
    if (it == ports.end()) continue;
    const Reconstruction r = ReconstructActual(obs, label, state);
    if (!r.ok()) continue;
    for (Trajectory& t : TrajectoriesOf(r.trajectory, it->second)) {
      corpus.push_back(std::move(t));
    }
  }
  return corpus;
}

ObservationLog Window(const ObservationLog& log, size_t flows) {
  ObservationLog out;
  std::set<PacketLabel> keep;
  for (size_t i = 0; i < log.probes.size() && i < flows; ++i) {
    out.probes.push_back(log.probes[i]);
    keep.insert(log.probes[i].label);
  }
  for (const Observation& o : log.observations) {
    if (keep.contains(o.label)) out.observations.push_back(o);
  }
  return out;
}

std::optional<double> MetricsReport::accuracy() const {
  return Ratio(detected, triggered);
}
std::optional<double> MetricsReport::kind_match_rate() const {
  return Ratio(kind_matches, detected);
}
std::optional<double> MetricsReport::localization_rate() const {
  return Ratio(localized, detected);
}
std::optional<double> MetricsReport::false_negative_rate() const {
  return Ratio(triggered - detected, triggered);
}

std::string MetricsReport::ToJson() const {
  nlohmann::json j;
  j["topology"] = topology;
  j["seed"] = seed;
  j["devices"] = devices;
  j["rules"] = rules;
  j["trials"] = trials;
  j["sweeps"] = sweeps;
  j["congestion"] = congestion;
  j["calibration_flows"] = calibration_flows;
  j["delay_bound_ns"] = delay_bound;
  j["implants"] = implants;
  j["triggered"] = triggered;
  j["detected"] = detected;
  j["kind_matches"] = kind_matches;
  j["localized"] = localized;
  j["accuracy"] = OptionalJson(accuracy());
  j["kind_match_rate"] = OptionalJson(kind_match_rate());
  j["localization_rate"] = OptionalJson(localization_rate());
  j["false_negative_rate"] = OptionalJson(false_negative_rate());
  j["false_positives"] = false_positives;
  j["false_positive_details"] = false_positive_details;
  j["probes"] = probes;
  j["reprobes"] = reprobes;
  j["demoted"] = demoted;
  j["unreachable_pairs"] = unreachable_pairs;
  j["actions"] = actions;
  j["suppressed"] = suppressed;
  j["recoveries"] = recoveries;
  nlohmann::json list = nlohmann::json::array();
  for (const ImplantOutcome& o : outcomes) {
    list.push_back({{"trial", o.trial},
                    {"implant", o.implant.ToString()},
                    {"device", o.implant.device.str()},
                    {"action", std::string(ImplantActionName(o.implant.action))},
                    {"triggered", o.triggered},
                    {"detected", o.detected},
                    {"kind_match", o.kind_match},
                    {"localized", o.localized},
                    {"verdict_kinds", o.verdict_kinds},
                    {"detection_sweep", o.detection_sweep},
                    {"detection_time_ns", o.detection_time}});
  }
  j["outcomes"] = std::move(list);
  return j.dump(2) + "\n";
}

std::string MetricsReport::CsvHeader() {
  return "topology,seed,congestion,calibration_flows,trials,implants,"
         "triggered,detected,accuracy,kind_match_rate,localization_rate,"
         "false_positives,false_negative_rate,probes,reprobes,demoted\n";
}

std::string MetricsReport::ToCsvRow() const {
  auto opt = [](std::optional<double> v) {
    return v ? absl::StrCat(*v) : std::string();
  };
  return absl::StrCat(topology, ",", seed, ",", congestion, ",",
                      calibration_flows, ",", trials, ",", implants, ",",
                      triggered, ",", detected, ",", opt(accuracy()), ",",
                      opt(kind_match_rate()), ",", opt(localization_rate()),
                      ",", false_positives, ",", opt(false_negative_rate()),
                      ",", probes, ",", reprobes, ",", demoted, "\n");
}

std::string PhaseTimings::ToJson() const {
  nlohmann::json j = {{"generate_s", generate_s},
                      {"calibration_s", calibration_s},
                      {"target_id_s", target_id_s},
                      {"scan_s", scan_s},
                      {"response_s", response_s},
                      {"total_s", total_s}};
  return j.dump(2) + "\n";
}

absl::StatusOr<ExperimentResult> RunExperiment(const ExperimentConfig& config) {
  if (absl::Status s = ValidateConfig(config); !s.ok()) return s;
  const auto start = Clock::now();
  ExperimentResult result;
  MetricsReport& report = result.report;
  PhaseTimings& timings = result.timings;

  auto t = Clock::now();
  auto net = GenerateNetwork(config);
  if (!net.ok()) return net.status();
  const NetworkSnapshot snapshot = NetworkSnapshot::Capture(net->state);
  ExpectedCache cache(snapshot);
  timings.generate_s = Since(t);
  report.topology = config.topology;
  report.seed = config.seed;
  report.devices = static_cast<int>(net->state.devices().size());
  report.rules = net->rules.rule_count;
  report.trials = config.trials;
  report.congestion = config.congestion;

  // Calibration windows are prefixes of one benign trace, so a longer
  // window only ever adds evidence.
  t = Clock::now();
  SimOptions base;
  base.congestion_drop = config.congestion;
  base.label_bits = config.label_bits;
  base.seed = Stream(config.seed, 1);
  Simulator calibration(net->state, base);
  std::mt19937_64 flow_rng(Stream(config.seed, 2));
  const std::vector<Flow> flows =
      RandomFlows(net->state, net->rules.prefixes, config.flows,
                  config.label_bits, flow_rng);
  const ObservationLog trace = calibration.Run(flows);
  const size_t window_flows =
      static_cast<size_t>(config.calibration_units * config.unit_flows);
  const ObservationLog window = Window(trace, window_flows);
  report.calibration_flows = static_cast<int>(window.probes.size());
  const CongestionEstimator congestion =
      CongestionEstimator::Estimate(window, net->state);
  report.delay_bound = congestion.delay_bound();
  timings.calibration_s = Since(t);

  t = Clock::now();
  auto plan = BuildScanPlan(CorpusFromLog(window, net->state), snapshot,
                            config.groups);
  result.plan = plan.ok() ? *std::move(plan) : UniformScanPlan(snapshot);
  timings.target_id_s = Since(t);

  std::vector<ResponsePolicy> policies;
  if (!config.policies.empty()) {
    auto xml = ReadFile(config.policies);
    if (!xml.ok()) return xml.status();
    auto parsed = ParsePolicies(*xml);
    if (!parsed.ok()) return parsed.status();
    policies = *std::move(parsed);
  }
  AlarmLog alarms;

  for (int trial = 0; trial < config.trials; ++trial) {
    std::mt19937_64 implant_rng(Stream(config.seed, 100 + trial));
    auto implants =
        GenerateImplants(*net, config, config.implants, implant_rng);
    if (!implants.ok()) return implants.status();
    SimOptions opts = base;
    opts.seed = Stream(config.seed, 200 + trial);
    Simulator sim(net->state, opts);
    for (const AttackImplant& a : *implants) {
      if (absl::Status s = sim.AddImplant(a); !s.ok()) return s;
    }
    ScanConfig scan;
    scan.seed = Stream(config.seed, 300 + trial);
    scan.probes_per_pair = config.probes_per_pair;
    scan.label_bits = config.label_bits;
    scan.ports = config.ports;
    scan.confirmations = config.confirmations;
    scan.max_reprobes = config.max_reprobes;
    scan.alpha = config.alpha;
    Scanner scanner(cache, congestion, scan);
    ResponseEngine engine(policies);

    std::vector<ImplantOutcome> outcomes;
    std::set<DeviceId> implanted;
    for (const AttackImplant& a : *implants) {
      ImplantOutcome o;
      o.trial = trial;
      o.implant = a;
      outcomes.push_back(std::move(o));
      implanted.insert(a.device);
    }
    for (int sweep = 1; sweep <= config.sweeps; ++sweep) {
      t = Clock::now();
      auto res = scanner.Sweep(sim, result.plan);
      if (!res.ok()) return res.status();
      timings.scan_s += Since(t);
      ++report.sweeps;
      report.probes += res->stats.probes;
      report.reprobes += res->stats.reprobes;
      report.demoted += res->stats.demoted;
      report.unreachable_pairs += static_cast<int>(res->unreachable.size());
      const std::vector<Verdict> malicious = res->Malicious();

      for (const Verdict& v : malicious) {
        const bool hit = std::any_of(
            implanted.begin(), implanted.end(),
            [&](const DeviceId& d) { return Names(v, d); });
        if (!hit) {
          ++report.false_positives;
          std::vector<std::string> devs;
          for (const DeviceId& d : v.malicious_devices) devs.push_back(d.str());
          report.false_positive_details.push_back(absl::StrCat(
              "trial ", trial, " sweep ", sweep, ": ", VerdictKindName(v.kind),
              " ", v.target.str(), "->", v.peer.str(), " blames {",
              absl::StrJoin(devs, ","), "}"));
        }
      }
      for (ImplantOutcome& o : outcomes) {
        for (const Verdict& v : malicious) {
          if (!Names(v, o.implant.device)) continue;
          const std::string kind(VerdictKindName(v.kind));
          if (std::find(o.verdict_kinds.begin(), o.verdict_kinds.end(),
                        kind) == o.verdict_kinds.end()) {
            o.verdict_kinds.push_back(kind);
          }
          if (v.kind == ExpectedVerdict(o.implant.action)) o.kind_match = true;
          if (v.malicious_devices.size() == 1) o.localized = true;
          if (!o.detected) {
            o.detected = true;
            o.detection_sweep = sweep;
            for (const FireRecord& f : sim.fires()) {
              if (f.implant == o.implant.id) {
                o.detection_time = sim.now() - f.at;
                break;
              }
            }
          }
        }
      }

      result.verdicts.insert(result.verdicts.end(), malicious.begin(),
                             malicious.end());
      if (!config.respond || malicious.empty()) continue;
      t = Clock::now();
      const ResponseOutcome response = engine.MatchAndExecute(malicious,
                                                              sim.now());
      report.actions += static_cast<int>(response.actions.size());
      report.suppressed += static_cast<int>(response.suppressed.size());
      std::vector<ScheduledReprobe> reprobes;
      ResponseContext ctx;
      ctx.alarms = &alarms;
      ctx.reprobes = &reprobes;
      // The controller acts on its own copy; the running network keeps the
      // snapshot so later sweeps stay comparable.
      NetworkState controlled = net->state;
      for (const ActionRequest& r : response.actions) {
        if (r.action == ResponseAction::kUpdateForwardingTable &&
            !r.trigger.malicious_devices.empty() &&
            r.trigger.malicious_devices.front() != r.target) {
          auto table = RoutesAvoiding(controlled, net->rules, r.target,
                                      r.trigger.malicious_devices.front());
          if (table.ok()) ctx.replacement_rules[r.target] = *std::move(table);
        }
        auto next = ApplyToNetwork(r, controlled, sim.now(), ctx);
        if (next.ok()) {
          controlled = *std::move(next);
        } else {
          ActionRequest failed = r;
          failed.notes.push_back(std::string(next.status().message()));
          alarms.Append(failed, sim.now());
        }
      }
      for (const ScheduledReprobe& rp : reprobes) {
        std::vector<int> disabled;
        for (const AttackImplant& a : sim.implants()) {
          if (a.device == rp.request.target && a.enabled) {
            (void)sim.SetImplantEnabled(a.id, false);
            disabled.push_back(a.id);
          }
        }
        const Verdict& v = rp.request.trigger;
        Probe probe;
        probe.source = v.target;
        probe.port = v.port;
        probe.destination = v.peer;
        probe.header = v.header;
        auto again = scanner.Reprobe(sim, {probe});
        if (again.ok() && CheckRecovery(rp.request, *again, sim.now())) {
          ++report.recoveries;
        }
        for (int id : disabled) (void)sim.SetImplantEnabled(id, true);
      }
      timings.response_s += Since(t);
    }
    for (ImplantOutcome& o : outcomes) {
      for (const FireRecord& f : sim.fires()) {
        if (f.implant == o.implant.id) o.triggered = true;
      }
      ++report.implants;
      if (o.triggered) ++report.triggered;
      if (o.triggered && o.detected) {
        ++report.detected;
        if (o.kind_match) ++report.kind_matches;
        if (o.localized) ++report.localized;
      }
      report.outcomes.push_back(std::move(o));
    }
  }
  result.alarms = alarms.Lines();
  timings.total_s = Since(start);
  return result;
}

}  // namespace wedgetail::sim
