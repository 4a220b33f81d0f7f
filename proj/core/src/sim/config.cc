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

#include "wedgetail/sim/config.h"

#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"

namespace wedgetail::sim {
namespace {

namespace pt = boost::property_tree;

template <typename T>
absl::Status Read(const std::string& key, const std::string& text, T* out) {
  bool ok = false;
  if constexpr (std::is_same_v<T, double>) {
    ok = absl::SimpleAtod(text, out);
  } else if constexpr (std::is_same_v<T, bool>) {
    ok = absl::SimpleAtob(text, out);
  } else {
    ok = absl::SimpleAtoi(text, out);
  }
  if (!ok) {
    return absl::InvalidArgumentError(
        absl::StrCat("config key '", key, "': bad value '", text, "'"));
  }
  return absl::OkStatus();
}

}  // namespace

absl::Status ValidateConfig(const ExperimentConfig& c) {
  auto fail = [](absl::string_view what) {
    return absl::InvalidArgumentError(absl::StrCat("config: ", what));
  };
  const AttackMix& m = c.attack_mix;
  for (double f : {m.replay, m.drop, m.misroute, m.generate, m.delay}) {
    if (f < 0) return fail("attack fractions must be non-negative");
  }
  const double sum = m.replay + m.drop + m.misroute + m.generate + m.delay;
  if (sum > 1 + 1e-9) return fail("attack fractions sum to more than 1");
  if (c.implants > 0 && sum <= 0) return fail("attack mix is empty");
  const ScopeMix& s = c.scope_mix;
  double weight = 0;
  for (double w : {s.all, s.ingress_subset, s.ingress_sampled, s.egress,
                   s.egress_subset, s.controller_bound}) {
    if (w < 0) return fail("scope weights must be non-negative");
    weight += w;
  }
  if (c.implants > 0 && weight <= 0) return fail("scope mix is empty");
  if (c.implants < 0 || c.trials < 1 || c.sweeps < 1) {
    return fail("implants >= 0, trials >= 1 and sweeps >= 1 required");
  }
  if (c.congestion < 0 || c.congestion >= 1) {
    return fail("congestion must be in [0,1)");
  }
  if (c.drop_selectivity <= 0 || c.drop_selectivity > 1) {
    return fail("drop_selectivity must be in (0,1]");
  }
  if (c.delay_ms <= 0) return fail("delay_ms must be positive");
  if (c.sampled_probability <= 0 || c.sampled_probability > 1) {
    return fail("sampled_probability must be in (0,1]");
  }
  if (c.flows < 1 || c.unit_flows < 1 || c.calibration_units < 1) {
    return fail("flows, unit_flows and calibration_units must be positive");
  }
  if (c.calibration_units * c.unit_flows > c.flows) {
    return fail("calibration window is longer than the trace");
  }
  if (c.label_bits < 8 || c.label_bits > 32) {
    return fail("label_bits must be in [8,32]");
  }
  if (c.groups < 2) return fail("groups must be at least 2");
  if (c.probes_per_pair < 1 || c.confirmations < 1 ||
      c.max_reprobes < c.confirmations) {
    return fail("probe counts must be positive, max_reprobes >= confirmations");
  }
  if (c.alpha <= 0 || c.alpha >= 1) return fail("alpha must be in (0,1)");
  if (c.ports.empty()) return fail("no ports under test");
  return absl::OkStatus();
}

absl::StatusOr<ExperimentConfig> ParseConfig(absl::string_view text) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("config line ", e.line(), ": ", e.message()));
  }
  ExperimentConfig c;
  std::set<std::string> seen;
  auto apply = [&](const std::string& key,
                   const std::string& raw) -> absl::Status {
    const std::string v(absl::StripAsciiWhitespace(raw));
    seen.insert(key);
    if (key == "topology") {
      c.topology = v;
    } else if (key == "policies") {
      c.policies = v;
    } else if (key == "ports") {
      c.ports.clear();
      for (absl::string_view p : absl::StrSplit(v, ',', absl::SkipEmpty())) {
        PortId port;
        if (!absl::SimpleAtoi(absl::StripAsciiWhitespace(p), &port)) {
          return absl::InvalidArgumentError(
              absl::StrCat("config key 'ports': bad port '", p, "'"));
        }
        c.ports.push_back(port);
      }
    } else if (key == "seed") {
      return Read(key, v, &c.seed);
    } else if (key == "rule_seed") {
      return Read(key, v, &c.rule_seed);
    } else if (key == "header_bits") {
      return Read(key, v, &c.header_bits);
    } else if (key == "prefixes") {
      return Read(key, v, &c.prefixes);
    } else if (key == "implants") {
      return Read(key, v, &c.implants);
    } else if (key == "trials") {
      return Read(key, v, &c.trials);
    } else if (key == "sweeps") {
      return Read(key, v, &c.sweeps);
    } else if (key == "drop_selectivity") {
      return Read(key, v, &c.drop_selectivity);
    } else if (key == "delay_ms") {
      return Read(key, v, &c.delay_ms);
    } else if (key == "sampled_probability") {
      return Read(key, v, &c.sampled_probability);
    } else if (key == "congestion") {
      return Read(key, v, &c.congestion);
    } else if (key == "flows") {
      return Read(key, v, &c.flows);
    } else if (key == "unit_flows") {
      return Read(key, v, &c.unit_flows);
    } else if (key == "calibration_units") {
      return Read(key, v, &c.calibration_units);
    } else if (key == "label_bits") {
      return Read(key, v, &c.label_bits);
    } else if (key == "groups") {
      return Read(key, v, &c.groups);
    } else if (key == "probes_per_pair") {
      return Read(key, v, &c.probes_per_pair);
    } else if (key == "confirmations") {
      return Read(key, v, &c.confirmations);
    } else if (key == "max_reprobes") {
      return Read(key, v, &c.max_reprobes);
    } else if (key == "alpha") {
      return Read(key, v, &c.alpha);
    } else if (key == "respond") {
      return Read(key, v, &c.respond);
    } else if (key == "attack_mix.replay") {
      return Read(key, v, &c.attack_mix.replay);
    } else if (key == "attack_mix.drop") {
      return Read(key, v, &c.attack_mix.drop);
    } else if (key == "attack_mix.misroute") {
      return Read(key, v, &c.attack_mix.misroute);
    } else if (key == "attack_mix.generate") {
      return Read(key, v, &c.attack_mix.generate);
    } else if (key == "attack_mix.delay") {
      return Read(key, v, &c.attack_mix.delay);
    } else if (key == "scope_mix.all") {
      return Read(key, v, &c.scope_mix.all);
    } else if (key == "scope_mix.ingress_subset") {
      return Read(key, v, &c.scope_mix.ingress_subset);
    } else if (key == "scope_mix.ingress_sampled") {
      return Read(key, v, &c.scope_mix.ingress_sampled);
    } else if (key == "scope_mix.egress") {
      return Read(key, v, &c.scope_mix.egress);
    } else if (key == "scope_mix.egress_subset") {
      return Read(key, v, &c.scope_mix.egress_subset);
    } else if (key == "scope_mix.controller_bound") {
      return Read(key, v, &c.scope_mix.controller_bound);
    } else {
      return absl::InvalidArgumentError(
          absl::StrCat("unknown config key '", key, "'"));
    }
    return absl::OkStatus();
  };
  for (const auto& [key, node] : tree) {
    if (node.empty()) {
      if (absl::Status s = apply(key, node.data()); !s.ok()) return s;
      continue;
    }
    for (const auto& [sub, leaf] : node) {
      if (absl::Status s = apply(absl::StrCat(key, ".", sub), leaf.data());
          !s.ok()) {
        return s;
      }
    }
  }
  if (absl::Status s = ValidateConfig(c); !s.ok()) return s;
  return c;
}

std::string ConfigToString(const ExperimentConfig& c) {
  std::vector<std::string> ports;
  for (PortId p : c.ports) ports.push_back(absl::StrCat(p));
  std::string out = absl::StrCat(
      "topology = ", c.topology, "\nseed = ", c.seed,
      "\nheader_bits = ", c.header_bits, "\nprefixes = ", c.prefixes,
      "\nrule_seed = ", c.rule_seed, "\nimplants = ", c.implants,
      "\ntrials = ", c.trials, "\nsweeps = ", c.sweeps,
      "\ndrop_selectivity = ", c.drop_selectivity,
      "\ndelay_ms = ", c.delay_ms,
      "\nsampled_probability = ", c.sampled_probability,
      "\ncongestion = ", c.congestion, "\nflows = ", c.flows,
      "\nunit_flows = ", c.unit_flows,
      "\ncalibration_units = ", c.calibration_units,
      "\nports = ", absl::StrJoin(ports, ","),
      "\nlabel_bits = ", c.label_bits, "\ngroups = ", c.groups,
      "\nprobes_per_pair = ", c.probes_per_pair,
      "\nconfirmations = ", c.confirmations,
      "\nmax_reprobes = ", c.max_reprobes, "\nalpha = ", c.alpha,
      "\nrespond = ", c.respond ? "true" : "false");
  if (!c.policies.empty()) absl::StrAppend(&out, "\npolicies = ", c.policies);
  const AttackMix& m = c.attack_mix;
  absl::StrAppend(&out, "\n[attack_mix]\nreplay = ", m.replay,
                  "\ndrop = ", m.drop, "\nmisroute = ", m.misroute,
                  "\ngenerate = ", m.generate, "\ndelay = ", m.delay);
  const ScopeMix& s = c.scope_mix;
  absl::StrAppend(&out, "\n[scope_mix]\nall = ", s.all,
                  "\ningress_subset = ", s.ingress_subset,
                  "\ningress_sampled = ", s.ingress_sampled,
                  "\negress = ", s.egress, "\negress_subset = ", s.egress_subset,
                  "\ncontroller_bound = ", s.controller_bound, "\n");
  return out;
}

}  // namespace wedgetail::sim
