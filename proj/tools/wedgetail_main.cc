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

// wedgetail gen | sweep | report | verify

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "json.hpp"
#include "wedgetail/net_model.h"
#include "wedgetail/oracle/concrete_forwarding.h"
#include "wedgetail/scanner.h"
#include "wedgetail/sim/config.h"
#include "wedgetail/sim/experiment.h"

namespace wt = wedgetail;
namespace fs = std::filesystem;

namespace {

struct Globals {
  std::optional<uint64_t> seed;
  std::string config;
  std::string out_dir = ".";
};

int Fail(const absl::Status& s) {
  std::cerr << "wedgetail: " << s << "\n";
  return 1;
}

absl::StatusOr<wt::sim::ExperimentConfig> LoadConfig(const Globals& g) {
  wt::sim::ExperimentConfig c;
  if (!g.config.empty()) {
    auto text = wt::ReadFile(g.config);
    if (!text.ok()) return text.status();
    auto parsed = wt::sim::ParseConfig(*text);
    if (!parsed.ok()) return parsed.status();
    c = *std::move(parsed);
    // Relative policy paths are relative to the config file.
    if (!c.policies.empty() && fs::path(c.policies).is_relative()) {
      c.policies = (fs::path(g.config).parent_path() / c.policies).string();
    }
  }
  if (g.seed) c.seed = *g.seed;
  return c;
}

absl::Status Write(const Globals& g, const std::string& name,
                   const std::string& contents) {
  std::error_code ec;
  fs::create_directories(g.out_dir, ec);
  if (ec) {
    return absl::InternalError(
        absl::StrCat("cannot create ", g.out_dir, ": ", ec.message()));
  }
  return wt::WriteFile((fs::path(g.out_dir) / name).string(), contents);
}

int Gen(const Globals& g, const std::string& topology, int prefixes,
        int header_bits) {
  auto config = LoadConfig(g);
  if (!config.ok()) return Fail(config.status());
  if (!topology.empty()) config->topology = topology;
  if (prefixes > 0) config->prefixes = prefixes;
  if (header_bits > 0) config->header_bits = header_bits;
  auto net = wt::sim::GenerateNetwork(*config);
  if (!net.ok()) return Fail(net.status());
  for (auto [name, body] :
       {std::pair{"topology.json",
                  wt::TopologyToJson(net->state, config->topology)},
        std::pair{"rules.json", wt::RulesToJson(net->state)}}) {
    if (absl::Status s = Write(g, name, body); !s.ok()) return Fail(s);
  }
  std::cout << config->topology << ": " << net->state.devices().size()
            << " devices, " << net->state.links().size() << " links, "
            << net->rules.prefixes.size() << " prefixes, "
            << net->rules.rule_count << " rules -> " << g.out_dir << "\n";
  return 0;
}

int Sweep(const Globals& g, const std::string& topology,
          std::optional<int> implants, std::optional<int> trials,
          std::optional<int> sweeps, std::optional<double> congestion) {
  auto config = LoadConfig(g);
  if (!config.ok()) return Fail(config.status());
  if (!topology.empty()) config->topology = topology;
  if (implants) config->implants = *implants;
  if (trials) config->trials = *trials;
  if (sweeps) config->sweeps = *sweeps;
  if (congestion) config->congestion = *congestion;
  auto result = wt::sim::RunExperiment(*config);
  if (!result.ok()) return Fail(result.status());
  std::string alarms;
  for (const std::string& line : result->alarms) absl::StrAppend(&alarms, line, "\n");
  const std::vector<std::pair<std::string, std::string>> files = {
      {"report.json", result->report.ToJson()},
      {"timings.json", result->timings.ToJson()},
      {"plan.json", result->plan.ToJson() + "\n"},
      {"verdicts.jsonl", wt::VerdictsToJsonLines(result->verdicts)},
      {"alarms.log", alarms},
  };
  for (const auto& [name, body] : files) {
    if (absl::Status s = Write(g, name, body); !s.ok()) return Fail(s);
  }
  const wt::sim::MetricsReport& r = result->report;
  std::cout << r.topology << " seed " << r.seed << ": " << r.detected << "/"
            << r.triggered << " triggered implants detected, "
            << r.false_positives << " false positives, " << r.sweeps
            << " sweeps, " << result->timings.total_s << " s\n";
  return 0;
}

int Report(const Globals& g, const std::vector<std::string>& inputs,
           const std::string& format) {
  nlohmann::json rows = nlohmann::json::array();
  std::string csv = wt::sim::MetricsReport::CsvHeader();
  for (const std::string& path : inputs) {
    auto text = wt::ReadFile(path);
    if (!text.ok()) return Fail(text.status());
    nlohmann::json j = nlohmann::json::parse(*text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      return Fail(absl::InvalidArgumentError(
          absl::StrCat(path, ": not a report.json")));
    }
    j.erase("outcomes");
    j.erase("false_positive_details");
    auto field = [&](const char* k) {
      return j.contains(k) && !j[k].is_null() ? j[k].dump() : std::string();
    };
    auto text_field = [&](const char* k) {
      return j.contains(k) && j[k].is_string() ? j[k].get<std::string>()
                                               : std::string();
    };
    absl::StrAppend(&csv, text_field("topology"));
    for (const char* k :
         {"seed", "congestion", "calibration_flows", "trials", "implants",
          "triggered", "detected", "accuracy", "kind_match_rate",
          "localization_rate", "false_positives", "false_negative_rate",
          "probes", "reprobes", "demoted"}) {
      absl::StrAppend(&csv, ",", field(k));
    }
    absl::StrAppend(&csv, "\n");
    j["source"] = path;
    rows.push_back(std::move(j));
  }
  const std::string body = format == "json" ? rows.dump(2) + "\n" : csv;
  const std::string name = format == "json" ? "summary.json" : "summary.csv";
  if (absl::Status s = Write(g, name, body); !s.ok()) return Fail(s);
  std::cout << body;
  return 0;
}

int Verify(const Globals& g, int networks, int max_devices, int header_bits) {
  const uint64_t seed = g.seed.value_or(1);
  const wt::oracle::EquivalenceReport r =
      wt::oracle::RunEquivalenceSuite(seed, networks, max_devices, header_bits);
  for (const std::string& m : r.mismatches) std::cerr << m << "\n";
  std::cout << r.networks << " networks, " << r.sources << " sources, "
            << r.mismatches.size() << " mismatches\n";
  return r.mismatches.empty() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"WedgeTail data-plane intrusion detection simulator"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Random seed, overrides the config");
  app.add_option("--config", g.config, "Experiment config file")
      ->check(CLI::ExistingFile);
  app.add_option("--out-dir", g.out_dir, "Output directory");

  auto* gen = app.add_subcommand("gen", "Write topology.json and rules.json");
  std::string topology;
  int prefixes = 0;
  int header_bits = 0;
  gen->add_option("--topology", topology,
                  "aarnet, zib54, figure1, figure2, line<N>, star<N>");
  gen->add_option("--prefixes", prefixes, "Destination prefixes");
  gen->add_option("--header-bits", header_bits, "Header width");

  auto* sweep = app.add_subcommand("sweep", "Run an experiment");
  std::optional<int> implants, trials, sweeps;
  std::optional<double> congestion;
  sweep->add_option("--topology", topology, "Topology name");
  sweep->add_option("--implants", implants, "Implants per trial");
  sweep->add_option("--trials", trials, "Independent trials");
  sweep->add_option("--sweeps", sweeps, "Sweeps per trial");
  sweep->add_option("--congestion", congestion, "Per-device drop rate");

  auto* report = app.add_subcommand("report", "Aggregate report.json files");
  std::vector<std::string> inputs;
  std::string format = "csv";
  report->add_option("inputs", inputs, "report.json files")
      ->required()
      ->check(CLI::ExistingFile);
  report->add_option("--format", format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));

  auto* verify = app.add_subcommand(
      "verify", "Check header-space propagation against exhaustive forwarding");
  int networks = 25;
  int max_devices = 8;
  int verify_bits = 12;
  verify->add_option("--networks", networks, "Random networks to check");
  verify->add_option("--max-devices", max_devices, "Largest network")
      ->check(CLI::Range(2, 16));
  verify->add_option("--header-bits", verify_bits, "Header width")
      ->check(CLI::Range(1, 20));

  CLI11_PARSE(app, argc, argv);

  if (*gen) return Gen(g, topology, prefixes, header_bits);
  if (*sweep) return Sweep(g, topology, implants, trials, sweeps, congestion);
  if (*report) return Report(g, inputs, format);
  if (*verify) return Verify(g, networks, max_devices, verify_bits);
  return 1;
}
