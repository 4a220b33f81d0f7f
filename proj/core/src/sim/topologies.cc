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

#include "wedgetail/sim/topologies.h"

#include <map>
#include <random>
#include <set>

#include "absl/strings/match.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"

namespace wedgetail::sim {
namespace {

NetworkState MustBuild(const std::vector<std::string>& devices,
                       const EdgeList& edges, int header_bits) {
  auto state = BuildTopology(devices, edges, header_bits);
  // Bundled edge lists are well formed.
  return *std::move(state);
}

}  // namespace

absl::StatusOr<NetworkState> BuildTopology(
    const std::vector<std::string>& devices, const EdgeList& edges,
    int header_bits) {
  std::map<std::string, int> degree;
  for (const std::string& d : devices) degree[d] = 0;
  for (const auto& [a, b] : edges) {
    if (!degree.contains(a) || !degree.contains(b)) {
      return absl::NotFoundError(
          absl::StrCat("edge ", a, "-", b, " names an unknown device"));
    }
    ++degree[a];
    ++degree[b];
  }
  NetworkState state(header_bits);
  for (const std::string& d : devices) {
    if (absl::Status s = state.AddDevice(DeviceId(d), 1 + degree[d]); !s.ok()) {
      return s;
    }
    if (absl::Status s = state.AttachHost("h-" + d, {DeviceId(d), 0});
        !s.ok()) {
      return s;
    }
  }
  std::map<std::string, PortId> next;
  for (const std::string& d : devices) next[d] = 1;
  for (const auto& [a, b] : edges) {
    if (absl::Status s =
            state.AddLink({DeviceId(a), next[a]++}, {DeviceId(b), next[b]++});
        !s.ok()) {
      return s;
    }
  }
  return state;
}

NetworkState AarnetTopology(int header_bits) {
  const std::vector<std::string> nodes = {
      "adl", "alice", "bne", "cbr", "drw", "hba",
      "mel", "per", "syd1", "syd2", "tsv", "cns"};
  const EdgeList edges = {
      {"per", "adl"},   {"per", "drw"},   {"drw", "alice"}, {"alice", "adl"},
      {"adl", "mel"},   {"mel", "hba"},   {"mel", "cbr"},   {"mel", "syd1"},
      {"cbr", "syd1"},  {"syd1", "syd2"}, {"cbr", "syd2"},  {"syd2", "bne"},
      {"syd1", "bne"},  {"bne", "tsv"},   {"tsv", "cns"},   {"drw", "cns"},
  };
  return MustBuild(nodes, edges, header_bits);
}

NetworkState Zib54Topology(int header_bits) {
  constexpr int kNodes = 54;
  constexpr int kLinks = 81;
  std::mt19937_64 rng(54);
  std::vector<std::string> nodes;
  for (int i = 0; i < kNodes; ++i) nodes.push_back(absl::StrCat("z", i));
  std::set<std::pair<int, int>> used;
  EdgeList edges;
  auto add = [&](int a, int b) {
    if (a == b) return false;
    if (a > b) std::swap(a, b);
    if (!used.insert({a, b}).second) return false;
    edges.push_back({nodes[a], nodes[b]});
    return true;
  };
  // Spanning tree first so the graph is connected, then chords between
  // nearby indices, which keeps paths long the way a national backbone is.
  for (int i = 1; i < kNodes; ++i) {
    const int lo = std::max(0, i - 6);
    add(i, lo + static_cast<int>(rng() % (i - lo)));
  }
  while (static_cast<int>(edges.size()) < kLinks) {
    const int a = static_cast<int>(rng() % kNodes);
    const int b = (a + 1 + static_cast<int>(rng() % 10)) % kNodes;
    add(a, b);
  }
  return MustBuild(nodes, edges, header_bits);
}

NetworkState Figure1Topology(int header_bits) {
  const std::vector<std::string> nodes = {"a", "b", "c", "d", "i",
                                          "e", "c1", "f", "g"};
  const EdgeList edges = {
      {"a", "b"}, {"b", "c"}, {"c", "d"},  {"c", "i"}, {"d", "e"}, {"i", "e"},
      {"e", "c1"}, {"b", "f"}, {"f", "e"}, {"f", "g"}, {"g", "c1"},
  };
  return MustBuild(nodes, edges, header_bits);
}

NetworkState Figure2Topology(int header_bits) {
  const std::vector<std::string> nodes = {"b", "g", "f", "a", "c", "d",
                                          "h", "i", "j", "e", "k", "l"};
  const EdgeList edges = {
      {"b", "g"}, {"g", "f"}, {"b", "f"}, {"b", "a"}, {"b", "c"}, {"b", "d"},
      {"g", "h"}, {"g", "i"}, {"g", "j"}, {"f", "e"}, {"f", "k"}, {"f", "l"},
  };
  return MustBuild(nodes, edges, header_bits);
}

NetworkState LineTopology(int devices, int header_bits) {
  std::vector<std::string> nodes;
  EdgeList edges;
  for (int i = 0; i < devices; ++i) {
    nodes.push_back(absl::StrCat("d", i));
    if (i > 0) edges.push_back({nodes[i - 1], nodes[i]});
  }
  return MustBuild(nodes, edges, header_bits);
}

NetworkState StarTopology(int leaves, int header_bits) {
  std::vector<std::string> nodes = {"hub"};
  EdgeList edges;
  for (int i = 1; i <= leaves; ++i) {
    nodes.push_back(absl::StrCat("l", i));
    edges.push_back({"hub", nodes.back()});
  }
  return MustBuild(nodes, edges, header_bits);
}

absl::StatusOr<NetworkState> TopologyByName(absl::string_view name,
                                            int header_bits) {
  auto bits = [&](int fallback) {
    return header_bits > 0 ? header_bits : fallback;
  };
  if (name == "aarnet") return AarnetTopology(bits(32));
  if (name == "zib54") return Zib54Topology(bits(32));
  if (name == "figure1") return Figure1Topology(bits(8));
  if (name == "figure2") return Figure2Topology(bits(16));
  int n = 0;
  if (absl::StartsWith(name, "line") &&
      absl::SimpleAtoi(name.substr(4), &n) && n > 0) {
    return LineTopology(n, bits(16));
  }
  if (absl::StartsWith(name, "star") &&
      absl::SimpleAtoi(name.substr(4), &n) && n > 0) {
    return StarTopology(n, bits(16));
  }
  return absl::NotFoundError(absl::StrCat(
      "unknown topology '", name,
      "' (aarnet, zib54, figure1, figure2, line<N>, star<N>)"));
}

}  // namespace wedgetail::sim
