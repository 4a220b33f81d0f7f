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

#include "wedgetail/transfer_function.h"

#include <algorithm>
#include <cassert>
#include <limits>
#include <map>

namespace wedgetail {

TransferFunction TransferFunction::FromDevice(const ForwardingDevice& device) {
  TransferFunction tf;
  tf.device_ = device.id;
  tf.ports_ = device.ports;
  tf.cases_.reserve(device.flow_table.size());
  for (const FlowRule& rule : device.flow_table) {
    TransferCase c{rule.in_port, rule.match, rule.action, rule.rewrite, {}};
    for (size_t j = 0; j < tf.cases_.size(); ++j) {
      const TransferCase& earlier = tf.cases_[j];
      if (earlier.in_port && c.in_port && *earlier.in_port != *c.in_port) {
        continue;
      }
      if (earlier.match.Overlaps(c.match)) c.shadowed_by.push_back(j);
    }
    tf.cases_.push_back(std::move(c));
  }
  return tf;
}

std::vector<OutPort> TransferFunction::Outputs(const TransferCase& c,
                                               PortId ingress) const {
  std::vector<OutPort> out;
  switch (c.action.type) {
    case ActionType::kForward:
    case ActionType::kGroup:
      for (PortId p : c.action.ports) out.push_back(OutPort::Port(p));
      break;
    case ActionType::kFlood:
      for (PortId p : ports_) {
        if (p != ingress) out.push_back(OutPort::Port(p));
      }
      break;
    case ActionType::kDrop:
      out.push_back(OutPort::Drop());
      break;
    case ActionType::kController:
      out.push_back(OutPort::Controller());
      break;
  }
  return out;
}

TrackedPattern TrackedPattern::Refine(const HeaderPattern& sub) const {
  auto narrowed = origin.Meet(sub.Project(~rewritten));
  assert(narrowed.has_value());
  return {*narrowed, sub, rewritten};
}

TrackedPattern TrackedPattern::Rewrite(const HeaderPattern& rewrite) const {
  return {origin, current.Rewritten(rewrite), rewritten | rewrite.care()};
}

std::vector<TrackedOutput> ApplyTracked(const TransferFunction& tf,
                                        const TrackedPattern& in,
                                        PortId ingress, bool with_default) {
  std::vector<TrackedOutput> out;
  const auto& cases = tf.cases();
  for (size_t i = 0; i < cases.size(); ++i) {
    const TransferCase& c = cases[i];
    if (!c.AppliesTo(ingress)) continue;
    auto hit = in.current.Meet(c.match);
    if (!hit) continue;
    std::vector<HeaderPattern> pieces = {*hit};
    for (size_t j : c.shadowed_by) {
      if (!cases[j].AppliesTo(ingress)) continue;
      std::vector<HeaderPattern> next;
      for (const HeaderPattern& p : pieces) {
        for (const HeaderPattern& rest : Subtract(p, cases[j].match)) {
          next.push_back(rest);
        }
      }
      pieces = std::move(next);
      if (pieces.empty()) break;
    }
    if (pieces.empty()) continue;
    const std::vector<OutPort> outs = tf.Outputs(c, ingress);
    for (const HeaderPattern& p : pieces) {
      TrackedPattern t = in.Refine(p);
      if (c.rewrite) t = t.Rewrite(*c.rewrite);
      for (const OutPort& o : outs) out.push_back({o, t, i});
    }
  }
  if (with_default) {
    std::vector<HeaderPattern> rest = {in.current};
    for (const TransferCase& c : cases) {
      if (!c.AppliesTo(ingress)) continue;
      std::vector<HeaderPattern> next;
      for (const HeaderPattern& p : rest) {
        for (const HeaderPattern& r : Subtract(p, c.match)) next.push_back(r);
      }
      rest = std::move(next);
      if (rest.empty()) break;
    }
    for (const HeaderPattern& p : rest) {
      out.push_back({OutPort::Drop(), in.Refine(p), std::nullopt});
    }
  }
  return out;
}

std::vector<TransferResult> ApplyTransfer(const TransferFunction& tf,
                                          const HeaderSpace& in,
                                          PortId ingress) {
  constexpr size_t kDefault = std::numeric_limits<size_t>::max();
  struct Slot {
    size_t first_case;
    HeaderSpace space;
  };
  std::map<OutPort, Slot> slots;
  for (const HeaderPattern& p : in.patterns()) {
    for (const TrackedOutput& o :
         ApplyTracked(tf, TrackedPattern::Start(p), ingress, true)) {
      const size_t rank = o.case_index.value_or(kDefault);
      auto [it, inserted] =
          slots.try_emplace(o.out, Slot{rank, HeaderSpace(in.width())});
      it->second.first_case = std::min(it->second.first_case, rank);
      it->second.space.Add(o.pattern.current);
    }
  }
  std::vector<std::pair<size_t, TransferResult>> ordered;
  for (auto& [out, slot] : slots) {
    ordered.push_back({slot.first_case, {out, std::move(slot.space)}});
  }
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto& a, const auto& b) {
                     return a.first < b.first;
                   });
  std::vector<TransferResult> results;
  for (auto& [_, r] : ordered) results.push_back(std::move(r));
  return results;
}

}  // namespace wedgetail
