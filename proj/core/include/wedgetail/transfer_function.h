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

// Per-device transfer functions over header spaces. A device's flow table is
// turned into an ordered list of cases; applying the function to a header
// space splits it so that each header is handled by exactly the first case
// that matches it, and unmatched headers fall to the default action (drop).

#ifndef WEDGETAIL_TRANSFER_FUNCTION_H_
#define WEDGETAIL_TRANSFER_FUNCTION_H_

#include <cstdint>
#include <optional>
#include <vector>

#include "wedgetail/header_space.h"
#include "wedgetail/net_model.h"

namespace wedgetail {

struct TransferCase {
  std::optional<PortId> in_port;
  HeaderPattern match;
  Action action;
  std::optional<HeaderPattern> rewrite;
  // Earlier cases whose match overlaps this one and whose in_port does not
  // exclude it. Only these need subtracting when the case is evaluated.
  std::vector<size_t> shadowed_by;

  bool AppliesTo(PortId ingress) const {
    return !in_port || *in_port == ingress;
  }
};

class TransferFunction {
 public:
  static TransferFunction FromDevice(const ForwardingDevice& device);

  const DeviceId& device() const { return device_; }
  const std::vector<PortId>& ports() const { return ports_; }
  const std::vector<TransferCase>& cases() const { return cases_; }

  // Output ports for a case given the ingress port. Group and flood yield
  // several ports; drop and controller yield sinks.
  std::vector<OutPort> Outputs(const TransferCase& c, PortId ingress) const;

 private:
  DeviceId device_;
  std::vector<PortId> ports_;
  std::vector<TransferCase> cases_;
};

// A pattern being pushed through the network together with the injected
// headers it came from. `current` always equals `origin` with the bits in
// `rewritten` overwritten, so refining `current` maps back onto `origin`.
struct TrackedPattern {
  HeaderPattern origin;
  HeaderPattern current;
  uint64_t rewritten = 0;

  static TrackedPattern Start(const HeaderPattern& p) { return {p, p, 0}; }
  // Narrows to `sub`, which must be contained in `current`.
  TrackedPattern Refine(const HeaderPattern& sub) const;
  TrackedPattern Rewrite(const HeaderPattern& rewrite) const;
};

struct TrackedOutput {
  OutPort out;
  TrackedPattern pattern;
  // Index of the case that produced the output; nullopt for the default.
  std::optional<size_t> case_index;
};

// Splits `in` among the cases applicable at `ingress`. When `with_default`
// is false the headers that miss every case are not materialized (they
// would be dropped anyway and can be expensive to enumerate).
std::vector<TrackedOutput> ApplyTracked(const TransferFunction& tf,
                                        const TrackedPattern& in,
                                        PortId ingress, bool with_default);

struct TransferResult {
  OutPort out;
  HeaderSpace space;  // after any rewrite
};

// Header-space form. Results are grouped per output, ordered by the first
// case that contributes to them; the default drop remainder comes last.
std::vector<TransferResult> ApplyTransfer(const TransferFunction& tf,
                                          const HeaderSpace& in,
                                          PortId ingress);

}  // namespace wedgetail

#endif  // WEDGETAIL_TRANSFER_FUNCTION_H_
