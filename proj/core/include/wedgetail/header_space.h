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

// Wildcard bit-vector algebra over L-bit packet headers.
//
// A header is an L-bit string. Bit 0 of the textual form ("10x...") is the
// most significant bit of the numeric form, so `HeaderPattern::Parse("10x")`
// matches the concrete headers 0b100 and 0b101.

#ifndef WEDGETAIL_HEADER_SPACE_H_
#define WEDGETAIL_HEADER_SPACE_H_

#include <compare>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"

namespace wedgetail {

inline constexpr int kMaxHeaderBits = 64;

// A ternary pattern over {0, 1, x}. `care` has a 1 for every fixed bit and
// `value` holds the fixed bits (always zero outside `care`).
class HeaderPattern {
 public:
  // All-wildcard pattern. `width` must be in [1, kMaxHeaderBits].
  static absl::StatusOr<HeaderPattern> Wildcard(int width);
  static absl::StatusOr<HeaderPattern> Parse(absl::string_view bits);
  static HeaderPattern Exact(int width, uint64_t header);
  static HeaderPattern FromMasks(int width, uint64_t value, uint64_t care);

  int width() const { return width_; }
  uint64_t value() const { return value_; }
  uint64_t care() const { return care_; }
  uint64_t width_mask() const;
  int wildcard_count() const;

  bool Matches(uint64_t header) const {
    return ((header ^ value_) & care_) == 0;
  }
  // True when every header matched by `other` is matched by this pattern.
  bool Contains(const HeaderPattern& other) const;
  bool Overlaps(const HeaderPattern& other) const;

  // Positionwise meet. Empty when some bit is fixed to different values.
  std::optional<HeaderPattern> Meet(const HeaderPattern& other) const;

  // Fixes the bits that `rewrite` cares about to the rewrite's values.
  HeaderPattern Rewritten(const HeaderPattern& rewrite) const;
  uint64_t RewriteHeader(uint64_t header) const;

  // Keeps only the fixed bits selected by `mask`; others become wildcards.
  HeaderPattern Project(uint64_t mask) const;

  std::string ToString() const;

  friend bool operator==(const HeaderPattern&, const HeaderPattern&) = default;
  friend auto operator<=>(const HeaderPattern&, const HeaderPattern&) = default;

 private:
  HeaderPattern(int width, uint64_t value, uint64_t care)
      : width_(width), value_(value & care), care_(care) {}

  int width_ = 0;
  uint64_t value_ = 0;
  uint64_t care_ = 0;
};

// Checked meet: width mismatch is an error, a conflict yields nullopt.
absl::StatusOr<std::optional<HeaderPattern>> Intersect(const HeaderPattern& a,
                                                       const HeaderPattern& b);

// a - b as a list of pairwise disjoint patterns.
std::vector<HeaderPattern> Subtract(const HeaderPattern& a,
                                    const HeaderPattern& b);

// A finite union of patterns kept in canonical form: no member is contained
// in another member. Members may still overlap partially.
class HeaderSpace {
 public:
  explicit HeaderSpace(int width = 32) : width_(width) {}
  static HeaderSpace Of(const HeaderPattern& pattern);
  static HeaderSpace All(int width);

  int width() const { return width_; }
  bool empty() const { return patterns_.empty(); }
  const std::vector<HeaderPattern>& patterns() const { return patterns_; }

  void Add(const HeaderPattern& pattern);
  void Add(const HeaderSpace& other);

  HeaderSpace Intersect(const HeaderPattern& pattern) const;
  HeaderSpace Intersect(const HeaderSpace& other) const;
  HeaderSpace Minus(const HeaderPattern& pattern) const;
  HeaderSpace Minus(const HeaderSpace& other) const;
  HeaderSpace Rewritten(const HeaderPattern& rewrite) const;

  bool Contains(uint64_t header) const;
  bool Overlaps(const HeaderSpace& other) const;
  // Set equality. Exact, but cost grows with pattern count.
  bool Equivalent(const HeaderSpace& other) const;

  // Same set expressed as pairwise disjoint patterns.
  std::vector<HeaderPattern> Disjoint() const;
  // Number of concrete headers; exact up to 2^53.
  double Cardinality() const;

  // Uniform draw over the concrete headers in the space. Requires !empty().
  uint64_t Sample(std::mt19937_64& rng) const;

  std::string ToString() const;

 private:
  int width_;
  std::vector<HeaderPattern> patterns_;
};

}  // namespace wedgetail

#endif  // WEDGETAIL_HEADER_SPACE_H_
