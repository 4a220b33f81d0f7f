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

#include "wedgetail/header_space.h"

#include <bit>
#include <cassert>
#include <cmath>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"

namespace wedgetail {
namespace {

uint64_t MaskForWidth(int width) {
  return width >= 64 ? ~uint64_t{0} : (uint64_t{1} << width) - 1;
}

absl::Status CheckWidth(int width) {
  if (width < 1 || width > kMaxHeaderBits) {
    return absl::InvalidArgumentError(
        absl::StrCat("header width ", width, " outside [1, ", kMaxHeaderBits,
                     "]"));
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<HeaderPattern> HeaderPattern::Wildcard(int width) {
  if (absl::Status s = CheckWidth(width); !s.ok()) return s;
  return HeaderPattern(width, 0, 0);
}

absl::StatusOr<HeaderPattern> HeaderPattern::Parse(absl::string_view bits) {
  const int width = static_cast<int>(bits.size());
  if (absl::Status s = CheckWidth(width); !s.ok()) return s;
  uint64_t value = 0;
  uint64_t care = 0;
  for (int i = 0; i < width; ++i) {
    const uint64_t bit = uint64_t{1} << (width - 1 - i);
    switch (bits[i]) {
      case '0':
        care |= bit;
        break;
      case '1':
        care |= bit;
        value |= bit;
        break;
      case 'x':
      case 'X':
      case '*':
        break;
      default:
        return absl::InvalidArgumentError(absl::StrCat(
            "bad character '", std::string(1, bits[i]), "' at position ", i,
            " of header pattern \"", bits, "\""));
    }
  }
  return HeaderPattern(width, value, care);
}

HeaderPattern HeaderPattern::Exact(int width, uint64_t header) {
  const uint64_t mask = MaskForWidth(width);
  return HeaderPattern(width, header & mask, mask);
}

HeaderPattern HeaderPattern::FromMasks(int width, uint64_t value,
                                       uint64_t care) {
  const uint64_t mask = MaskForWidth(width);
  return HeaderPattern(width, value & mask, care & mask);
}

uint64_t HeaderPattern::width_mask() const { return MaskForWidth(width_); }

int HeaderPattern::wildcard_count() const {
  return width_ - std::popcount(care_);
}

bool HeaderPattern::Contains(const HeaderPattern& other) const {
  // Every bit we fix must be fixed identically in `other`.
  return (care_ & ~other.care_) == 0 && ((value_ ^ other.value_) & care_) == 0;
}

bool HeaderPattern::Overlaps(const HeaderPattern& other) const {
  return ((value_ ^ other.value_) & care_ & other.care_) == 0;
}

std::optional<HeaderPattern> HeaderPattern::Meet(
    const HeaderPattern& other) const {
  assert(width_ == other.width_);
  if (!Overlaps(other)) return std::nullopt;
  return HeaderPattern(width_, value_ | other.value_, care_ | other.care_);
}

HeaderPattern HeaderPattern::Rewritten(const HeaderPattern& rewrite) const {
  const uint64_t keep = ~rewrite.care_;
  return HeaderPattern(width_, (value_ & keep) | rewrite.value_,
                       care_ | rewrite.care_);
}

uint64_t HeaderPattern::RewriteHeader(uint64_t header) const {
  return (header & ~care_) | value_;
}

HeaderPattern HeaderPattern::Project(uint64_t mask) const {
  return HeaderPattern(width_, value_ & mask, care_ & mask);
}

std::string HeaderPattern::ToString() const {
  std::string out(width_, 'x');
  for (int i = 0; i < width_; ++i) {
    const uint64_t bit = uint64_t{1} << (width_ - 1 - i);
    if (care_ & bit) out[i] = (value_ & bit) ? '1' : '0';
  }
  return out;
}

absl::StatusOr<std::optional<HeaderPattern>> Intersect(const HeaderPattern& a,
                                                       const HeaderPattern& b) {
  if (a.width() != b.width()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "width mismatch: ", a.width(), " vs ", b.width()));
  }
  return a.Meet(b);
}

std::vector<HeaderPattern> Subtract(const HeaderPattern& a,
                                    const HeaderPattern& b) {
  assert(a.width() == b.width());
  if (!a.Overlaps(b)) return {a};
  if (b.Contains(a)) return {};
  // Walk the bits b fixes but a leaves free. Piece i agrees with b on the
  // earlier such bits and disagrees on bit i, which keeps pieces disjoint.
  std::vector<HeaderPattern> out;
  uint64_t free_in_a = b.care() & ~a.care();
  uint64_t value = a.value();
  uint64_t care = a.care();
  for (int bit = a.width() - 1; bit >= 0; --bit) {
    const uint64_t m = uint64_t{1} << bit;
    if (!(free_in_a & m)) continue;
    const uint64_t flipped = (~b.value()) & m;
    out.push_back(HeaderPattern::FromMasks(a.width(), value | flipped,
                                           care | m));
    value |= b.value() & m;
    care |= m;
  }
  return out;
}

HeaderSpace HeaderSpace::Of(const HeaderPattern& pattern) {
  HeaderSpace hs(pattern.width());
  hs.patterns_.push_back(pattern);
  return hs;
}

HeaderSpace HeaderSpace::All(int width) {
  return Of(HeaderPattern::FromMasks(width, 0, 0));
}

void HeaderSpace::Add(const HeaderPattern& pattern) {
  assert(pattern.width() == width_);
  for (const HeaderPattern& p : patterns_) {
    if (p.Contains(pattern)) return;
  }
  std::erase_if(patterns_,
                [&](const HeaderPattern& p) { return pattern.Contains(p); });
  patterns_.push_back(pattern);
}

void HeaderSpace::Add(const HeaderSpace& other) {
  for (const HeaderPattern& p : other.patterns_) Add(p);
}

HeaderSpace HeaderSpace::Intersect(const HeaderPattern& pattern) const {
  HeaderSpace out(width_);
  for (const HeaderPattern& p : patterns_) {
    if (auto m = p.Meet(pattern)) out.Add(*m);
  }
  return out;
}

HeaderSpace HeaderSpace::Intersect(const HeaderSpace& other) const {
  HeaderSpace out(width_);
  for (const HeaderPattern& q : other.patterns_) out.Add(Intersect(q));
  return out;
}

HeaderSpace HeaderSpace::Minus(const HeaderPattern& pattern) const {
  HeaderSpace out(width_);
  for (const HeaderPattern& p : patterns_) {
    for (const HeaderPattern& piece : Subtract(p, pattern)) out.Add(piece);
  }
  return out;
}

HeaderSpace HeaderSpace::Minus(const HeaderSpace& other) const {
  HeaderSpace out = *this;
  for (const HeaderPattern& q : other.patterns_) {
    if (out.empty()) break;
    out = out.Minus(q);
  }
  return out;
}

HeaderSpace HeaderSpace::Rewritten(const HeaderPattern& rewrite) const {
  HeaderSpace out(width_);
  for (const HeaderPattern& p : patterns_) out.Add(p.Rewritten(rewrite));
  return out;
}

bool HeaderSpace::Contains(uint64_t header) const {
  for (const HeaderPattern& p : patterns_) {
    if (p.Matches(header)) return true;
  }
  return false;
}

bool HeaderSpace::Overlaps(const HeaderSpace& other) const {
  for (const HeaderPattern& p : patterns_) {
    for (const HeaderPattern& q : other.patterns_) {
      if (p.Overlaps(q)) return true;
    }
  }
  return false;
}

bool HeaderSpace::Equivalent(const HeaderSpace& other) const {
  return width_ == other.width_ && Minus(other).empty() &&
         other.Minus(*this).empty();
}

std::vector<HeaderPattern> HeaderSpace::Disjoint() const {
  std::vector<HeaderPattern> out;
  for (const HeaderPattern& p : patterns_) {
    std::vector<HeaderPattern> pieces = {p};
    for (const HeaderPattern& taken : out) {
      std::vector<HeaderPattern> next;
      for (const HeaderPattern& piece : pieces) {
        for (const HeaderPattern& rest : Subtract(piece, taken)) {
          next.push_back(rest);
        }
      }
      pieces = std::move(next);
      if (pieces.empty()) break;
    }
    out.insert(out.end(), pieces.begin(), pieces.end());
  }
  return out;
}

double HeaderSpace::Cardinality() const {
  double total = 0;
  for (const HeaderPattern& p : Disjoint()) {
    total += std::ldexp(1.0, p.wildcard_count());
  }
  return total;
}

uint64_t HeaderSpace::Sample(std::mt19937_64& rng) const {
  assert(!empty());
  const std::vector<HeaderPattern> parts = Disjoint();
  double total = 0;
  for (const HeaderPattern& p : parts) {
    total += std::ldexp(1.0, p.wildcard_count());
  }
  // 53 random bits scaled to [0, total).
  const double r = static_cast<double>(rng() >> 11) * 0x1.0p-53 * total;
  const HeaderPattern* chosen = &parts.back();
  double acc = 0;
  for (const HeaderPattern& p : parts) {
    acc += std::ldexp(1.0, p.wildcard_count());
    if (r < acc) {
      chosen = &p;
      break;
    }
  }
  const uint64_t free_bits = chosen->width_mask() & ~chosen->care();
  return chosen->value() | (rng() & free_bits);
}

std::string HeaderSpace::ToString() const {
  if (patterns_.empty()) return "{}";
  std::vector<std::string> parts;
  parts.reserve(patterns_.size());
  for (const HeaderPattern& p : patterns_) parts.push_back(p.ToString());
  return absl::StrCat("{", absl::StrJoin(parts, " u "), "}");
}

}  // namespace wedgetail
