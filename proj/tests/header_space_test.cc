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

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>

#include "gtest/gtest.h"

namespace wedgetail {
namespace {

// Brute-force set of concrete headers.
std::set<uint64_t> Enumerate(const HeaderSpace& s) {
  std::set<uint64_t> out;
  for (uint64_t h = 0; h < (uint64_t{1} << s.width()); ++h) {
    if (s.Contains(h)) out.insert(h);
  }
  return out;
}

std::set<uint64_t> Enumerate(const HeaderPattern& p) {
  std::set<uint64_t> out;
  for (uint64_t h = 0; h < (uint64_t{1} << p.width()); ++h) {
    if (p.Matches(h)) out.insert(h);
  }
  return out;
}

HeaderPattern RandomPattern(std::mt19937_64& rng, int width) {
  const uint64_t mask = (uint64_t{1} << width) - 1;
  return HeaderPattern::FromMasks(width, rng() & mask, rng() & rng() & mask);
}

TEST(HeaderPatternTest, ParseRoundTrip) {
  auto p = HeaderPattern::Parse("10x1");
  ASSERT_TRUE(p.ok());
  EXPECT_EQ(p->width(), 4);
  EXPECT_EQ(p->ToString(), "10x1");
  EXPECT_EQ(p->wildcard_count(), 1);
  EXPECT_TRUE(p->Matches(0b1001));
  EXPECT_TRUE(p->Matches(0b1011));
  EXPECT_FALSE(p->Matches(0b0011));
}

TEST(HeaderPatternTest, RejectsBadInput) {
  EXPECT_FALSE(HeaderPattern::Parse("10a1").ok());
  EXPECT_FALSE(HeaderPattern::Parse("").ok());
  EXPECT_FALSE(HeaderPattern::Wildcard(0).ok());
  EXPECT_FALSE(HeaderPattern::Wildcard(65).ok());
  EXPECT_FALSE(Intersect(HeaderPattern::Exact(4, 1), HeaderPattern::Exact(5, 1)).ok());
}

TEST(HeaderPatternTest, MeetConflict) {
  auto a = *HeaderPattern::Parse("1xx0");
  auto b = *HeaderPattern::Parse("0xxx");
  EXPECT_FALSE(a.Meet(b).has_value());
  auto c = *HeaderPattern::Parse("x1xx");
  EXPECT_EQ(a.Meet(c)->ToString(), "11x0");
}

TEST(HeaderPatternTest, RewriteFixesBits) {
  auto p = *HeaderPattern::Parse("1xx0");
  auto rw = *HeaderPattern::Parse("x01x");
  EXPECT_EQ(p.Rewritten(rw).ToString(), "1010");
  EXPECT_EQ(rw.RewriteHeader(0b1100), 0b1010u);
}

TEST(HeaderPatternTest, RandomAgainstEnumeration) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 300; ++i) {
    const int w = 1 + static_cast<int>(rng() % 8);
    const HeaderPattern a = RandomPattern(rng, w);
    const HeaderPattern b = RandomPattern(rng, w);
    std::set<uint64_t> ea = Enumerate(a), eb = Enumerate(b), both, diff;
    for (uint64_t h : ea) (eb.count(h) ? both : diff).insert(h);

    auto m = a.Meet(b);
    EXPECT_EQ(m.has_value(), !both.empty());
    if (m) {
      EXPECT_EQ(Enumerate(*m), both);
    }
    EXPECT_EQ(a.Overlaps(b), !both.empty());
    EXPECT_EQ(a.Contains(b), both == eb);

    std::set<uint64_t> sub;
    size_t total = 0;
    for (const HeaderPattern& p : Subtract(a, b)) {
      auto e = Enumerate(p);
      total += e.size();
      sub.insert(e.begin(), e.end());
    }
    EXPECT_EQ(sub, diff);
    EXPECT_EQ(total, diff.size()) << "pieces overlap";
  }
}

TEST(HeaderSpaceTest, SetAlgebraAgainstEnumeration) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const int w = 2 + static_cast<int>(rng() % 7);
    HeaderSpace a(w), b(w);
    for (int k = 0; k < 3; ++k) a.Add(RandomPattern(rng, w));
    for (int k = 0; k < 3; ++k) b.Add(RandomPattern(rng, w));
    const std::set<uint64_t> ea = Enumerate(a), eb = Enumerate(b);
    std::set<uint64_t> inter, minus;
    for (uint64_t h : ea) (eb.count(h) ? inter : minus).insert(h);

    EXPECT_EQ(Enumerate(a.Intersect(b)), inter);
    EXPECT_EQ(Enumerate(a.Minus(b)), minus);
    EXPECT_EQ(a.Overlaps(b), !inter.empty());
    EXPECT_DOUBLE_EQ(a.Cardinality(), static_cast<double>(ea.size()));
    EXPECT_EQ(a.Equivalent(b), ea == eb);
    HeaderSpace rebuilt(w);
    for (const HeaderPattern& p : a.Disjoint()) rebuilt.Add(p);
    EXPECT_TRUE(a.Equivalent(rebuilt));

    size_t total = 0;
    std::set<uint64_t> dis;
    for (const HeaderPattern& p : a.Disjoint()) {
      auto e = Enumerate(p);
      total += e.size();
      dis.insert(e.begin(), e.end());
    }
    EXPECT_EQ(dis, ea);
    EXPECT_EQ(total, ea.size());
  }
}

TEST(HeaderSpaceTest, CanonicalDropsContainedMembers) {
  HeaderSpace s(4);
  s.Add(*HeaderPattern::Parse("10xx"));
  s.Add(*HeaderPattern::Parse("1011"));
  s.Add(*HeaderPattern::Parse("1xxx"));
  ASSERT_EQ(s.patterns().size(), 1u);
  EXPECT_EQ(s.patterns()[0].ToString(), "1xxx");
}

TEST(HeaderSpaceTest, SampleIsUniform) {
  HeaderSpace s(4);
  s.Add(*HeaderPattern::Parse("0xxx"));
  s.Add(*HeaderPattern::Parse("00xx"));  // contained, must not skew
  s.Add(*HeaderPattern::Parse("1111"));
  std::mt19937_64 rng(3);
  std::map<uint64_t, int> counts;
  const int n = 90000;
  for (int i = 0; i < n; ++i) counts[s.Sample(rng)]++;
  ASSERT_EQ(counts.size(), 9u);
  for (const auto& [h, c] : counts) {
    EXPECT_TRUE(s.Contains(h));
    EXPECT_NEAR(c, n / 9.0, 5 * std::sqrt(n / 9.0)) << h;
  }
}

TEST(HeaderSpaceTest, SampleOverlappingMembers) {
  HeaderSpace s(4);
  s.Add(*HeaderPattern::Parse("0xxx"));
  s.Add(*HeaderPattern::Parse("x0xx"));
  std::mt19937_64 rng(5);
  std::map<uint64_t, int> counts;
  const int n = 120000;
  for (int i = 0; i < n; ++i) counts[s.Sample(rng)]++;
  ASSERT_EQ(counts.size(), 12u);
  for (const auto& [h, c] : counts) {
    EXPECT_NEAR(c, n / 12.0, 5 * std::sqrt(n / 12.0)) << h;
  }
}

}  // namespace
}  // namespace wedgetail
