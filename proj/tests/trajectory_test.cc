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


#include "wedgetail/trajectory.h"

#include <string>

#include "gtest/gtest.h"

namespace wedgetail {
namespace {

// Reference FNV-1a and splitmix64, written from their published definitions.
uint64_t RefFnv1a(const std::string& bytes) {
  uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

uint64_t RefSplitMix(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string Be(uint64_t v, int bytes) {
  std::string out;
  for (int i = bytes - 1; i >= 0; --i) out.push_back(static_cast<char>(v >> (8 * i)));
  return out;
}

PacketLabel RefLabel(const PacketHeaderFields& f, int bits) {
  const bool ports = f.protocol == 6 || f.protocol == 17;
  const std::string bytes = Be(f.src_ip, 4) + Be(f.dst_ip, 4) + Be(f.protocol, 1) +
                            Be(f.ip_id, 2) + Be(ports ? f.src_port : 0, 2) +
                            Be(ports ? f.dst_port : 0, 2);
  return static_cast<PacketLabel>(RefSplitMix(RefFnv1a(bytes)) >> (64 - bits));
}

TEST(LabelTest, ReferenceHashesMatchKnownVectors) {
  EXPECT_EQ(RefFnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(RefFnv1a("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(RefSplitMix(0), 0xe220a8397b1dcdafULL);
}

TEST(LabelTest, MatchesReference) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 2000; ++i) {
    PacketHeaderFields f;
    f.src_ip = static_cast<uint32_t>(rng());
    f.dst_ip = static_cast<uint32_t>(rng());
    f.protocol = static_cast<uint8_t>(i % 3 == 0 ? 1 : (i % 3 == 1 ? 6 : 17));
    f.ip_id = static_cast<uint16_t>(rng());
    f.src_port = static_cast<uint16_t>(rng());
    f.dst_port = static_cast<uint16_t>(rng());
    f.ttl = static_cast<uint8_t>(rng());
    const int bits = 1 + i % 32;
    ASSERT_EQ(LabelPacket(f, bits), RefLabel(f, bits)) << i;
  }
}

TEST(LabelTest, TtlAndNonTransportPortsIgnored) {
  PacketHeaderFields f{10, 20, 1, 7, 80, 443, 64};
  PacketHeaderFields g = f;
  g.ttl = 3;
  g.src_port = 9;
  EXPECT_EQ(LabelPacket(f), LabelPacket(g));
  f.protocol = g.protocol = 6;
  EXPECT_NE(LabelPacket(f, 32), LabelPacket(g, 32));
}

TEST(ModelHeaderTest, TopBitsOfDestinationThenSource) {
  PacketHeaderFields f;
  f.dst_ip = 0xC0A80001;
  f.src_ip = 0x0A000001;
  EXPECT_EQ(ModelHeader(f, 32), 0xC0A80001u);
  EXPECT_EQ(ModelHeader(f, 8), 0xC0u);
  EXPECT_EQ(ModelHeader(f, 40), (uint64_t{0xC0A80001} << 8) | 0x0A);
  for (int bits : {1, 8, 24, 32, 40, 64}) {
    const uint64_t h = 0x5a5a5a5a5a5a5a5aULL >> (64 - bits);
    EXPECT_EQ(ModelHeader(WithModelHeader(f, h, bits), bits), h) << bits;
  }
  // Bits below the model header survive.
  EXPECT_EQ(WithModelHeader(f, 0x12, 8).dst_ip & 0xFFFFFF, 0xA80001u);
}

TEST(ObservationTest, FormatRoundTrip) {
  const std::vector<Observation> log = {
      {5, DeviceId("a"), 0, OutPort::Port(2), 100},
      {5, DeviceId("b"), 1, OutPort::Drop(), 200},
      {6, ControllerId(), 0, OutPort::Absorbed(), 300},
  };
  auto parsed = ParseObservationLog(FormatObservationLog(log));
  ASSERT_TRUE(parsed.ok()) << parsed.status();
  EXPECT_EQ(*parsed, log);
  EXPECT_FALSE(ParseObservation("1\ta\tx\t2\t3").ok());
  EXPECT_FALSE(ParseObservation("1\ta\t2").ok());
}

// a:1 - 1:b:2 - 1:c, plus b:3 - 1:d.
NetworkState Chain() {
  NetworkState s(8);
  for (const char* d : {"a", "b", "c", "d"}) {
    EXPECT_TRUE(s.AddDevice(DeviceId(d), 4).ok());
  }
  EXPECT_TRUE(s.AddLink({DeviceId("a"), 1}, {DeviceId("b"), 1}).ok());
  EXPECT_TRUE(s.AddLink({DeviceId("b"), 2}, {DeviceId("c"), 1}).ok());
  EXPECT_TRUE(s.AddLink({DeviceId("b"), 3}, {DeviceId("d"), 1}).ok());
  return s;
}

std::vector<std::string> Names(const Walk& w) {
  std::vector<std::string> out;
  for (const DeviceId& d : w.devices) out.push_back(d.str());
  return out;
}

TEST(ReconstructTest, LinearDelivery) {
  const NetworkState s = Chain();
  const std::vector<Observation> log = {
      {1, DeviceId("b"), 1, OutPort::Port(2), 20},
      {1, DeviceId("a"), 0, OutPort::Port(1), 10},
      {1, DeviceId("c"), 1, OutPort::Port(0), 30},
      {2, DeviceId("d"), 1, OutPort::Port(0), 15},
  };
  const Reconstruction r = ReconstructActual(log, 1, s);
  ASSERT_TRUE(r.ok()) << r.reason;
  ASSERT_EQ(r.trajectory.walks.size(), 1u);
  EXPECT_EQ(Names(r.trajectory.walks[0]), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(r.trajectory.walks[0].outcome, WalkOutcome::kDelivered);
  EXPECT_EQ(r.trajectory.root().device, DeviceId("a"));
}

TEST(ReconstructTest, CopyAtDeviceBranches) {
  const NetworkState s = Chain();
  // b sends the packet on to c and a copy to d.
  const std::vector<Observation> log = {
      {1, DeviceId("a"), 0, OutPort::Port(1), 10},
      {1, DeviceId("b"), 1, OutPort::Port(2), 20},
      {1, DeviceId("b"), 1, OutPort::Port(3), 20},
      {1, DeviceId("c"), 1, OutPort::Port(0), 30},
      {1, DeviceId("d"), 1, OutPort::Drop(), 31},
  };
  const Reconstruction r = ReconstructActual(log, 1, s);
  ASSERT_TRUE(r.ok()) << r.reason;
  ASSERT_EQ(r.trajectory.walks.size(), 2u);
  EXPECT_EQ(Names(r.trajectory.walks[0]), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(Names(r.trajectory.walks[1]), (std::vector<std::string>{"a", "b", "d"}));
  EXPECT_EQ(r.trajectory.walks[1].outcome, WalkOutcome::kDropped);
}

TEST(ReconstructTest, CopyAtRootBranches) {
  const NetworkState s = Chain();
  const std::vector<Observation> log = {
      {1, DeviceId("b"), 0, OutPort::Port(2), 10},
      {1, DeviceId("b"), 0, OutPort::Controller(), 10},
      {1, DeviceId("c"), 1, OutPort::Port(0), 20},
      {1, ControllerId(), 0, OutPort::Absorbed(), 25},
  };
  const Reconstruction r = ReconstructActual(log, 1, s);
  ASSERT_TRUE(r.ok()) << r.reason;
  ASSERT_EQ(r.trajectory.walks.size(), 2u);
  EXPECT_EQ(Names(r.trajectory.walks[0]), (std::vector<std::string>{"b", "c"}));
  EXPECT_EQ(r.trajectory.walks[1].outcome, WalkOutcome::kController);
}

TEST(ReconstructTest, VanishedAndInvalid) {
  const NetworkState s = Chain();
  const std::vector<Observation> gone = {
      {1, DeviceId("a"), 0, OutPort::Port(1), 10},
  };
  const Reconstruction r = ReconstructActual(gone, 1, s);
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.trajectory.walks[0].outcome, WalkOutcome::kVanished);
  EXPECT_EQ(r.trajectory.walks[0].next_device, DeviceId("b"));

  EXPECT_EQ(ReconstructActual(gone, 2, s).status,
            Reconstruction::Status::kNoTrajectory);
  // Two unrelated packets under one label.
  const std::vector<Observation> clash = {
      {1, DeviceId("a"), 0, OutPort::Port(1), 10},
      {1, DeviceId("d"), 0, OutPort::Port(1), 12},
  };
  EXPECT_EQ(ReconstructActual(clash, 1, s).status,
            Reconstruction::Status::kInvalid);
}

TEST(TrajectoryStoreTest, DeduplicatesByLabelAndPath) {
  TrajectoryStore store;
  Trajectory t{1, 0, {{DeviceId("a"), 1}, {DeviceId("b"), 2}}};
  EXPECT_TRUE(store.Insert(t));
  t.hops[1].timestamp = 9;
  EXPECT_FALSE(store.Insert(t));
  t.label = 2;
  EXPECT_TRUE(store.Insert(t));
  EXPECT_EQ(store.size(), 2u);
}

}  // namespace
}  // namespace wedgetail
