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


#include "wedgetail/detection.h"

#include <cmath>
#include <string>
#include <vector>

#include "gtest/gtest.h"

namespace wedgetail {
namespace {

using Path = std::vector<DeviceId>;

Path P(std::initializer_list<const char*> names) {
  Path out;
  for (const char* n : names) out.emplace_back(n);
  return out;
}

TrajectoryPair Pair(Path expected, std::vector<ActualWalk> actual) {
  TrajectoryPair p;
  p.source = expected.front();
  p.destination = expected.back();
  p.expected = {std::move(expected)};
  p.actual = std::move(actual);
  p.t_e = p.t_a = 1000;
  p.t_d = 500;
  return p;
}

TEST(ClassifyTest, ExactMatchIsBenign) {
  const TrajectoryPair p = Pair(P({"a", "b", "c"}), {ActualWalk::Of(P({"a", "b", "c"}))});
  EXPECT_EQ(Classify(p), VerdictKind::kBenign);
  EXPECT_TRUE(Judge(p).malicious_devices.empty());
}

// Worked example: E = a b c d e, A = a b f e; b diverted the packet.
TEST(ClassifyTest, MisrouteExampleLocalizesB) {
  const TrajectoryPair p = Pair(P({"a", "b", "c", "d", "e"}),
                                {ActualWalk::Of(P({"a", "b", "f", "e"}))});
  EXPECT_EQ(Classify(p), VerdictKind::kMisroute);
  const Verdict v = Judge(p);
  EXPECT_EQ(v.malicious_devices, P({"b"}));
  EXPECT_EQ(v.unverified, P({"c", "d"}));
}

TEST(ClassifyTest, CopyToThirdDeviceIsReplay) {
  const TrajectoryPair p = Pair(P({"a", "b", "c"}),
                                {ActualWalk::Of(P({"a", "b", "c"})),
                                 ActualWalk::Of(P({"a", "b", "f"}))});
  EXPECT_EQ(Classify(p), VerdictKind::kReplay);
  EXPECT_EQ(Judge(p).malicious_devices, P({"b"}));
}

TEST(ClassifyTest, DuplicateAlongPathIsReplay) {
  const TrajectoryPair p = Pair(P({"a", "b", "c"}),
                                {ActualWalk::Of(P({"a", "b", "c"})),
                                 ActualWalk::Of(P({"a", "b", "c"}))});
  EXPECT_EQ(Classify(p), VerdictKind::kReplay);
}

TEST(ClassifyTest, CopyToControllerIsReplay) {
  const TrajectoryPair p =
      Pair(P({"a", "b", "c"}),
           {ActualWalk::Of(P({"a", "b", "c"})),
            ActualWalk::Of({DeviceId("a"), DeviceId("b"), ControllerId()},
                           WalkOutcome::kController)});
  EXPECT_EQ(Classify(p), VerdictKind::kReplay);
  EXPECT_EQ(Judge(p).malicious_devices, P({"b"}));
}

TEST(ClassifyTest, BounceOffPathIsMisroute) {
  const TrajectoryPair p = Pair(P({"a", "b"}), {ActualWalk::Of(P({"a", "b", "a", "b"}))});
  EXPECT_EQ(Classify(p), VerdictKind::kMisroute);
  EXPECT_EQ(Judge(p).malicious_devices, P({"b"}));
}

TEST(ClassifyTest, TruncatedWalkIsDrop) {
  const TrajectoryPair p = Pair(P({"a", "b", "c", "d"}),
                                {ActualWalk::Of(P({"a", "b"}), WalkOutcome::kDropped)});
  EXPECT_EQ(Classify(p), VerdictKind::kDrop);
  EXPECT_EQ(Judge(p).malicious_devices, P({"b"}));
  // The literal rule needs A outside E, which a truncated walk is not.
  ClassifyOptions strict;
  strict.strict_drop = true;
  EXPECT_NE(Classify(p, strict), VerdictKind::kDrop);
}

TEST(ClassifyTest, VanishedWalkBlamesSender) {
  ActualWalk w = ActualWalk::Of(P({"a", "b"}), WalkOutcome::kVanished);
  w.next_device = DeviceId("c");
  const TrajectoryPair p = Pair(P({"a", "b", "c", "d"}), {w});
  EXPECT_EQ(Classify(p), VerdictKind::kDrop);
  const std::vector<DeviceId> blamed = Judge(p).malicious_devices;
  ASSERT_FALSE(blamed.empty());
}

TEST(ClassifyTest, DisjointWalkIsGeneration) {
  const TrajectoryPair p = Pair(P({"a", "b", "c"}), {ActualWalk::Of(P({"x", "y"}))});
  EXPECT_EQ(Classify(p), VerdictKind::kGeneration);
  EXPECT_EQ(Judge(p).malicious_devices, P({"x"}));
}

TEST(ClassifyTest, SlowButIntactIsDelay) {
  TrajectoryPair p = Pair(P({"a", "b", "c"}), {ActualWalk::Of(P({"a", "b", "c"}))});
  p.t_a = p.t_e + p.t_d;  // at the bound: still benign
  EXPECT_EQ(Classify(p), VerdictKind::kBenign);
  p.t_a = p.t_e + p.t_d + 1;
  EXPECT_EQ(Classify(p), VerdictKind::kDelay);
}

TEST(ClassifyTest, ExplainedFloodCopiesAreBenign) {
  TrajectoryPair p = Pair(P({"a", "b", "c"}),
                          {ActualWalk::Of(P({"a", "b", "c"})),
                           ActualWalk::Of(P({"a", "b", "d"}))});
  p.explained = {P({"a", "b", "c"}), P({"a", "b", "d"})};
  EXPECT_EQ(Classify(p), VerdictKind::kBenign);
}

TEST(VerdictKindTest, NamesRoundTrip) {
  for (VerdictKind k : {VerdictKind::kBenign, VerdictKind::kReplay,
                        VerdictKind::kMisroute, VerdictKind::kDrop,
                        VerdictKind::kGeneration, VerdictKind::kDelay}) {
    EXPECT_EQ(*ParseVerdictKind(VerdictKindName(k)), k);
  }
  EXPECT_FALSE(ParseVerdictKind("tampering").ok());
}

// Direct evaluation: some excess(k) > t_d (k + 1) / n, then the first hop
// with the largest own excess.
std::optional<size_t> RefLocalizeDelay(const std::vector<Nanos>& a,
                                       const std::vector<Nanos>& e, Nanos t_d) {
  const size_t n = std::min(a.size(), e.size());
  bool over = false;
  for (size_t k = 0; k < n; ++k) {
    Nanos excess = 0;
    for (size_t i = 0; i <= k; ++i) excess += a[i] - e[i];
    if (static_cast<double>(excess) * n > static_cast<double>(t_d) * (k + 1)) over = true;
  }
  if (!over) return std::nullopt;
  size_t best = 0;
  for (size_t k = 1; k < n; ++k) {
    if (a[k] - e[k] > a[best] - e[best]) best = k;
  }
  return best;
}

TEST(LocalizeDelayTest, MatchesReference) {
  EXPECT_EQ(LocalizeDelay({10, 10, 90, 10}, {10, 10, 10, 10}, 40), 2u);
  EXPECT_EQ(LocalizeDelay({10, 10, 10}, {10, 10, 10}, 0), std::nullopt);
  // Queuing on the first hop crosses its share, the implant is on the third.
  EXPECT_EQ(LocalizeDelay({25, 10, 90, 10}, {10, 10, 10, 10}, 40), 2u);
  std::mt19937_64 rng(4);
  for (int i = 0; i < 500; ++i) {
    const size_t n = 1 + rng() % 6;
    std::vector<Nanos> a(n), e(n);
    for (size_t k = 0; k < n; ++k) {
      e[k] = 1000;
      a[k] = 1000 + static_cast<Nanos>(rng() % 3000) - 500;
    }
    const Nanos t_d = static_cast<Nanos>(rng() % 4000);
    EXPECT_EQ(LocalizeDelay(a, e, t_d), RefLocalizeDelay(a, e, t_d));
  }
}

double RefBinomialTail(int k, int n, double p) {
  double total = 0;
  for (int i = k; i <= n; ++i) {
    double c = 1;
    for (int j = 1; j <= i; ++j) c = c * (n - i + j) / j;
    total += c * std::pow(p, i) * std::pow(1 - p, n - i);
  }
  return total;
}

TEST(BinomialTailTest, MatchesDirectSum) {
  EXPECT_DOUBLE_EQ(BinomialTail(0, 5, 0.3), 1.0);
  EXPECT_DOUBLE_EQ(BinomialTail(6, 5, 0.3), 0.0);
  EXPECT_NEAR(BinomialTail(2, 3, 0.5), 0.5, 1e-12);
  for (int n = 1; n <= 30; ++n) {
    for (int k = 1; k <= n; ++k) {
      for (double p : {0.001, 0.01, 0.2, 0.5, 0.9}) {
        EXPECT_NEAR(BinomialTail(k, n, p), RefBinomialTail(k, n, p),
                    1e-9 * std::max(1.0, RefBinomialTail(k, n, p)));
      }
    }
  }
}

// a:1 - 1:b:2 - 1:c; b forwards 1xxx out of 2 and drops the rest.
NetworkState Chain() {
  NetworkState s(4);
  for (const char* d : {"a", "b", "c"}) EXPECT_TRUE(s.AddDevice(DeviceId(d), 3).ok());
  EXPECT_TRUE(s.AddLink({DeviceId("a"), 1}, {DeviceId("b"), 1}).ok());
  EXPECT_TRUE(s.AddLink({DeviceId("b"), 2}, {DeviceId("c"), 1}).ok());
  auto add = [&](const char* d, const char* m, Action act) {
    EXPECT_TRUE(s.InstallRule(DeviceId(d), {1, *HeaderPattern::Parse(m),
                                            std::nullopt, act, std::nullopt})
                    .ok());
  };
  add("a", "xxxx", Action::Forward(1));
  add("b", "1xxx", Action::Forward(2));
  add("b", "0xxx", Action::Drop());
  add("c", "xxxx", Action::Forward(0));
  return s;
}

TEST(DeviatingDevicesTest, FlagsOnlyContradictions) {
  const NetworkState s = Chain();
  const std::vector<Observation> ok = {
      {1, DeviceId("a"), 0, OutPort::Port(1), 1},
      {1, DeviceId("b"), 1, OutPort::Drop(), 2},
  };
  Reconstruction r = ReconstructActual(ok, 1, s);
  ASSERT_TRUE(r.ok());
  EXPECT_TRUE(DeviatingDevices(s, 0b0000, r.trajectory).empty());
  EXPECT_EQ(DeviatingDevices(s, 0b1000, r.trajectory), P({"b"}));

  const std::vector<Observation> stray = {
      {1, DeviceId("a"), 0, OutPort::Port(1), 1},
      {1, DeviceId("b"), 1, OutPort::Port(1), 2},
      {1, DeviceId("a"), 1, OutPort::Port(1), 3},
  };
  r = ReconstructActual(stray, 1, s);
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(DeviatingDevices(s, 0b1000, r.trajectory), P({"b"}));
}

TEST(CongestionEstimatorTest, LearnsDropRatesAndBound) {
  const NetworkState s = Chain();
  ObservationLog log;
  // 40 packets a -> b -> c, 10 of them dropped at b.
  for (PacketLabel l = 1; l <= 40; ++l) {
    const Nanos t0 = l * 10'000'000;
    log.probes.push_back({l, t0, DeviceId("a"), 0});
    log.observations.push_back({l, DeviceId("a"), 0, OutPort::Port(1), t0 + 10'000});
    if (l % 4 == 0) {
      log.observations.push_back({l, DeviceId("b"), 1, OutPort::Drop(), t0 + 1'020'000});
      continue;
    }
    log.observations.push_back({l, DeviceId("b"), 1, OutPort::Port(2), t0 + 1'020'000});
    log.observations.push_back({l, DeviceId("c"), 1, OutPort::Port(0), t0 + 2'030'000});
  }
  const CongestionEstimator est = CongestionEstimator::Estimate(log, s);
  EXPECT_DOUBLE_EQ(est.DeviceDropRate(DeviceId("b")), 10.0 / 40.0);
  EXPECT_DOUBLE_EQ(est.DeviceDropRate(DeviceId("a")), 0.0);
  EXPECT_DOUBLE_EQ(est.TrajectoryDropRate(P({"a", "b", "c"})), 0.25);
  EXPECT_TRUE(est.Lossy(P({"a", "b"})));
  EXPECT_FALSE(est.Lossy(P({"a"})));
  EXPECT_EQ(est.samples(), 30u);
  // Timings are exactly nominal, so the floor applies.
  EXPECT_EQ(est.delay_bound(), CongestionOptions{}.delay_floor);
  EXPECT_EQ(est.ExpectedTime(P({"a", "b", "c"})), 2'030'000);

  const CongestionEstimator thin = CongestionEstimator::Estimate({}, s);
  EXPECT_EQ(thin.delay_bound(), CongestionOptions{}.fallback_delay_bound);
  EXPECT_FALSE(thin.warnings().empty());
}

TEST(ControllerLoadMonitorTest, MeanPlusSigmas) {
  ControllerLoadMonitor m(2.0);
  // Values 2, 4, 4, 4, 5, 5, 7, 9: mean 5, population sd 2.
  m.Calibrate({{{DeviceId("a"), 2}, {DeviceId("b"), 4}},
               {{DeviceId("a"), 4}, {DeviceId("b"), 4}},
               {{DeviceId("a"), 5}, {DeviceId("b"), 5}},
               {{DeviceId("a"), 7}, {DeviceId("b"), 9}}});
  EXPECT_DOUBLE_EQ(m.threshold(), 9.0);
  EXPECT_EQ(m.Excessive({{DeviceId("a"), 9}, {DeviceId("b"), 10}}), P({"b"}));
}

TEST(ControllerLoadMonitorTest, CountsControllerBoundWalks) {
  ActualTrajectory t;
  Walk w;
  w.devices = {DeviceId("a"), ControllerId()};
  w.outcome = WalkOutcome::kController;
  t.walks = {w, w};
  const auto counts = ControllerBoundCounts({t});
  EXPECT_EQ(counts.at(DeviceId("a")), 2);
}

}  // namespace
}  // namespace wedgetail
