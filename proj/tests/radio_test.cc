#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "test_util.h"
#include "vrcg/radio.h"

namespace vrcg {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

TEST(PathLoss, HandEvaluations) {
  EXPECT_NEAR(PathLossDb(1.0, 1.0, 1.5, true), 32.4, 1e-12);
  EXPECT_NEAR(PathLossDb(100.0, 3.5, 1.5, true), 85.28, 0.01);
  EXPECT_NEAR(PathLossDb(10.0, 1.0, 1.5, false), 57.7, 0.01);
  // The height term only matters away from 1.5 m.
  EXPECT_NEAR(PathLossDb(10.0, 1.0, 2.5, false), 57.4, 0.01);
}

TEST(PathLoss, RejectsNonPositiveInputs) {
  EXPECT_THROW(PathLossDb(0.0, 3.5, 1.5, true), std::invalid_argument);
  EXPECT_THROW(PathLossDb(-1.0, 3.5, 1.5, false), std::invalid_argument);
  EXPECT_THROW(PathLossDb(10.0, 0.0, 1.5, true), std::invalid_argument);
}

TEST(PathLoss, MonotoneInDistance) {
  for (bool los : {true, false}) {
    double prev = -kInf;
    for (double d = 1.0; d < 2000.0; d *= 1.3) {
      double pl = PathLossDb(d, 3.5, 1.5, los);
      EXPECT_GE(pl, prev);
      prev = pl;
    }
  }
}

// One BS with the user placed `d` meters east of it.
Scenario OneLink(double d) {
  Scenario s = GenerateSynthetic(1, 1, 1, 1, 1000, 1000);
  s.users[0].x_m = s.base_stations[0].x_m + d;
  s.users[0].y_m = s.base_stations[0].y_m;
  return testing::Refinalize(s);
}

TEST(Sinr, DistinctChannelsGiveSnr) {
  Scenario s = OneLink(100.0);
  const BaseStation& b = s.base_stations[0];
  const User& u = s.users[0];
  // 100 m is past the LoS threshold.
  double pl = 35.3 + 22.4 * 2.0 + 21.3 * std::log10(s.radio.carrier_ghz) -
              0.3 * (u.height_m - 1.5);
  double rx_w = std::pow(10.0, (b.tx_power_dbm - pl - 30.0) / 10.0);
  double noise_w = std::pow(10.0, (s.radio.noise_density_dbm_hz - 30.0) / 10.0) *
                   b.usable_prbs * b.prb_bandwidth_hz;
  ASSERT_GT(100.0, s.radio.los_threshold_m);
  EXPECT_NEAR(Sinr(u, b, s) / (rx_w / noise_w), 1.0, 1e-9);
}

TEST(Sinr, EquidistantCoChannelPairIsBelowOne) {
  Scenario s = GenerateSynthetic(1, 1, 2, 2, 2000, 2000);
  BaseStation& a = s.base_stations[0];
  BaseStation& b = s.base_stations[1];
  b.channel_id = a.channel_id;
  b.tx_power_dbm = a.tx_power_dbm;
  s.users[0].x_m = (a.x_m + b.x_m) / 2;
  s.users[0].y_m = (a.y_m + b.y_m) / 2;
  for (BaseStation* x : {&a, &b}) {
    x->coverage_radius_m = std::max(x->coverage_radius_m, Distance(s.users[0], *x) + 1);
  }
  s = testing::Refinalize(s);
  double sinr = Sinr(s.users[0], s.base_stations[0], s);
  EXPECT_LT(sinr, 1.0);
  EXPECT_GT(sinr, 0.99);
}

TEST(Sinr, DecreasesWithDistance) {
  for (double d : {10.0, 40.0, 100.0, 180.0}) {
    Scenario near = OneLink(d);
    Scenario far = OneLink(2 * d);
    EXPECT_GT(Sinr(near.users[0], near.base_stations[0], near),
              Sinr(far.users[0], far.base_stations[0], far))
        << d;
  }
}

TEST(Sinr, ClampsDistanceAtOneMeter) {
  Scenario s = OneLink(0.0);
  LinkBudget lb = ComputeLinkBudget(s.users[0], s.base_stations[0], s);
  EXPECT_EQ(lb.distance_m, 1.0);
  EXPECT_TRUE(lb.los);
  EXPECT_TRUE(std::isfinite(lb.sinr_linear));
}

TEST(Throughput, ShannonPerPrb) {
  EXPECT_DOUBLE_EQ(Throughput(1, 360e3, 1.0), 360000.0);
  EXPECT_EQ(Throughput(0, 360e3, 37.0), 0.0);
  for (double sinr : {0.3, 4.0, 1e3}) {
    EXPECT_DOUBLE_EQ(Throughput(2, 360e3, sinr), 2 * Throughput(1, 360e3, sinr));
    EXPECT_DOUBLE_EQ(Throughput(5, 360e3, sinr),
                     Throughput(2, 360e3, sinr) + Throughput(3, 360e3, sinr));
  }
}

TEST(TrafficLoad, HandArithmetic) {
  RadioParams r;
  r.bits_per_pixel = 24;
  r.compression_rate = 0.01;
  Resolution res{960, 1080};
  EXPECT_DOUBLE_EQ(TrafficLoad(res, 72, 1.0, r), 17915904.0);
  EXPECT_EQ(TrafficLoad(res, 72, 0.0, r), 0.0);
  EXPECT_DOUBLE_EQ(TrafficLoad(res, 144, 1.0, r), 2 * TrafficLoad(res, 72, 1.0, r));
  EXPECT_DOUBLE_EQ(FrameBits(res.Pixels(), r) * 72, TrafficLoad(res, 72, 1.0, r));
}

TEST(Latency, BufferAndPropagation) {
  Scenario s = OneLink(300.0);
  s.base_stations[0].processing_capacity_fps = 200.0;
  LinkBudget lb = ComputeLinkBudget(s.users[0], s.base_stations[0], s);
  LegInput leg{0, 4, 1.0, 1e12, 100.0};
  LegLatency l = ComputeLegLatency(s, lb, 1e6, 72, leg);
  EXPECT_NEAR(l.buffer_s, 0.010, 1e-15);
  EXPECT_NEAR(l.propagation_s, 1.0e-6, 1e-15);
  EXPECT_NEAR(l.render_s, 1e6 * 72 / 1e12, 1e-18);
  double bits = 1e6 * s.radio.bits_per_pixel * s.radio.compression_rate;
  EXPECT_NEAR(l.transmission_s,
              bits / Throughput(4, s.base_stations[0].prb_bandwidth_hz, lb.sinr_linear),
              1e-15);
  EXPECT_NEAR(l.processing_s, bits / s.base_stations[0].processing_capacity_bps, 1e-18);
}

TEST(Latency, SaturatedQueueIsInfeasible) {
  Scenario s = OneLink(50.0);
  s.base_stations[0].processing_capacity_fps = 100.0;
  RadioMap m(s);
  LatencyBreakdown b = ComputeLatency(s, m, 0, 1e6, 72, 0.0, {{0, 4, 1.0, 1e12, 100.0}});
  EXPECT_FALSE(b.Feasible());
  EXPECT_FALSE(CheckDeadline(b, 1.0));
}

TEST(Latency, TotalIsMaxOfPerBsSums) {
  Scenario s = GenerateSynthetic(2, 1, 2, 2, 1200, 600);
  s.users[0].x_m = (s.base_stations[0].x_m + s.base_stations[1].x_m) / 2;
  s.users[0].y_m = (s.base_stations[0].y_m + s.base_stations[1].y_m) / 2;
  for (BaseStation& b : s.base_stations) {
    b.coverage_radius_m = std::max(b.coverage_radius_m, Distance(s.users[0], b) + 1);
  }
  s = testing::Refinalize(s);
  RadioMap m(s);
  std::vector<LegInput> legs{{0, 3, 0.5, 4e11, 60.0}, {1, 1, 0.5, 4e11, 60.0}};
  double routing = 0.4e-3;
  LatencyBreakdown b = ComputeLatency(s, m, 0, 2e6, 90, routing, legs);
  double worst = 0.0;
  BsId arg = -1;
  for (const LegInput& leg : legs) {
    LegLatency l = ComputeLegLatency(s, m.at(0, leg.bs), 2e6, 90, leg);
    double t = routing + l.render_s + l.propagation_s + l.transmission_s +
               l.processing_s + l.buffer_s;
    EXPECT_GE(l.render_s, 0.0);
    EXPECT_GE(l.transmission_s, 0.0);
    if (t > worst) {
      worst = t;
      arg = leg.bs;
    }
  }
  EXPECT_DOUBLE_EQ(b.total_s, worst);
  EXPECT_EQ(b.critical_bs, arg);
  EXPECT_DOUBLE_EQ(b.total_s, b.routing_s + b.render_s + b.propagation_s +
                                  b.transmission_s + b.processing_s + b.buffer_s);
}

TEST(Deadline, FramePeriodRule) {
  RadioParams r;
  EXPECT_DOUBLE_EQ(DeadlineFor(r, 72), 1.0 / 72);
  LatencyBreakdown b;
  b.total_s = 0.010;
  EXPECT_TRUE(CheckDeadline(b, DeadlineFor(r, 72)));
  b.total_s = 1.0 / 72;
  EXPECT_TRUE(CheckDeadline(b, 1.0 / 72));
  b.total_s = kInf;
  EXPECT_FALSE(CheckDeadline(b, 1.0 / 72));
  r.deadline_s = 0.030;
  EXPECT_DOUBLE_EQ(DeadlineFor(r, 144), 0.030);
}

TEST(MinimumPrbs, SmallestCountMeetingBothConstraints) {
  Scenario s = OneLink(120.0);
  LinkBudget lb = ComputeLinkBudget(s.users[0], s.base_stations[0], s);
  double pixels = 1920.0 * 1080.0, fps = 90;
  LegInput leg{0, 0, 1.0, 4e11, 90.0};
  std::optional<int> y = MinimumPrbs(s, lb, pixels, fps, 0.2e-3, leg);
  ASSERT_TRUE(y.has_value());
  auto ok = [&](int prbs) {
    LegInput l = leg;
    l.prbs = prbs;
    bool tp = Throughput(prbs, s.base_stations[0].prb_bandwidth_hz, lb.sinr_linear) >=
              TrafficLoadPixels(pixels, fps, 1.0, s.radio);
    return tp && 0.2e-3 + ComputeLegLatency(s, lb, pixels, fps, l).Sum() <= 1.0 / fps;
  };
  EXPECT_TRUE(ok(*y));
  for (int p = 1; p < *y; ++p) EXPECT_FALSE(ok(p)) << p;
}

}  // namespace
}  // namespace vrcg
