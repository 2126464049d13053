#include <algorithm>
#include <cmath>
#include <map>

#include <gtest/gtest.h>

#include "test_util.h"
#include "vrcg/stage3.h"

namespace vrcg {
namespace {

using testing::Cluster;
using testing::Menu;

bool Names(const ViolationReport& r, const std::string& constraint) {
  return std::any_of(r.begin(), r.end(),
                     [&](const Violation& v) { return v.constraint == constraint; });
}

void SetObjects(Scenario& s, std::vector<VirtualObject> objects) {
  for (size_t i = 0; i < objects.size(); ++i) objects[i].id = i;
  for (User& u : s.users) u.objects = objects;
}

Stage1Solution OneLeg(const Scenario& s, int prbs, int res, int fps) {
  Stage1Solution sol = Stage1Solution::Empty(s.NumUsers());
  for (UserId u = 0; u < s.NumUsers(); ++u) {
    sol.admitted[u] = true;
    sol.resolution[u] = res;
    sol.frame_rate[u] = fps;
    sol.legs[u] = {Leg{0, prbs, 1.0}};
  }
  return sol;
}

TEST(QoeStage3, AttentionWeightedLogRatios) {
  Scenario s = Cluster(1, PreferenceMode::kQuality,
                       {Menu({{1000, 1000}, {2718, 1000}, {7389, 1000}}, {72, 90})});
  SetObjects(s, {{0, 0.5, 0.8}, {0, 0.5, 0.2}});
  s = testing::Refinalize(s);
  Stage1Solution sol1 = OneLeg(s, 4, 0, 0);
  EXPECT_EQ(QoeStage3(s, sol1, {0, 0}, 0), 0.0);
  EXPECT_NEAR(QoeStage3(s, sol1, {2, 0}, 0), 1.6, 1e-4);
  EXPECT_NEAR(QoeStage3(s, sol1, {2, 0}, 0),
              0.8 * std::log(7389.0 / 1000.0), 1e-12);

  SetObjects(s, {{0, 1.0, 1.0}});
  s = testing::Refinalize(s);
  EXPECT_NEAR(QoeStage3(s, sol1, {1}, 0), 1.0, 1e-3);
  // The stage-1 frame rate enters every object's ratio.
  sol1.frame_rate[0] = 1;
  EXPECT_NEAR(QoeStage3(s, sol1, {0}, 0), std::log(90.0 / 72.0), 1e-12);
}

TEST(ObjectsLoad, PartitionsTheFrame) {
  Scenario s = GenerateSynthetic(3, 30, 2, 2, 1200, 600);
  Stage1Solution sol1 = Vexa(s);
  std::vector<std::vector<int>> res = InitialObjectResolutions(s, sol1);
  for (UserId u = 0; u < s.NumUsers(); ++u) {
    if (!sol1.admitted[u]) continue;
    double full = UserLoad(s, sol1, u);
    EXPECT_NEAR(ObjectsLoad(s, sol1, res[u], u), full, 1e-9 * full);

    const Headset& h = s.HeadsetOf(s.users[u]);
    std::vector<int> mixed(res[u].size());
    double direct = 0.0;
    for (size_t o = 0; o < mixed.size(); ++o) {
      mixed[o] = (o * 7 + u) % h.resolutions.size();
      direct += s.users[u].objects[o].pixel_share * h.resolutions[mixed[o]].Pixels() *
                s.radio.bits_per_pixel * s.radio.compression_rate *
                SelectedFps(s, sol1, u);
    }
    EXPECT_NEAR(ObjectsLoad(s, sol1, mixed, u), direct, 1e-9 * direct);

    if (res[u][0] + 1 < static_cast<int>(h.resolutions.size())) {
      std::vector<int> up = res[u];
      ++up[0];
      EXPECT_GT(ObjectsLoad(s, sol1, up, u), full);
    }
  }
}

TEST(Amps, SlackCapacityMaximizesQualityUsers) {
  GenerationOverrides o;
  o.total_prbs = 5000;
  o.usable_prb_fraction = 1.0;
  Scenario s = GenerateSynthetic(3, 8, 2, 2, 1200, 600, o);
  Stage1Solution sol1 = Vexa(s);
  Stage3Solution a = Amps(s, sol1);
  EXPECT_TRUE(VerifyStage3(a, s, sol1).empty());
  std::vector<std::vector<int>> table = a.ResolutionTable(s);
  int checked = 0;
  for (UserId u = 0; u < s.NumUsers(); ++u) {
    int top = static_cast<int>(s.HeadsetOf(s.users[u]).resolutions.size()) - 1;
    if (sol1.resolution[u] != top) continue;
    for (int r : table[u]) EXPECT_EQ(r, top);
    ++checked;
  }
  EXPECT_GT(checked, 0);
}

TEST(Amps, DonorFundsHighAttentionUpgrade) {
  // Equal-size objects; moving the low-attention object down two megapixels
  // pays exactly for moving the other one up.
  Scenario s = Cluster(1, PreferenceMode::kQuality,
                       {Menu({{1000, 1000}, {3000, 1000}, {5000, 1000}}, {72})});
  SetObjects(s, {{0, 0.5, 0.2}, {0, 0.5, 0.8}});
  s = testing::Refinalize(s);
  Stage1Solution sol1 = OneLeg(s, 40, 1, 0);
  ASSERT_TRUE(VerifyStage1(sol1, s).empty()) << Describe(VerifyStage1(sol1, s));
  std::vector<std::vector<int>> r = RefineResolutions(s, sol1);
  EXPECT_EQ(r[0], (std::vector<int>{0, 2}));
  double gain = 0.8 * std::log(5.0 / 3.0) - 0.2 * std::log(3.0);
  EXPECT_NEAR(QoeStage3(s, sol1, r[0], 0) - BaselineQoeStage3(s, sol1), gain, 1e-12);
  EXPECT_LE(ObjectsLoad(s, sol1, r[0], 0), UserLoad(s, sol1, 0) * (1 + 1e-12));
}

TEST(Amps, NeverBelowStage1Selection) {
  for (int i = 0; i < 20; ++i) {
    Scenario s = GenerateSynthetic(900 + i, 60 + 15 * i, 10, 13, 2000, 2000);
    Stage1Solution sol1 = Vexa(s);
    Stage3Solution a = Amps(s, sol1);
    EXPECT_GE(TotalQoeStage3(s, sol1, a), BaselineQoeStage3(s, sol1) - 1e-9);
  }
}

// One user whose 72 fps frames map to four groups in an eight-TTI window,
// with one PRB-TTI enough for a frame.
Scenario FourGroups() {
  Scenario s = Cluster(1, PreferenceMode::kQuality, {Menu({{960, 1080}}, {72})});
  s.radio.compression_rate = 1e-5;
  s.radio.numerology.tti_s = 1.0 / 144;
  s.radio.numerology.ttis_per_window = 8;
  s.radio.deadline_s = 1.0;
  return testing::Refinalize(s);
}

TEST(MtpSched, OnePrbPerGroup) {
  Scenario s = FourGroups();
  Stage1Solution sol1 = OneLeg(s, 1, 0, 0);
  ASSERT_EQ(GroupCount(s, sol1, 0), 4);
  RadioMap m(s);
  std::vector<std::vector<int>> res = InitialObjectResolutions(s, sol1);
  ASSERT_EQ(PrbTarget(s, m, sol1, res[0], 0, 0), 4);
  Stage3Solution sol = MtpSched(s, sol1, res);
  EXPECT_TRUE(VerifyStage3(sol, s, sol1).empty());
  std::vector<int> per_group(4, 0);
  for (const Grant& g : sol.schedule) per_group[GroupOf(g.tti, 4, 8)] += g.prbs;
  EXPECT_EQ(per_group, (std::vector<int>{1, 1, 1, 1}));
}

TEST(MtpSched, SingleTtiWindow) {
  Scenario s = FourGroups();
  s.radio.numerology.ttis_per_window = 1;
  s = testing::Refinalize(s);
  Stage1Solution sol1 = OneLeg(s, 1, 0, 0);
  Stage3Solution sol = MtpSched(s, sol1, InitialObjectResolutions(s, sol1));
  ASSERT_FALSE(sol.schedule.empty());
  for (const Grant& g : sol.schedule) EXPECT_EQ(g.tti, 0);
}

int UsedIn(const Stage3Solution& sol, BsId b, int k) {
  int n = 0;
  for (const Grant& g : sol.schedule) {
    if (g.bs == b && g.tti == k) n += g.prbs;
  }
  return n;
}

TEST(MtpSched, SaturationNeverOverflowsATti) {
  Scenario s = FourGroups();
  s.users.push_back(s.users[0]);
  s.users[1].id = 1;
  s.base_stations[0].usable_prbs = 2;
  s = testing::Refinalize(s);
  RadioMap m(s);
  // Pick a compression rate that makes the two users need every PRB-TTI.
  Stage1Solution sol1 = OneLeg(s, 1, 0, 0);
  double per = BitsPerPrbTti(s, m, 0, 0);
  double window = s.radio.numerology.WindowSeconds();
  double pixels = 960.0 * 1080.0;
  s.radio.compression_rate = 2 * per * 4 / (pixels * s.radio.bits_per_pixel * 72 * window);
  s = testing::Refinalize(s);
  RadioMap m2(s);
  std::vector<std::vector<int>> res = InitialObjectResolutions(s, sol1);
  ASSERT_EQ(PrbTarget(s, m2, sol1, res[0], 0, 0) + PrbTarget(s, m2, sol1, res[1], 1, 0), 16);
  Stage3Solution sol = MtpSched(s, sol1, res);
  for (int k = 0; k < 8; ++k) EXPECT_EQ(UsedIn(sol, 0, k), 2) << "tti " << k;
  EXPECT_TRUE(VerifyStage3(sol, s, sol1).empty());

  s.radio.compression_rate *= 1.5;
  s = testing::Refinalize(s);
  try {
    MtpSched(s, sol1, InitialObjectResolutions(s, sol1));
    FAIL() << "expected InfeasibleError";
  } catch (const InfeasibleError& e) {
    EXPECT_EQ(e.entity(), "base_station 0");
  }
}

TEST(MtpSched, ExactTargetsAndCapacityOnSeededInstances) {
  for (int i = 0; i < 10; ++i) {
    Scenario s = GenerateSynthetic(40 + i, 300, 10, 13, 2000, 2000);
    Stage1Solution sol1 = Vexa(s);
    RadioMap m(s);
    std::vector<std::vector<int>> res = InitialObjectResolutions(s, sol1);
    Stage3Solution sol = MtpSched(s, sol1, res);
    std::map<std::pair<UserId, BsId>, int> got;
    std::map<std::pair<BsId, int>, int> per_tti;
    for (const Grant& g : sol.schedule) {
      got[{g.user, g.bs}] += g.prbs;
      per_tti[{g.bs, g.tti}] += g.prbs;
    }
    for (const auto& [key, n] : per_tti) {
      EXPECT_LE(n, s.base_stations[key.first].usable_prbs);
    }
    for (UserId u = 0; u < s.NumUsers(); ++u) {
      for (const Leg& l : sol1.legs[u]) {
        EXPECT_EQ((got[{u, l.bs}]), PrbTarget(s, m, sol1, res[u], u, l.bs));
      }
    }
    Stage3Solution rr = BaselineRoundRobin(s, sol1);
    EXPECT_LE(PrbUsageFraction(s, sol), PrbUsageFraction(s, rr));
  }
}

TEST(RoundRobin, CyclicFairnessAndFullUsage) {
  Scenario s = FourGroups();
  s.users.push_back(s.users[0]);
  s.users[1].id = 1;
  s.base_stations[0].usable_prbs = 5;
  s = testing::Refinalize(s);
  Stage1Solution sol1 = OneLeg(s, 1, 0, 0);
  Stage3Solution rr = BaselineRoundRobin(s, sol1);
  EXPECT_TRUE(VerifyStage3(rr, s, sol1, {false}).empty());
  for (int k = 0; k < 8; ++k) {
    int a = 0, b = 0;
    for (const Grant& g : rr.schedule) {
      if (g.tti != k) continue;
      (g.user == 0 ? a : b) += g.prbs;
    }
    EXPECT_EQ(a + b, 5);
    EXPECT_LE(std::abs(a - b), 1);
  }
  EXPECT_DOUBLE_EQ(PrbUsageFraction(s, rr), 1.0);
}

TEST(ProportionalFair, LoneUserGetsEverything) {
  Scenario s = FourGroups();
  Stage1Solution sol1 = OneLeg(s, 1, 0, 0);
  Stage3Solution pf = BaselineProportionalFair(s, sol1);
  for (int k = 0; k < 8; ++k) {
    EXPECT_EQ(UsedIn(pf, 0, k), s.base_stations[0].usable_prbs);
  }
}

TEST(MtpLatency, FifoHandTrace) {
  Scenario s = FourGroups();
  Stage1Solution sol1 = OneLeg(s, 1, 0, 0);
  RadioMap m(s);
  LegInput in{0, 1, 1.0, s.compute_nodes[s.base_stations[0].nearest_cn].render_speed_pps, 0};
  LegLatency lat = ComputeLegLatency(s, m.at(0, 0), 960.0 * 1080, 72, in);
  double fixed = NearestCnRouting(s, {0}) + lat.render_s + lat.propagation_s +
                 lat.processing_s;
  const double tti = s.radio.numerology.tti_s;

  Stage3Solution sol;
  sol.ttis = 8;
  sol.groups = {4};
  sol.objects = {{0, 0, 0}};
  // Frames arrive at TTIs 0, 2, 4 and 6; serve each one TTI late.
  for (int k : {1, 3, 5, 7}) sol.schedule.push_back({0, k, 0, 1});
  MtpReport r = MtpLatency(s, sol1, sol);
  ASSERT_EQ(r.samples_s[0].size(), 4u);
  for (int f = 0; f < 4; ++f) {
    EXPECT_NEAR(r.samples_s[0][f], 2 * tti + fixed, 1e-12) << f;
  }
  EXPECT_EQ(r.undelivered, 0);
  EXPECT_NEAR(r.average_s, 2 * tti + fixed, 1e-12);

  // Served in its own TTI: one TTI of transmission.
  sol.schedule.clear();
  for (int k : {0, 2, 4, 6}) sol.schedule.push_back({0, k, 0, 1});
  EXPECT_NEAR(MtpLatency(s, sol1, sol).average_s, tti + fixed, 1e-12);

  // Nothing scheduled: every frame completes at the window end and is flagged.
  sol.schedule.clear();
  MtpReport none = MtpLatency(s, sol1, sol);
  EXPECT_EQ(none.undelivered, 4);
  EXPECT_NEAR(none.samples_s[0][0], 8 * tti + fixed, 1e-12);
}

TEST(VerifyStage3, AmpsOutputIsClean) {
  for (int i = 0; i < 100; ++i) {
    Scenario s = GenerateSynthetic(1300 + i, 20 + 2 * i, 10, 13, 2000, 2000);
    Stage1Solution sol1 = Vexa(s);
    ViolationReport r = VerifyStage3(Amps(s, sol1), s, sol1);
    EXPECT_TRUE(r.empty()) << "seed " << 1300 + i << "\n" << Describe(r);
  }
}

TEST(VerifyStage3, NamesMissingGroupAndDuplicateResolution) {
  Scenario s = FourGroups();
  Stage1Solution sol1 = OneLeg(s, 1, 0, 0);
  Stage3Solution sol = MtpSched(s, sol1, InitialObjectResolutions(s, sol1));
  ASSERT_TRUE(VerifyStage3(sol, s, sol1).empty());

  Stage3Solution gap = sol;
  gap.schedule.erase(gap.schedule.begin());
  EXPECT_TRUE(Names(VerifyStage3(gap, s, sol1), "tti_groups"));

  Stage3Solution twice = sol;
  twice.objects.push_back(twice.objects.front());
  EXPECT_TRUE(Names(VerifyStage3(twice, s, sol1), "object_resolution"));
}

TEST(VerifyStage3, NamesTtiOverflow) {
  Scenario s = FourGroups();
  Stage1Solution sol1 = OneLeg(s, 1, 0, 0);
  Stage3Solution sol = MtpSched(s, sol1, InitialObjectResolutions(s, sol1));
  sol.schedule.front().prbs = s.base_stations[0].usable_prbs + 1;
  EXPECT_TRUE(Names(VerifyStage3(sol, s, sol1, {false}), "tti_capacity"));
}

}  // namespace
}  // namespace vrcg
