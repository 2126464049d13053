#include <cmath>

#include <gtest/gtest.h>

#include "test_util.h"
#include "vrcg/oracle.h"

namespace vrcg {
namespace {

using testing::OracleSized;

TEST(ExactStage1, SlackSelectsMaximumQuality) {
  GenerationOverrides o;
  o.total_prbs = 200;
  o.max_resolutions_per_headset = 3;
  o.max_frame_rates_per_headset = 2;
  Scenario s = GenerateSynthetic(4, 1, 1, 1, 800, 800, o);
  ExactStage1Result r = ExactStage1(s);
  ASSERT_TRUE(r.solution.admitted[0]);
  const Headset& h = s.HeadsetOf(s.users[0]);
  if (s.GameOf(s.users[0]).mode == PreferenceMode::kQuality) {
    EXPECT_EQ(r.solution.resolution[0], static_cast<int>(h.resolutions.size()) - 1);
  } else {
    EXPECT_EQ(r.solution.frame_rate[0], static_cast<int>(h.frame_rates.size()) - 1);
  }
  EXPECT_TRUE(VerifyStage1(r.solution, s).empty());
  EXPECT_DOUBLE_EQ(r.objective, TotalQoeStage1(s, r.solution));
}

TEST(ExactStage1, UncoveredUserIsReportedAndExcluded) {
  Scenario s = OracleSized(3);
  // Moved after validation so the instance stays otherwise intact.
  s.users[2].x_m = 1e5;
  s.users[2].y_m = 1e5;
  ExactStage1Result r = ExactStage1(s);
  EXPECT_EQ(r.uncovered, std::vector<UserId>{2});
  EXPECT_FALSE(r.solution.admitted[2]);
  EXPECT_DOUBLE_EQ(r.objective, TotalQoeStage1(s, r.solution));
}

TEST(ExactStage1, RefusesOversizedInstances) {
  Scenario s = GenerateSynthetic(1, 10, 2, 3, 600, 600);
  try {
    ExactStage1(s);
    FAIL() << "expected OracleRefusal";
  } catch (const OracleRefusal& e) {
    EXPECT_GT(e.estimate(), 0.0);
  }
  OracleBounds tight;
  tight.max_evaluations = 10;
  EXPECT_THROW(ExactStage1(OracleSized(1), tight), OracleRefusal);
}

TEST(ExactStage1, BoundsEveryHeuristic) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Scenario s = OracleSized(seed);
    ExactStage1Result r = ExactStage1(s);
    EXPECT_TRUE(VerifyStage1(r.solution, s).empty()) << "seed " << seed;
    for (const Stage1Solution& h :
         {Vexa(s), BaselineSingleAssociation(s), BaselineDualConnectivity(s)}) {
      EXPECT_GE(r.solution.NumAdmitted(), h.NumAdmitted());
      if (r.solution.NumAdmitted() == h.NumAdmitted()) {
        EXPECT_GE(r.objective + 1e-9, TotalQoeStage1(s, h)) << "seed " << seed;
      }
    }
    // The gap the acceptance suite tracks, per instance.
    double v = TotalQoeStage1(s, Vexa(s));
    if (r.objective > 0) EXPECT_GE(v, 0.90 * r.objective) << "seed " << seed;
  }
}

TEST(ExactStage2, SingleFeasibleCnIsChosen) {
  Scenario s = OracleSized(2);
  Stage1Solution f = Vexa(s);
  // Starve every CN but one.
  for (ComputeNode& c : s.compute_nodes) {
    if (c.id != 1) c.capacity = {1e-9, 1e-9, 1e-9, 1e-9};
  }
  ExactStage2Result r = ExactStage2(s, f, {});
  ASSERT_TRUE(r.feasible);
  for (UserId u = 0; u < s.NumUsers(); ++u) {
    if (f.admitted[u]) EXPECT_EQ(r.solution.placement[u], 1);
  }
  EXPECT_TRUE(VerifyStage2(r.solution, s, f).empty());
}

TEST(ExactStage2, ReportsInfeasibility) {
  Scenario s = OracleSized(2);
  Stage1Solution f = Vexa(s);
  for (ComputeNode& c : s.compute_nodes) c.capacity = {1e-9, 1e-9, 1e-9, 1e-9};
  EXPECT_FALSE(ExactStage2(s, f, {}).feasible);
}

TEST(ExactStage2, BoundsGeparCost) {
  int compared = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Scenario s = OracleSized(seed);
    Stage1Solution f = Vexa(s);
    ExactStage2Result r = ExactStage2(s, f, {});
    Stage2Solution g = Gepar(s, f, {});
    if (!r.feasible || !g.unplaced.empty()) continue;
    ++compared;
    EXPECT_TRUE(VerifyStage2(r.solution, s, f).empty());
    double cg = TotalCost(g, s, f, {}).total;
    EXPECT_LE(r.cost.total, cg + 1e-9) << "seed " << seed;
    EXPECT_LE(cg, 1.15 * r.cost.total) << "seed " << seed;
    EXPECT_DOUBLE_EQ(r.cost.total, TotalCost(r.solution, s, f, {}).total);
  }
  EXPECT_GT(compared, 5);
}

TEST(ExactStage3, SlackMaximizesObjects) {
  GenerationOverrides o;
  o.total_prbs = 200;
  o.max_resolutions_per_headset = 3;
  o.max_frame_rates_per_headset = 2;
  o.objects_per_user = 2;
  o.ttis_per_window = 8;
  Scenario s = GenerateSynthetic(4, 2, 1, 1, 800, 800, o);
  Stage1Solution f = Vexa(s);
  ExactStage3Result r = ExactStage3(s, f);
  ASSERT_TRUE(r.feasible);
  std::vector<std::vector<int>> table = r.solution.ResolutionTable(s);
  for (UserId u = 0; u < s.NumUsers(); ++u) {
    if (!f.admitted[u]) continue;
    // Objects(u) <= Load(u) caps every object at the stage-1 resolution.
    for (int res : table[u]) EXPECT_LE(res, f.resolution[u]);
    if (f.resolution[u] ==
        static_cast<int>(s.HeadsetOf(s.users[u]).resolutions.size()) - 1) {
      for (int res : table[u]) EXPECT_EQ(res, f.resolution[u]);
    }
  }
}

// Independent enumeration of per-object resolutions under Objects <= Load,
// ignoring the schedule. It upper-bounds the exact stage-3 objective.
double LoadBoundedOptimum(const Scenario& s, const Stage1Solution& f) {
  double total = 0.0;
  for (UserId u = 0; u < s.NumUsers(); ++u) {
    if (!f.admitted[u]) continue;
    const int n_obj = s.users[u].objects.size();
    const int n_res = s.HeadsetOf(s.users[u]).resolutions.size();
    double best = 0.0;
    std::vector<int> pick(n_obj, 0);
    for (;;) {
      if (ObjectsLoad(s, f, pick, u) <= UserLoad(s, f, u) * (1 + 1e-12)) {
        best = std::max(best, QoeStage3(s, f, pick, u));
      }
      int i = 0;
      while (i < n_obj && ++pick[i] == n_res) pick[i++] = 0;
      if (i == n_obj) break;
    }
    total += best;
  }
  return total;
}

TEST(ExactStage3, AgreesWithLoadBoundAndBoundsAmps) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Scenario s = OracleSized(seed);
    Stage1Solution f = Vexa(s);
    ExactStage3Result r = ExactStage3(s, f);
    if (!r.feasible) continue;
    EXPECT_TRUE(VerifyStage3(r.solution, s, f).empty());
    EXPECT_LE(r.objective, LoadBoundedOptimum(s, f) + 1e-9);
    double a = TotalQoeStage3(s, f, Amps(s, f));
    EXPECT_GE(r.objective + 1e-9, a) << "seed " << seed;
    EXPECT_GE(a, 0.90 * r.objective) << "seed " << seed;
  }
}

}  // namespace
}  // namespace vrcg
