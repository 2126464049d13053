#ifndef VRCG_STAGE3_H_
#define VRCG_STAGE3_H_

#include <vector>

#include "vrcg/radio.h"
#include "vrcg/scenario.h"
#include "vrcg/stage1.h"
#include "vrcg/stage2.h"
#include "vrcg/violations.h"

namespace vrcg {

// w(u, o) = resolution index into the user's headset menu.
struct ObjectChoice {
  UserId user = 0;
  int object = 0;
  int resolution = 0;

  friend bool operator==(const ObjectChoice&, const ObjectChoice&) = default;
};

// n(u, b, k) > 0 PRBs granted in TTI k.
struct Grant {
  BsId bs = 0;
  int tti = 0;
  UserId user = 0;
  int prbs = 0;

  friend bool operator==(const Grant&, const Grant&) = default;
};

struct Stage3Solution {
  int ttis = 0;
  // One entry per (admitted user, object), ordered by user then object.
  std::vector<ObjectChoice> objects;
  // Ordered by (bs, tti, user).
  std::vector<Grant> schedule;
  // |T| per user; 0 for unadmitted users. Group g of a user covers TTIs
  // [ceil(g K / |T|), ceil((g + 1) K / |T|)), so frame g is generated no
  // later than the group's first TTI.
  std::vector<int> groups;

  // Per-user vectors of resolution indices; -1 where no choice is recorded.
  std::vector<std::vector<int>> ResolutionTable(const Scenario& s) const;

  friend bool operator==(const Stage3Solution&, const Stage3Solution&) = default;
};

// Number of TTI groups of an admitted user: frames per window, capped at K.
int GroupCount(const Scenario& s, const Stage1Solution& sol1, UserId u);
int GroupStart(int group, int n_groups, int ttis);
int GroupOf(int tti, int n_groups, int ttis);

double QoeStage3(const Scenario& s, const Stage1Solution& sol1,
                 const std::vector<int>& object_res, UserId u);
double TotalQoeStage3(const Scenario& s, const Stage1Solution& sol1,
                      const Stage3Solution& sol3);
// Stage-3 QoE with every object kept at the stage-1 resolution.
double BaselineQoeStage3(const Scenario& s, const Stage1Solution& sol1);

// Objects(u) in bits/s.
double ObjectsLoad(const Scenario& s, const Stage1Solution& sol1,
                   const std::vector<int>& object_res, UserId u);

// Bits one PRB carries in one TTI for (u, b).
double BitsPerPrbTti(const Scenario& s, const RadioMap& m, UserId u, BsId b);

// PRB-TTIs that (u, b) needs over the window: |T| times the PRBs that carry
// one group's share of Objects(u), at least one per group.
int PrbTarget(const Scenario& s, const RadioMap& m, const Stage1Solution& sol1,
              const std::vector<int>& object_res, UserId u, BsId b);

// Object resolutions from the stage-1 selection.
std::vector<std::vector<int>> InitialObjectResolutions(
    const Scenario& s, const Stage1Solution& sol1);
// Attention-driven resolution refinement without scheduling.
std::vector<std::vector<int>> RefineResolutions(const Scenario& s,
                                                const Stage1Solution& sol1);

// Schedules PRB targets over the window. Throws InfeasibleError naming the
// first BS whose targets exceed usable_prbs * K.
Stage3Solution MtpSched(const Scenario& s, const Stage1Solution& sol1,
                        const std::vector<std::vector<int>>& object_res);
// RefineResolutions followed by MtpSched.
Stage3Solution Amps(const Scenario& s, const Stage1Solution& sol1);

// Work-conserving baselines over the stage-1 resolutions.
Stage3Solution BaselineRoundRobin(const Scenario& s, const Stage1Solution& sol1);
Stage3Solution BaselineProportionalFair(const Scenario& s,
                                        const Stage1Solution& sol1,
                                        int horizon_ttis = 100);

struct MtpReport {
  // Mean MTP; 0 for unadmitted users.
  std::vector<double> per_user_s;
  std::vector<std::vector<double>> samples_s;
  // Frames still incomplete at the end of the window.
  int undelivered = 0;
  // Mean of per_user_s over admitted users.
  double average_s = 0.0;
};

// FIFO frame delivery over each user's scheduled capacity. Fixed components
// use the stage-2 host and paths when given, else each BS's nearest CN.
MtpReport MtpLatency(const Scenario& s, const Stage1Solution& sol1,
                     const Stage3Solution& sol3,
                     const Stage2Solution* sol2 = nullptr);

// Scheduled PRB-TTIs over usable_prbs * K summed across BSs.
double PrbUsageFraction(const Scenario& s, const Stage3Solution& sol3);

struct Stage3VerifyOptions {
  // Require n(u, b) totals equal PrbTarget and every TTI group covered. Off
  // for the work-conserving baselines, which ignore both.
  bool check_targets = true;
};

ViolationReport VerifyStage3(const Stage3Solution& sol, const Scenario& s,
                             const Stage1Solution& sol1,
                             const Stage3VerifyOptions& opts = {});

}  // namespace vrcg

#endif  // VRCG_STAGE3_H_
