#ifndef VRCG_STAGE1_H_
#define VRCG_STAGE1_H_

#include <cstdint>
#include <optional>
#include <vector>

#include "vrcg/radio.h"
#include "vrcg/scenario.h"
#include "vrcg/violations.h"

namespace vrcg {

// One serving BS of an admitted user.
struct Leg {
  BsId bs = 0;
  int prbs = 0;
  double share = 0.0;

  friend bool operator==(const Leg&, const Leg&) = default;
};

struct Stage1Solution {
  // Per user, ascending BS id; empty for unadmitted users.
  std::vector<std::vector<Leg>> legs;
  // Indices into the user's headset menus; -1 when unset.
  std::vector<int> resolution;
  std::vector<int> frame_rate;
  std::vector<bool> admitted;

  static Stage1Solution Empty(int n_users);

  int NumAdmitted() const;
  std::vector<BsId> ServingBs(UserId u) const;
  const Leg* LegAt(UserId u, BsId b) const;
  int PrbsAt(UserId u, BsId b) const;

  friend bool operator==(const Stage1Solution&, const Stage1Solution&) = default;
};

struct Stage1Options {
  // Overrides radio.max_connections when set.
  std::optional<int> max_connections;
  // Seed for the random user draw; defaults to the scenario seed.
  std::optional<std::uint64_t> seed;
};

double QoeStage1(const Scenario& s, const Stage1Solution& sol, UserId u);
double TotalQoeStage1(const Scenario& s, const Stage1Solution& sol);

const Resolution& SelectedResolution(const Scenario& s,
                                     const Stage1Solution& sol, UserId u);
double SelectedFps(const Scenario& s, const Stage1Solution& sol, UserId u);
// Full-frame Load(u) of the stage-1 selection.
double UserLoad(const Scenario& s, const Stage1Solution& sol, UserId u);

// Sum of a_u per BS over the users it serves.
std::vector<double> ArrivalsPerBs(const Scenario& s, const Stage1Solution& sol);

// Latency of an admitted user with rendering at each leg's nearest CN.
LatencyBreakdown Stage1Latency(const Scenario& s, const RadioMap& m,
                               const Stage1Solution& sol,
                               const std::vector<double>& arrivals, UserId u);

// Per-user BS preference: in-coverage BSs by SINR descending, then id.
std::vector<std::vector<BsId>> BsPreferences(const Scenario& s,
                                             const RadioMap& m);

Stage1Solution Vexa(const Scenario& s, const Stage1Options& opts = {});
Stage1Solution MaximizeQoe(const Scenario& s, Stage1Solution sol);
Stage1Solution BaselineSingleAssociation(const Scenario& s);
Stage1Solution BaselineDualConnectivity(const Scenario& s);

ViolationReport VerifyStage1(const Stage1Solution& sol, const Scenario& s);

}  // namespace vrcg

#endif  // VRCG_STAGE1_H_
