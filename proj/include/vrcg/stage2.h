#ifndef VRCG_STAGE2_H_
#define VRCG_STAGE2_H_

#include <limits>
#include <map>
#include <optional>
#include <vector>

#include "vrcg/radio.h"
#include "vrcg/scenario.h"
#include "vrcg/stage1.h"
#include "vrcg/violations.h"

namespace vrcg {

struct DemandProfile {
  UserId user = 0;
  double gpu = 0.0;
  double cpu = 0.0;
  double ram = 0.0;
  // Stage-1 Load(u) in bits/s.
  double net = 0.0;
};

struct PathFlow {
  PathId path = 0;
  double flow = 0.0;

  friend bool operator==(const PathFlow&, const PathFlow&) = default;
};

struct Stage2Solution {
  // Hosting CN per user; -1 for users that are not placed.
  std::vector<CnId> placement;
  // Selected paths with their flow fractions, grouped by the path's BS.
  std::vector<std::vector<PathFlow>> flows;
  // Admitted users that found no feasible CN.
  std::vector<UserId> unplaced;

  static Stage2Solution Empty(int n_users);
  std::vector<CnId> ActiveCns(int n_cns) const;

  friend bool operator==(const Stage2Solution&, const Stage2Solution&) = default;
};

struct CostBreakdown {
  double fixed = 0.0;
  double variable = 0.0;
  double migration = 0.0;
  double total = 0.0;
};

DemandProfile ComputeDemand(const Scenario& s, const Stage1Solution& sol1,
                            UserId u);
double VariableCost(const ComputeNode& c, const DemandProfile& d);
// Omega(prev, next); 0 without a previous placement or when unchanged.
double MigrationCost(const Scenario& s, std::optional<CnId> prev, CnId next);

CostBreakdown TotalCost(const Stage2Solution& sol, const Scenario& s,
                        const Stage1Solution& sol1,
                        const std::map<UserId, CnId>& prev_placement);

// Traffic a user's leg puts on the transport network: TP(u, b).
double LegTraffic(const Scenario& s, const RadioMap& m,
                  const Stage1Solution& sol1, UserId u, BsId b);

// End-to-end latency with rendering at `cn` and routing over `paths`.
LatencyBreakdown Stage2Latency(const Scenario& s, const RadioMap& m,
                               const Stage1Solution& sol1,
                               const std::vector<double>& arrivals, UserId u,
                               CnId cn, const std::vector<PathId>& paths);

struct Stage2Options {
  // Overrides radio.k_paths (only the first k paths per pair are used).
  std::optional<int> k_paths;
  // Route each leg over exactly one path.
  bool single_path = false;
};

Stage2Solution Gepar(const Scenario& s, const Stage1Solution& sol1,
                     const std::map<UserId, CnId>& prev_placement,
                     const Stage2Options& opts = {});
Stage2Solution BaselineSinglePath(const Scenario& s, const Stage1Solution& sol1,
                                  const std::map<UserId, CnId>& prev_placement);

struct PenaltyWeights {
  // Per unit of normalized overflow or excess.
  double capacity = 1000.0;
  double latency = 1000.0;
  double link = 1000.0;
  // Per unit of L(u) / deadline; the QoS side of the joint objective.
  double qos = 1000.0;

  static PenaltyWeights Infinite() {
    double inf = std::numeric_limits<double>::infinity();
    return {inf, inf, inf, 1000.0};
  }
  static PenaltyWeights Zero() { return {0.0, 0.0, 0.0, 0.0}; }
};

// Greedy placement minimizing cost plus priced latency and violations;
// output may fail VerifyStage2.
Stage2Solution BaselineUnconstrained(const Scenario& s,
                                     const Stage1Solution& sol1,
                                     const std::map<UserId, CnId>& prev_placement,
                                     const PenaltyWeights& weights = {});

ViolationReport VerifyStage2(const Stage2Solution& sol, const Scenario& s,
                             const Stage1Solution& sol1);

// Users in first-fit-decreasing order of normalized demand.
std::vector<UserId> FfdOrder(const Scenario& s, const Stage1Solution& sol1);

}  // namespace vrcg

#endif  // VRCG_STAGE2_H_
