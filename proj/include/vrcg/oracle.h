#ifndef VRCG_ORACLE_H_
#define VRCG_ORACLE_H_

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "vrcg/scenario.h"
#include "vrcg/stage1.h"
#include "vrcg/stage2.h"
#include "vrcg/stage3.h"

namespace vrcg {

// Size limits for the exhaustive solvers.
struct OracleBounds {
  int max_users = 4;
  int max_bs = 3;
  int max_cns = 3;
  int max_resolutions = 3;
  int max_frame_rates = 2;
  int max_objects = 2;
  int max_ttis = 8;
  double max_evaluations = 1e7;
};

// Thrown when an instance is outside the bounds or its enumeration estimate
// exceeds the evaluation budget.
class OracleRefusal : public std::runtime_error {
 public:
  OracleRefusal(const std::string& what, double estimate)
      : std::runtime_error(what), estimate_(estimate) {}
  double estimate() const { return estimate_; }

 private:
  double estimate_;
};

struct ExactStage1Result {
  Stage1Solution solution;
  // Total stage-1 QoE of the solution.
  double objective = 0.0;
  // Users no BS covers; they never count toward the objective.
  std::vector<UserId> uncovered;
  double evaluations = 0;
};

// Maximizes (admitted users, total QoE) lexicographically over association
// sets of size <= N with equal split shares and every menu selection.
ExactStage1Result ExactStage1(const Scenario& s, const OracleBounds& bounds = {});

struct ExactStage2Result {
  bool feasible = false;
  Stage2Solution solution;
  CostBreakdown cost;
  double evaluations = 0;
};

// Tries placements in ascending cost; for each, path subsets per leg with an
// even split and one rebalance pass. The first routable placement wins.
ExactStage2Result ExactStage2(const Scenario& s, const Stage1Solution& sol1,
                              const std::map<UserId, CnId>& prev_placement,
                              const OracleBounds& bounds = {});

struct ExactStage3Result {
  bool feasible = false;
  Stage3Solution solution;
  double objective = 0.0;
  double evaluations = 0;
};

// Best per-object resolutions whose MtpSched schedule verifies.
ExactStage3Result ExactStage3(const Scenario& s, const Stage1Solution& sol1,
                              const OracleBounds& bounds = {});

}  // namespace vrcg

#endif  // VRCG_ORACLE_H_
