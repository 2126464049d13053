#ifndef VRCG_SRC_STAGE1_STATE_H_
#define VRCG_SRC_STAGE1_STATE_H_

#include <optional>
#include <vector>

#include "vrcg/radio.h"
#include "vrcg/stage1.h"

namespace vrcg {
namespace internal {

// PRB and queue ledger behind the stage-1 solvers.
class Stage1State {
 public:
  Stage1State(const Scenario& s, const RadioMap& m);
  Stage1State(const Scenario& s, const RadioMap& m, const Stage1Solution& sol);

  // Legs with minimum PRBs for serving `u` from `bss` with an equal split at
  // the given menu options. PRB capacity is not checked here.
  std::optional<std::vector<Leg>> Plan(UserId u, const std::vector<BsId>& bss,
                                       int res, int fps) const;
  // Whether `legs` fit the free PRBs, counting u's own current grants.
  bool Fits(UserId u, const std::vector<Leg>& legs) const;
  // Whether users already served keep their deadline once u joins `bss`.
  bool IncumbentsKeepDeadline(UserId u, const std::vector<BsId>& bss) const;

  // Replaces u's legs and options.
  void Assign(UserId u, std::vector<Leg> legs, int res, int fps);
  void Remove(UserId u);

  int Available(BsId b) const { return avail_[b]; }
  const std::vector<UserId>& Members(BsId b) const { return members_[b]; }
  const Stage1Solution& solution() const { return sol_; }

 private:
  bool UserMeetsDeadline(UserId v, const std::vector<double>& arrivals) const;

  const Scenario& s_;
  const RadioMap& m_;
  std::vector<int> avail_;
  std::vector<double> arrivals_;
  std::vector<std::vector<UserId>> members_;
  Stage1Solution sol_;
};

double PixelsOf(const Scenario& s, UserId u, int res);
double FpsOf(const Scenario& s, UserId u, int fps);

}  // namespace internal
}  // namespace vrcg

#endif  // VRCG_SRC_STAGE1_STATE_H_
