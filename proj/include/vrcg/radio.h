#ifndef VRCG_RADIO_H_
#define VRCG_RADIO_H_

#include <optional>
#include <vector>

#include "vrcg/scenario.h"

namespace vrcg {

struct LinkBudget {
  UserId user = 0;
  BsId bs = 0;
  double distance_m = 0.0;
  bool los = false;
  double path_loss_db = 0.0;
  double sinr_linear = 0.0;
  bool in_coverage = false;

  double SpectralEfficiency() const;
};

// Urban microcell street-canyon path loss in dB. Throws std::invalid_argument
// for non-positive distance or frequency.
double PathLossDb(double distance_m, double carrier_ghz, double user_height_m,
                  bool los);

double DbmToWatts(double dbm);

// Scalar downlink SINR over the BS's usable band.
double Sinr(const User& u, const BaseStation& b, const Scenario& s);
LinkBudget ComputeLinkBudget(const User& u, const BaseStation& b,
                             const Scenario& s);

// Link budgets for every (user, BS) pair.
class RadioMap {
 public:
  explicit RadioMap(const Scenario& s);

  const LinkBudget& at(UserId u, BsId b) const { return table_[u * n_bs_ + b]; }
  int num_bs() const { return n_bs_; }

 private:
  int n_bs_;
  std::vector<LinkBudget> table_;
};

// Shannon rate of `prbs` resource blocks.
double Throughput(double prbs, double prb_bandwidth_hz, double sinr_linear);

// Compressed bits of one full frame.
double FrameBits(double pixels, const RadioParams& r);

// share * pixels * bpp * eta * fps.
double TrafficLoad(const Resolution& res, double fps, double share,
                   const RadioParams& r);
double TrafficLoadPixels(double pixels, double fps, double share,
                         const RadioParams& r);

struct LatencyBreakdown {
  double routing_s = 0.0;
  double render_s = 0.0;
  double propagation_s = 0.0;
  double transmission_s = 0.0;
  double processing_s = 0.0;
  double buffer_s = 0.0;
  // Max over serving BSs of the per-BS sum; infinite when infeasible.
  double total_s = 0.0;
  // BS attaining the maximum.
  BsId critical_bs = -1;

  bool Feasible() const;
};

// One serving BS of a user.
struct LegInput {
  BsId bs = 0;
  int prbs = 0;
  double share = 1.0;
  // r(c) of the CN rendering for this leg.
  double render_speed_pps = 1.0;
  // Sum of a_u over every user served by this BS, this user included.
  double arrivals_fps = 0.0;
};

struct LegLatency {
  double render_s = 0.0;
  double propagation_s = 0.0;
  double transmission_s = 0.0;
  double processing_s = 0.0;
  double buffer_s = 0.0;

  double Sum() const {
    return render_s + propagation_s + transmission_s + processing_s + buffer_s;
  }
};

LegLatency ComputeLegLatency(const Scenario& s, const LinkBudget& lb,
                             double pixels, double fps, const LegInput& leg);

// Per-BS component sums, each with the shared routing latency, maximized
// over the legs.
LatencyBreakdown ComputeLatency(const Scenario& s, const RadioMap& m, UserId u,
                                double pixels, double fps, double routing_s,
                                const std::vector<LegInput>& legs);

double DeadlineFor(const RadioParams& r, double fps);
bool CheckDeadline(const LatencyBreakdown& b, double deadline_s);

// Smallest PRB count meeting both the throughput and the latency constraint
// on one leg, ignoring BS capacity. `fixed_s` holds the routing latency.
std::optional<int> MinimumPrbs(const Scenario& s, const LinkBudget& lb,
                               double pixels, double fps, double routing_s,
                               LegInput leg);

// Stage-1 routing: the worst path from each serving BS's nearest CN.
double NearestCnRouting(const Scenario& s, const std::vector<BsId>& bss);

}  // namespace vrcg

#endif  // VRCG_RADIO_H_
