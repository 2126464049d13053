#include "vrcg/radio.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace vrcg {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Positions closer than this to the antenna are evaluated at this distance.
constexpr double kMinDistanceM = 1.0;

double ReceivedWatts(const User& u, const BaseStation& b, const Scenario& s) {
  double d = std::max(kMinDistanceM, Distance(u, b));
  bool los = d <= s.radio.los_threshold_m;
  return DbmToWatts(b.tx_power_dbm -
                    PathLossDb(d, s.radio.carrier_ghz, u.height_m, los));
}

}  // namespace

double LinkBudget::SpectralEfficiency() const {
  return std::log2(1.0 + sinr_linear);
}

double PathLossDb(double distance_m, double carrier_ghz, double user_height_m,
                  bool los) {
  if (!(distance_m > 0.0)) throw std::invalid_argument("distance must be > 0");
  if (!(carrier_ghz > 0.0)) throw std::invalid_argument("frequency must be > 0");
  if (los) {
    return 32.4 + 21.0 * std::log10(distance_m) + 20.0 * std::log10(carrier_ghz);
  }
  return 35.3 + 22.4 * std::log10(distance_m) + 21.3 * std::log10(carrier_ghz) -
         0.3 * (user_height_m - 1.5);
}

double DbmToWatts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double Sinr(const User& u, const BaseStation& b, const Scenario& s) {
  double signal = ReceivedWatts(u, b, s);
  double interference = 0.0;
  for (const BaseStation& other : s.base_stations) {
    if (other.id != b.id && other.channel_id == b.channel_id) {
      interference += ReceivedWatts(u, other, s);
    }
  }
  double bandwidth = b.usable_prbs * b.prb_bandwidth_hz;
  double noise = DbmToWatts(s.radio.noise_density_dbm_hz) * bandwidth;
  return signal / (interference + noise);
}

LinkBudget ComputeLinkBudget(const User& u, const BaseStation& b,
                             const Scenario& s) {
  LinkBudget lb;
  lb.user = u.id;
  lb.bs = b.id;
  lb.distance_m = std::max(kMinDistanceM, Distance(u, b));
  lb.los = lb.distance_m <= s.radio.los_threshold_m;
  lb.path_loss_db =
      PathLossDb(lb.distance_m, s.radio.carrier_ghz, u.height_m, lb.los);
  lb.sinr_linear = Sinr(u, b, s);
  lb.in_coverage = Covers(b, u.x_m, u.y_m);
  return lb;
}

RadioMap::RadioMap(const Scenario& s) : n_bs_(s.NumBs()) {
  table_.reserve(static_cast<size_t>(s.NumUsers()) * n_bs_);
  for (const User& u : s.users) {
    for (const BaseStation& b : s.base_stations) {
      table_.push_back(ComputeLinkBudget(u, b, s));
    }
  }
}

double Throughput(double prbs, double prb_bandwidth_hz, double sinr_linear) {
  return prbs * prb_bandwidth_hz * std::log2(1.0 + sinr_linear);
}

double FrameBits(double pixels, const RadioParams& r) {
  return pixels * r.bits_per_pixel * r.compression_rate;
}

double TrafficLoadPixels(double pixels, double fps, double share,
                         const RadioParams& r) {
  return share * pixels * r.bits_per_pixel * r.compression_rate * fps;
}

double TrafficLoad(const Resolution& res, double fps, double share,
                   const RadioParams& r) {
  return TrafficLoadPixels(res.Pixels(), fps, share, r);
}

bool LatencyBreakdown::Feasible() const { return std::isfinite(total_s); }

LegLatency ComputeLegLatency(const Scenario& s, const LinkBudget& lb,
                             double pixels, double fps, const LegInput& leg) {
  const BaseStation& b = s.base_stations[leg.bs];
  LegLatency out;
  out.render_s = pixels * fps / leg.render_speed_pps;
  out.propagation_s = lb.distance_m / s.radio.speed_of_light_mps;
  double bits = leg.share * FrameBits(pixels, s.radio);
  double tp = Throughput(leg.prbs, b.prb_bandwidth_hz, lb.sinr_linear);
  out.transmission_s = tp > 0.0 ? bits / tp : kInf;
  out.processing_s = bits / b.processing_capacity_bps;
  double residual = b.processing_capacity_fps - leg.arrivals_fps;
  out.buffer_s = residual > 0.0 ? 1.0 / residual : kInf;
  return out;
}

LatencyBreakdown ComputeLatency(const Scenario& s, const RadioMap& m, UserId u,
                                double pixels, double fps, double routing_s,
                                const std::vector<LegInput>& legs) {
  LatencyBreakdown out;
  out.routing_s = routing_s;
  out.total_s = legs.empty() ? kInf : -kInf;
  for (const LegInput& leg : legs) {
    LegLatency l = ComputeLegLatency(s, m.at(u, leg.bs), pixels, fps, leg);
    double total = routing_s + l.Sum();
    if (std::isnan(total)) total = kInf;
    if (total > out.total_s || out.critical_bs < 0) {
      out.total_s = total;
      out.critical_bs = leg.bs;
      out.render_s = l.render_s;
      out.propagation_s = l.propagation_s;
      out.transmission_s = l.transmission_s;
      out.processing_s = l.processing_s;
      out.buffer_s = l.buffer_s;
    }
  }
  return out;
}

double DeadlineFor(const RadioParams& r, double fps) {
  return r.deadline_s ? *r.deadline_s : 1.0 / fps;
}

bool CheckDeadline(const LatencyBreakdown& b, double deadline_s) {
  return b.total_s <= deadline_s;
}

std::optional<int> MinimumPrbs(const Scenario& s, const LinkBudget& lb,
                               double pixels, double fps, double routing_s,
                               LegInput leg) {
  const BaseStation& b = s.base_stations[leg.bs];
  double per_prb = Throughput(1, b.prb_bandwidth_hz, lb.sinr_linear);
  if (!(per_prb > 0.0)) return std::nullopt;
  leg.prbs = 1;
  LegLatency base = ComputeLegLatency(s, lb, pixels, fps, leg);
  double slack = DeadlineFor(s.radio, fps) - routing_s - base.render_s -
                 base.propagation_s - base.processing_s - base.buffer_s;
  if (!(slack > 0.0)) return std::nullopt;
  double bits = leg.share * FrameBits(pixels, s.radio);
  double load = TrafficLoadPixels(pixels, fps, leg.share, s.radio);
  double need = std::max({1.0, load / per_prb, bits / (per_prb * slack)});
  if (need > 1e6) return std::nullopt;
  int y = std::max(1, static_cast<int>(std::ceil(need)));
  // Re-evaluate the original inequalities to absorb rounding.
  if (y > 1) --y;
  for (;; ++y) {
    leg.prbs = y;
    LegLatency l = ComputeLegLatency(s, lb, pixels, fps, leg);
    bool tp_ok = Throughput(y, b.prb_bandwidth_hz, lb.sinr_linear) >= load;
    if (tp_ok && routing_s + l.Sum() <= DeadlineFor(s.radio, fps)) return y;
    if (y > need + 2) return std::nullopt;
  }
}

double NearestCnRouting(const Scenario& s, const std::vector<BsId>& bss) {
  double worst = 0.0;
  for (BsId b : bss) {
    CnId c = s.base_stations[b].nearest_cn;
    const std::vector<PathId>& paths = s.PathsBetween(b, c);
    if (paths.empty() && s.compute_nodes[c].node != s.base_stations[b].node) {
      return kInf;
    }
    for (PathId p : paths) worst = std::max(worst, s.paths[p].latency_s);
  }
  return worst;
}

}  // namespace vrcg
