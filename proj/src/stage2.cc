#include "vrcg/stage2.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <set>
#include <string>

namespace vrcg {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRelTol = 1e-9;

ResourceVector Add(const ResourceVector& a, const DemandProfile& d) {
  return {a.gpu + d.gpu, a.cpu + d.cpu, a.ram + d.ram, a.net + d.net};
}

bool FitsIn(const ResourceVector& used, const ResourceVector& cap) {
  return used.gpu <= cap.gpu * (1 + kRelTol) &&
         used.cpu <= cap.cpu * (1 + kRelTol) &&
         used.ram <= cap.ram * (1 + kRelTol) &&
         used.net <= cap.net * (1 + kRelTol);
}

// w * v with w = inf and v = 0 read as no penalty.
double Priced(double weight, double violation) {
  return violation > 0.0 ? weight * violation : 0.0;
}

struct Routed {
  std::vector<PathFlow> flows;
  // (link, added bits/s)
  std::vector<std::pair<LinkId, double>> link_delta;
};

class Placer {
 public:
  Placer(const Scenario& s, const Stage1Solution& sol1,
         const std::map<UserId, CnId>& prev, const Stage2Options& opts)
      : s_(s),
        sol1_(sol1),
        prev_(prev),
        m_(s),
        arrivals_(ArrivalsPerBs(s, sol1)),
        k_(std::max(1, opts.k_paths.value_or(s.radio.k_paths))),
        single_(opts.single_path),
        used_(s.NumCns()),
        active_(s.NumCns(), false),
        link_load_(s.links.size(), 0.0) {}

  Stage2Solution Run() {
    Stage2Solution out = Stage2Solution::Empty(s_.NumUsers());
    for (UserId u : FfdOrder(s_, sol1_)) {
      DemandProfile d = ComputeDemand(s_, sol1_, u);
      std::vector<CnId> pref = Preferences(u, d);
      std::deque<CnId> list(pref.begin(), pref.end());
      std::set<CnId> tested;
      bool placed = false;
      while (!list.empty() && !placed) {
        CnId c = list.front();
        list.pop_front();
        if (tested.count(c)) continue;
        if (!active_[c]) {
          std::optional<CnId> reuse = CheaperActive(u, d, c, pref, tested);
          if (reuse) {
            list.push_front(c);
            c = *reuse;
          }
        }
        tested.insert(c);
        if (!FitsIn(Add(used_[c], d), s_.compute_nodes[c].capacity)) continue;
        std::optional<Routed> r = Route(u, c);
        if (!r) continue;
        used_[c] = Add(used_[c], d);
        active_[c] = true;
        for (const auto& [l, x] : r->link_delta) link_load_[l] += x;
        out.placement[u] = c;
        out.flows[u] = std::move(r->flows);
        placed = true;
      }
      if (!placed) out.unplaced.push_back(u);
    }
    std::sort(out.unplaced.begin(), out.unplaced.end());
    return out;
  }

 private:
  double Marginal(UserId u, const DemandProfile& d, CnId c) const {
    std::optional<CnId> prev;
    if (auto it = prev_.find(u); it != prev_.end()) prev = it->second;
    return VariableCost(s_.compute_nodes[c], d) + MigrationCost(s_, prev, c);
  }

  // Feasible CNs by fixed + variable + migration cost, then id. Feasibility
  // uses the lowest-latency path of every serving BS.
  std::vector<CnId> Preferences(UserId u, const DemandProfile& d) const {
    std::vector<std::pair<double, CnId>> ranked;
    for (const ComputeNode& c : s_.compute_nodes) {
      std::vector<PathId> best;
      bool ok = true;
      for (const Leg& l : sol1_.legs[u]) {
        const std::vector<PathId>& ps = s_.PathsBetween(l.bs, c.id);
        if (ps.empty()) {
          ok = false;
          break;
        }
        best.push_back(ps[0]);
      }
      if (!ok) continue;
      LatencyBreakdown lat =
          Stage2Latency(s_, m_, sol1_, arrivals_, u, c.id, best);
      if (!(lat.total_s <= DeadlineFor(s_.radio, SelectedFps(s_, sol1_, u)))) {
        continue;
      }
      ranked.push_back({c.fixed_cost + Marginal(u, d, c.id), c.id});
    }
    std::sort(ranked.begin(), ranked.end());
    std::vector<CnId> out;
    for (const auto& [cost, c] : ranked) out.push_back(c);
    return out;
  }

  std::optional<CnId> CheaperActive(UserId u, const DemandProfile& d, CnId c,
                                    const std::vector<CnId>& pref,
                                    const std::set<CnId>& tested) const {
    double open_cost = s_.compute_nodes[c].fixed_cost + Marginal(u, d, c);
    std::optional<CnId> best;
    double best_cost = kInf;
    for (CnId n : pref) {
      if (!active_[n] || tested.count(n) || n == c) continue;
      double cost = Marginal(u, d, n);
      if (open_cost >= cost && cost < best_cost) {
        best = n;
        best_cost = cost;
      }
    }
    return best;
  }

  double Residual(PathId p, const std::vector<double>& load) const {
    double r = kInf;
    for (LinkId l : s_.paths[p].links) {
      r = std::min(r, s_.links[l].capacity_bps - load[l]);
    }
    return r;
  }

  std::optional<Routed> Route(UserId u, CnId c) const {
    const double deadline = DeadlineFor(s_.radio, SelectedFps(s_, sol1_, u));
    // Radio-side latency with no routing; what is left bounds path latency.
    const double budget =
        deadline - Stage2Latency(s_, m_, sol1_, arrivals_, u, c, {}).total_s;
    if (!(budget >= 0.0)) return std::nullopt;

    std::vector<double> load = link_load_;
    Routed out;
    std::vector<PathId> chosen;
    const double eps = s_.radio.epsilon;
    for (const Leg& leg : sol1_.legs[u]) {
      const double demand = LegTraffic(s_, m_, sol1_, u, leg.bs);
      const std::vector<PathId>& all = s_.PathsBetween(leg.bs, c);
      std::vector<PathId> cand;
      int limit = single_ ? 1 : k_;
      for (int i = 0; i < static_cast<int>(all.size()) && i < limit; ++i) {
        if (s_.paths[all[i]].latency_s <= budget) cand.push_back(all[i]);
      }
      if (single_ && (cand.empty() || cand[0] != all[0])) return std::nullopt;
      std::vector<std::pair<PathId, double>> assigned;
      double remaining = demand;
      for (PathId p : cand) {
        if (remaining <= 0.0) break;
        double room = Residual(p, load);
        if (single_) {
          if (room < demand) return std::nullopt;
        } else if (room < eps * demand || room <= 0.0) {
          continue;
        }
        double x = std::min(remaining, room);
        if (remaining - x > 0.0 && remaining - x < eps * demand &&
            x - (eps * demand - (remaining - x)) >= eps * demand) {
          // Leave enough for the next path to carry at least epsilon.
          x -= eps * demand - (remaining - x);
        }
        for (LinkId l : s_.paths[p].links) load[l] += x;
        assigned.push_back({p, x});
        remaining -= x;
      }
      if (remaining > demand * 1e-12) return std::nullopt;
      // Tail fix-up: a last sliver below epsilon borrows from its predecessor.
      if (assigned.size() >= 2 && assigned.back().second < eps * demand) {
        auto& tail = assigned.back();
        auto& prev = assigned[assigned.size() - 2];
        double gap = eps * demand - tail.second;
        if (prev.second - gap < eps * demand) return std::nullopt;
        if (Residual(tail.first, load) < gap) return std::nullopt;
        for (LinkId l : s_.paths[prev.first].links) load[l] -= gap;
        for (LinkId l : s_.paths[tail.first].links) load[l] += gap;
        prev.second -= gap;
        tail.second += gap;
      }
      double sum = 0.0;
      for (size_t i = 0; i < assigned.size(); ++i) {
        double f = i + 1 == assigned.size() ? 1.0 - sum
                                            : assigned[i].second / demand;
        sum += f;
        out.flows.push_back({assigned[i].first, f});
        chosen.push_back(assigned[i].first);
      }
    }
    LatencyBreakdown lat = Stage2Latency(s_, m_, sol1_, arrivals_, u, c, chosen);
    if (!(lat.total_s <= deadline)) return std::nullopt;
    for (size_t l = 0; l < load.size(); ++l) {
      if (load[l] != link_load_[l]) out.link_delta.push_back({l, load[l] - link_load_[l]});
    }
    return out;
  }

  const Scenario& s_;
  const Stage1Solution& sol1_;
  const std::map<UserId, CnId>& prev_;
  RadioMap m_;
  std::vector<double> arrivals_;
  int k_;
  bool single_;
  std::vector<ResourceVector> used_;
  std::vector<bool> active_;
  std::vector<double> link_load_;
};

}  // namespace

Stage2Solution Stage2Solution::Empty(int n_users) {
  Stage2Solution s;
  s.placement.assign(n_users, -1);
  s.flows.assign(n_users, {});
  return s;
}

std::vector<CnId> Stage2Solution::ActiveCns(int n_cns) const {
  std::vector<bool> on(n_cns, false);
  for (CnId c : placement) {
    if (c >= 0 && c < n_cns) on[c] = true;
  }
  std::vector<CnId> out;
  for (CnId c = 0; c < n_cns; ++c) {
    if (on[c]) out.push_back(c);
  }
  return out;
}

DemandProfile ComputeDemand(const Scenario& s, const Stage1Solution& sol1,
                            UserId u) {
  const DemandModel& dm = s.radio.demand;
  double mpx = SelectedResolution(s, sol1, u).Pixels() / 1e6;
  double fps = SelectedFps(s, sol1, u);
  DemandProfile d;
  d.user = u;
  d.gpu = dm.gpu_per_mpixel_per_s * mpx * fps;
  d.cpu = dm.cpu_base + dm.cpu_per_fps * fps;
  d.ram = dm.ram_base + dm.ram_per_mpixel * mpx;
  d.net = UserLoad(s, sol1, u);
  return d;
}

double VariableCost(const ComputeNode& c, const DemandProfile& d) {
  return d.gpu * c.unit_cost.gpu + d.cpu * c.unit_cost.cpu +
         d.ram * c.unit_cost.ram + d.net * c.unit_cost.net;
}

double MigrationCost(const Scenario& s, std::optional<CnId> prev, CnId next) {
  if (!prev || *prev == next || *prev < 0 || next < 0) return 0.0;
  int hops = s.cn_hops[*prev][next];
  if (hops < 0) return kInf;
  return s.radio.migration_unit_cost * hops;
}

CostBreakdown TotalCost(const Stage2Solution& sol, const Scenario& s,
                        const Stage1Solution& sol1,
                        const std::map<UserId, CnId>& prev_placement) {
  CostBreakdown c;
  for (CnId n : sol.ActiveCns(s.NumCns())) c.fixed += s.compute_nodes[n].fixed_cost;
  for (UserId u = 0; u < s.NumUsers(); ++u) {
    CnId n = sol.placement[u];
    if (n < 0) continue;
    c.variable += VariableCost(s.compute_nodes[n], ComputeDemand(s, sol1, u));
    std::optional<CnId> prev;
    if (auto it = prev_placement.find(u); it != prev_placement.end()) {
      prev = it->second;
    }
    c.migration += MigrationCost(s, prev, n);
  }
  c.total = c.fixed + c.variable + c.migration;
  return c;
}

double LegTraffic(const Scenario& s, const RadioMap& m,
                  const Stage1Solution& sol1, UserId u, BsId b) {
  return Throughput(sol1.PrbsAt(u, b), s.base_stations[b].prb_bandwidth_hz,
                    m.at(u, b).sinr_linear);
}

LatencyBreakdown Stage2Latency(const Scenario& s, const RadioMap& m,
                               const Stage1Solution& sol1,
                               const std::vector<double>& arrivals, UserId u,
                               CnId cn, const std::vector<PathId>& paths) {
  double routing = 0.0;
  for (PathId p : paths) routing = std::max(routing, s.paths[p].latency_s);
  std::vector<LegInput> legs;
  for (const Leg& l : sol1.legs[u]) {
    LegInput in;
    in.bs = l.bs;
    in.prbs = l.prbs;
    in.share = l.share;
    in.render_speed_pps = s.compute_nodes[cn].render_speed_pps;
    in.arrivals_fps = arrivals[l.bs];
    legs.push_back(in);
  }
  return ComputeLatency(s, m, u, SelectedResolution(s, sol1, u).Pixels(),
                        SelectedFps(s, sol1, u), routing, legs);
}

std::vector<UserId> FfdOrder(const Scenario& s, const Stage1Solution& sol1) {
  ResourceVector total;
  for (const ComputeNode& c : s.compute_nodes) {
    total.gpu += c.capacity.gpu;
    total.cpu += c.capacity.cpu;
    total.ram += c.capacity.ram;
    total.net += c.capacity.net;
  }
  std::vector<std::pair<double, UserId>> keyed;
  for (UserId u = 0; u < s.NumUsers(); ++u) {
    if (!sol1.admitted[u]) continue;
    DemandProfile d = ComputeDemand(s, sol1, u);
    double size = d.gpu / total.gpu + d.cpu / total.cpu + d.ram / total.ram +
                  d.net / total.net;
    keyed.push_back({size, u});
  }
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<UserId> out;
  for (const auto& [size, u] : keyed) out.push_back(u);
  return out;
}

Stage2Solution Gepar(const Scenario& s, const Stage1Solution& sol1,
                     const std::map<UserId, CnId>& prev_placement,
                     const Stage2Options& opts) {
  return Placer(s, sol1, prev_placement, opts).Run();
}

Stage2Solution BaselineSinglePath(const Scenario& s, const Stage1Solution& sol1,
                                  const std::map<UserId, CnId>& prev_placement) {
  Stage2Options o;
  o.k_paths = 1;
  o.single_path = true;
  return Gepar(s, sol1, prev_placement, o);
}

Stage2Solution BaselineUnconstrained(const Scenario& s,
                                     const Stage1Solution& sol1,
                                     const std::map<UserId, CnId>& prev_placement,
                                     const PenaltyWeights& w) {
  (void)prev_placement;  // Migration is not priced by this baseline.
  RadioMap m(s);
  std::vector<double> arrivals = ArrivalsPerBs(s, sol1);
  std::vector<ResourceVector> used(s.NumCns());
  std::vector<bool> active(s.NumCns(), false);
  std::vector<double> link_load(s.links.size(), 0.0);
  Stage2Solution out = Stage2Solution::Empty(s.NumUsers());
  for (UserId u : FfdOrder(s, sol1)) {
    DemandProfile d = ComputeDemand(s, sol1, u);
    double deadline = DeadlineFor(s.radio, SelectedFps(s, sol1, u));
    double best = kInf;
    CnId best_c = -1;
    std::vector<PathFlow> best_flows;
    for (const ComputeNode& c : s.compute_nodes) {
      std::vector<PathFlow> flows;
      std::vector<PathId> chosen;
      std::vector<double> load = link_load;
      bool routable = true;
      for (const Leg& l : sol1.legs[u]) {
        const std::vector<PathId>& ps = s.PathsBetween(l.bs, c.id);
        if (ps.empty()) {
          routable = false;
          break;
        }
        flows.push_back({ps[0], 1.0});
        chosen.push_back(ps[0]);
        for (LinkId id : s.paths[ps[0]].links) {
          load[id] += LegTraffic(s, m, sol1, u, l.bs);
        }
      }
      if (!routable) continue;
      ResourceVector after = Add(used[c.id], d);
      double cap_violation =
          std::max(0.0, after.gpu - c.capacity.gpu) / c.capacity.gpu +
          std::max(0.0, after.cpu - c.capacity.cpu) / c.capacity.cpu +
          std::max(0.0, after.ram - c.capacity.ram) / c.capacity.ram +
          std::max(0.0, after.net - c.capacity.net) / c.capacity.net;
      double link_violation = 0.0;
      for (PathId p : chosen) {
        for (LinkId id : s.paths[p].links) {
          double over = std::max(0.0, load[id] - s.links[id].capacity_bps) -
                        std::max(0.0, link_load[id] - s.links[id].capacity_bps);
          link_violation += over / s.links[id].capacity_bps;
        }
      }
      LatencyBreakdown lat = Stage2Latency(s, m, sol1, arrivals, u, c.id, chosen);
      double lat_violation = std::max(0.0, lat.total_s - deadline) / deadline;
      double cost = (active[c.id] ? 0.0 : c.fixed_cost) + VariableCost(c, d) +
                    Priced(w.capacity, cap_violation) +
                    Priced(w.link, link_violation) +
                    Priced(w.latency, lat_violation) +
                    Priced(w.qos, lat.total_s / deadline);
      if (cost < best) {
        best = cost;
        best_c = c.id;
        best_flows = std::move(flows);
      }
    }
    if (best_c < 0) {
      out.unplaced.push_back(u);
      continue;
    }
    used[best_c] = Add(used[best_c], d);
    active[best_c] = true;
    for (const PathFlow& f : best_flows) {
      const Path& p = s.paths[f.path];
      for (LinkId id : p.links) link_load[id] += LegTraffic(s, m, sol1, u, p.bs);
    }
    out.placement[u] = best_c;
    out.flows[u] = std::move(best_flows);
  }
  std::sort(out.unplaced.begin(), out.unplaced.end());
  return out;
}

ViolationReport VerifyStage2(const Stage2Solution& sol, const Scenario& s,
                             const Stage1Solution& sol1) {
  ViolationReport r;
  auto add = [&](std::string c, std::string e, std::string d) {
    r.push_back({std::move(c), std::move(e), std::move(d)});
  };
  const int n = s.NumUsers();
  if (static_cast<int>(sol.placement.size()) != n ||
      static_cast<int>(sol.flows.size()) != n) {
    add("shape", "solution", "per-user arrays do not match the user count");
    return r;
  }
  RadioMap m(s);
  std::vector<double> arrivals = ArrivalsPerBs(s, sol1);
  std::vector<ResourceVector> used(s.NumCns());
  std::vector<double> link_load(s.links.size(), 0.0);
  const double eps = s.radio.epsilon;
  for (UserId u = 0; u < n; ++u) {
    std::string who = "user " + std::to_string(u);
    CnId c = sol.placement[u];
    if (!sol1.admitted[u]) {
      if (c >= 0 || !sol.flows[u].empty()) {
        add("placement", who, "unadmitted user is placed");
      }
      continue;
    }
    bool reported = std::find(sol.unplaced.begin(), sol.unplaced.end(), u) !=
                    sol.unplaced.end();
    if (reported) {
      if (c >= 0 || !sol.flows[u].empty()) {
        add("placement", who, "user reported unplaced is placed");
      }
      continue;
    }
    if (c < 0 || c >= s.NumCns()) {
      add("placement", who, "must be assigned to exactly one CN");
      continue;
    }
    DemandProfile d = ComputeDemand(s, sol1, u);
    used[c] = Add(used[c], d);
    std::vector<PathId> chosen;
    bool flows_ok = true;
    for (const PathFlow& f : sol.flows[u]) {
      if (f.path < 0 || f.path >= static_cast<int>(s.paths.size())) {
        add("path_selection", who, "unknown path " + std::to_string(f.path));
        flows_ok = false;
        continue;
      }
      const Path& p = s.paths[f.path];
      if (p.cn != c || sol1.LegAt(u, p.bs) == nullptr) {
        add("path_selection", who, "path " + std::to_string(p.id) +
                                       " does not join the host CN to a serving BS");
        flows_ok = false;
      }
      if (!(f.flow > 0.0) || f.flow < eps - 1e-12) {
        add("flow_consistency", who, "path " + std::to_string(p.id) +
                                         " carries less than epsilon");
      }
      if (f.flow > 1.0 + 1e-12) {
        add("flow_consistency", who, "flow fraction above 1");
      }
      chosen.push_back(f.path);
    }
    if (!flows_ok) continue;
    for (const Leg& l : sol1.legs[u]) {
      double sum = 0.0;
      int count = 0;
      for (const PathFlow& f : sol.flows[u]) {
        if (s.paths[f.path].bs == l.bs) {
          sum += f.flow;
          ++count;
        }
      }
      std::string leg = who + " bs " + std::to_string(l.bs);
      if (count == 0) {
        add("routing", leg, "no path selected");
        continue;
      }
      if (std::abs(sum - 1.0) > 1e-9) {
        add("conservation", leg, "flow fractions sum to " + std::to_string(sum));
      }
      double tp = LegTraffic(s, m, sol1, u, l.bs);
      for (const PathFlow& f : sol.flows[u]) {
        if (s.paths[f.path].bs != l.bs) continue;
        for (LinkId id : s.paths[f.path].links) link_load[id] += f.flow * tp;
      }
    }
    LatencyBreakdown lat = Stage2Latency(s, m, sol1, arrivals, u, c, chosen);
    double deadline = DeadlineFor(s.radio, SelectedFps(s, sol1, u));
    if (!(lat.total_s <= deadline * (1.0 + kRelTol))) {
      add("deadline", who, "latency " + std::to_string(lat.total_s) +
                               " s exceeds " + std::to_string(deadline) + " s");
    }
  }
  for (const ComputeNode& c : s.compute_nodes) {
    if (!FitsIn(used[c.id], c.capacity)) {
      add("cn_capacity", "compute_node " + std::to_string(c.id),
          "resource demand exceeds capacity");
    }
  }
  for (const Link& l : s.links) {
    if (link_load[l.id] > l.capacity_bps * (1.0 + kRelTol)) {
      add("link_capacity", "link " + std::to_string(l.id),
          std::to_string(link_load[l.id]) + " bit/s over " +
              std::to_string(l.capacity_bps));
    }
  }
  return r;
}

}  // namespace vrcg
