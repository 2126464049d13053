#include "vrcg/oracle.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>

#include "vrcg/radio.h"

namespace vrcg {
namespace {

constexpr double kQoeTol = 1e-12;

void Refuse(const std::string& what, double estimate = 0.0) {
  throw OracleRefusal("oracle refused: " + what, estimate);
}

void CheckBudget(double estimate, const OracleBounds& b) {
  if (estimate > b.max_evaluations) {
    Refuse("enumeration estimate " + std::to_string(estimate) +
               " exceeds budget " + std::to_string(b.max_evaluations),
           estimate);
  }
}

void CheckMenus(const Scenario& s, const std::vector<UserId>& users,
                const OracleBounds& b, double estimate) {
  for (UserId u : users) {
    const Headset& h = s.HeadsetOf(s.users[u]);
    if (static_cast<int>(h.resolutions.size()) > b.max_resolutions ||
        static_cast<int>(h.frame_rates.size()) > b.max_frame_rates) {
      Refuse("user " + std::to_string(u) + " menu exceeds bounds", estimate);
    }
  }
}

// Non-empty subsets of `items` with at most `max_size` members, each sorted.
std::vector<std::vector<int>> Subsets(const std::vector<int>& items,
                                      int max_size) {
  std::vector<std::vector<int>> out;
  const int n = static_cast<int>(items.size());
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    if (std::popcount(mask) > max_size) continue;
    std::vector<int> sub;
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) sub.push_back(items[i]);
    }
    out.push_back(std::move(sub));
  }
  return out;
}

std::vector<UserId> Admitted(const Scenario& s, const Stage1Solution& sol1) {
  std::vector<UserId> out;
  for (UserId u = 0; u < s.NumUsers(); ++u) {
    if (sol1.admitted[u]) out.push_back(u);
  }
  return out;
}

// Association subsets times menu options per user, from coverage alone.
double Stage1Estimate(const Scenario& s) {
  const int max_conn = std::max(1, s.radio.max_connections);
  double estimate = 1.0;
  for (const User& u : s.users) {
    int covering = 0;
    for (const BaseStation& b : s.base_stations) covering += Covers(b, u.x_m, u.y_m);
    double subsets = 0.0;
    for (int k = 1; k <= std::min(covering, max_conn); ++k) {
      subsets += std::round(std::tgamma(covering + 1.0) /
                            (std::tgamma(k + 1.0) * std::tgamma(covering - k + 1.0)));
    }
    const Headset& h = s.HeadsetOf(u);
    estimate *= 1.0 + subsets * h.resolutions.size() * h.frame_rates.size();
  }
  return estimate;
}

// CN choices times path subsets per leg for the admitted users.
double Stage2Estimate(const Scenario& s, const Stage1Solution& sol1,
                      const std::vector<UserId>& users) {
  const int k = std::max(1, s.radio.k_paths);
  double placements = std::pow(static_cast<double>(s.NumCns()), users.size());
  double per_placement = 1.0;
  for (UserId u : users) {
    double best = 0.0;
    for (CnId c = 0; c < s.NumCns(); ++c) {
      double combos = 1.0;
      for (const Leg& l : sol1.legs[u]) {
        int np = std::min<int>(k, s.PathsBetween(l.bs, c).size());
        combos *= std::pow(2.0, np) - 1.0;
      }
      best = std::max(best, combos);
    }
    per_placement *= std::max(1.0, best);
  }
  return placements * per_placement;
}

// Resolution vectors over every object of the admitted users.
double Stage3Estimate(const Scenario& s, const std::vector<UserId>& users) {
  double estimate = 1.0;
  for (UserId u : users) {
    estimate *= std::pow(static_cast<double>(s.HeadsetOf(s.users[u]).resolutions.size()),
                         static_cast<double>(s.users[u].objects.size()));
  }
  return estimate;
}

struct Candidate1 {
  int res = 0;
  int fps = 0;
  double qoe = 0.0;
  std::vector<Leg> legs;
};

}  // namespace

ExactStage1Result ExactStage1(const Scenario& s, const OracleBounds& bounds) {
  if (s.NumUsers() > bounds.max_users || s.NumBs() > bounds.max_bs) {
    Refuse("instance has more users or BSs than the bounds allow",
           Stage1Estimate(s));
  }
  std::vector<UserId> all(s.NumUsers());
  for (UserId u = 0; u < s.NumUsers(); ++u) all[u] = u;
  CheckMenus(s, all, bounds, Stage1Estimate(s));

  RadioMap m(s);
  const int n = s.NumUsers();
  const int max_conn = std::max(1, s.radio.max_connections);
  ExactStage1Result result;
  std::vector<std::vector<std::vector<int>>> options(n);
  double estimate = 1.0;
  for (UserId u = 0; u < n; ++u) {
    std::vector<int> covering;
    for (BsId b = 0; b < s.NumBs(); ++b) {
      if (m.at(u, b).in_coverage) covering.push_back(b);
    }
    if (covering.empty()) result.uncovered.push_back(u);
    options[u] = Subsets(covering, max_conn);
    const Headset& h = s.HeadsetOf(s.users[u]);
    estimate *= 1.0 + static_cast<double>(options[u].size()) *
                          h.resolutions.size() * h.frame_rates.size();
  }
  CheckBudget(estimate, bounds);

  Stage1Solution best = Stage1Solution::Empty(n);
  for (UserId u = 0; u < n; ++u) best.resolution[u] = best.frame_rate[u] = 0;
  int best_admitted = 0;
  double best_qoe = 0.0;

  auto better = [&](int admitted, double qoe) {
    if (admitted != best_admitted) return admitted > best_admitted;
    return qoe > best_qoe + kQoeTol;
  };

  // choice[u] = index into options[u], or -1 for not admitted.
  std::vector<int> choice(n, -1);
  std::vector<std::vector<Candidate1>> cands(n);
  std::vector<int> pick(n, -1);
  std::vector<int> free(s.NumBs());

  // Upper bound on the QoE users [from, n) can still add.
  std::vector<double> suffix_max(n + 1, 0.0);

  std::function<void(int, int, double)> select = [&](int u, int admitted,
                                                     double qoe) {
    if (u == n) {
      result.evaluations += 1;
      if (!better(admitted, qoe)) return;
      best_admitted = admitted;
      best_qoe = qoe;
      best = Stage1Solution::Empty(n);
      for (UserId v = 0; v < n; ++v) {
        best.resolution[v] = best.frame_rate[v] = 0;
        if (choice[v] < 0) continue;
        const Candidate1& c = cands[v][pick[v]];
        best.admitted[v] = true;
        best.legs[v] = c.legs;
        best.resolution[v] = c.res;
        best.frame_rate[v] = c.fps;
      }
      return;
    }
    if (!better(admitted, qoe + suffix_max[u])) return;
    if (choice[u] < 0) {
      select(u + 1, admitted, qoe);
      return;
    }
    for (int i = 0; i < static_cast<int>(cands[u].size()); ++i) {
      const Candidate1& c = cands[u][i];
      bool fits = true;
      for (const Leg& l : c.legs) fits = fits && l.prbs <= free[l.bs];
      if (!fits) continue;
      for (const Leg& l : c.legs) free[l.bs] -= l.prbs;
      pick[u] = i;
      select(u + 1, admitted, qoe + c.qoe);
      for (const Leg& l : c.legs) free[l.bs] += l.prbs;
    }
    pick[u] = -1;
  };

  // Association sets first; selections are enumerated once arrivals are known.
  std::function<void(int, int)> associate = [&](int u, int admitted) {
    if (u == n) {
      if (admitted < best_admitted) return;
      std::vector<double> arrivals(s.NumBs(), 0.0);
      for (UserId v = 0; v < n; ++v) {
        if (choice[v] < 0) continue;
        for (int b : options[v][choice[v]]) arrivals[b] += s.users[v].frame_arrival_rate;
      }
      for (UserId v = 0; v < n; ++v) {
        cands[v].clear();
        if (choice[v] < 0) continue;
        const std::vector<int>& bss = options[v][choice[v]];
        const Headset& h = s.HeadsetOf(s.users[v]);
        const double routing = NearestCnRouting(s, bss);
        for (int r = 0; r < static_cast<int>(h.resolutions.size()); ++r) {
          for (int f = 0; f < static_cast<int>(h.frame_rates.size()); ++f) {
            Candidate1 c;
            c.res = r;
            c.fps = f;
            bool ok = std::isfinite(routing);
            for (int b : bss) {
              if (!ok) break;
              LegInput in;
              in.bs = b;
              in.share = 1.0 / static_cast<double>(bss.size());
              in.render_speed_pps =
                  s.compute_nodes[s.base_stations[b].nearest_cn].render_speed_pps;
              in.arrivals_fps = arrivals[b];
              std::optional<int> y =
                  MinimumPrbs(s, m.at(v, b), h.resolutions[r].Pixels(),
                              h.frame_rates[f], routing, in);
              if (!y || *y > s.base_stations[b].usable_prbs) {
                ok = false;
                break;
              }
              c.legs.push_back({b, *y, in.share});
            }
            if (!ok) continue;
            Stage1Solution probe = Stage1Solution::Empty(n);
            probe.resolution[v] = r;
            probe.frame_rate[v] = f;
            c.qoe = QoeStage1(s, probe, v);
            cands[v].push_back(std::move(c));
          }
        }
        if (cands[v].empty()) return;
      }
      suffix_max.assign(n + 1, 0.0);
      for (int v = n - 1; v >= 0; --v) {
        double mx = 0.0;
        for (const Candidate1& c : cands[v]) mx = std::max(mx, c.qoe);
        suffix_max[v] = suffix_max[v + 1] + mx;
      }
      for (BsId b = 0; b < s.NumBs(); ++b) free[b] = s.base_stations[b].usable_prbs;
      select(0, admitted, 0.0);
      return;
    }
    if (admitted + (n - u) < best_admitted) return;
    for (int i = 0; i < static_cast<int>(options[u].size()); ++i) {
      choice[u] = i;
      associate(u + 1, admitted + 1);
    }
    choice[u] = -1;
    associate(u + 1, admitted);
  };
  associate(0, 0);

  result.solution = best;
  result.objective = TotalQoeStage1(s, best);
  return result;
}

ExactStage2Result ExactStage2(const Scenario& s, const Stage1Solution& sol1,
                              const std::map<UserId, CnId>& prev_placement,
                              const OracleBounds& bounds) {
  std::vector<UserId> users = Admitted(s, sol1);
  const int n = static_cast<int>(users.size());
  const int n_cns = s.NumCns();
  if (n > bounds.max_users || n_cns > bounds.max_cns) {
    Refuse("instance has more admitted users or CNs than the bounds allow",
           Stage2Estimate(s, sol1, users));
  }
  RadioMap m(s);
  std::vector<double> arrivals = ArrivalsPerBs(s, sol1);
  const int k = std::max(1, s.radio.k_paths);
  const double eps = s.radio.epsilon;

  // Route options per (user, CN): one path subset per leg, latency-checked.
  struct RouteOption {
    std::vector<std::vector<PathId>> per_leg;
  };
  std::vector<std::vector<std::vector<RouteOption>>> routes(
      n, std::vector<std::vector<RouteOption>>(n_cns));
  double estimate = Stage2Estimate(s, sol1, users);
  CheckBudget(estimate, bounds);

  for (int i = 0; i < n; ++i) {
    UserId u = users[i];
    double deadline = DeadlineFor(s.radio, SelectedFps(s, sol1, u));
    for (CnId c = 0; c < n_cns; ++c) {
      std::vector<std::vector<std::vector<PathId>>> leg_subsets;
      bool ok = true;
      for (const Leg& l : sol1.legs[u]) {
        const std::vector<PathId>& all = s.PathsBetween(l.bs, c);
        std::vector<int> first(all.begin(),
                               all.begin() + std::min<int>(k, all.size()));
        if (first.empty()) {
          ok = false;
          break;
        }
        leg_subsets.push_back(Subsets(first, static_cast<int>(first.size())));
      }
      if (!ok) continue;
      std::vector<std::vector<PathId>> cur;
      std::function<void(size_t)> build = [&](size_t leg) {
        if (leg == leg_subsets.size()) {
          std::vector<PathId> flat;
          for (const auto& ps : cur) flat.insert(flat.end(), ps.begin(), ps.end());
          LatencyBreakdown lat = Stage2Latency(s, m, sol1, arrivals, u, c, flat);
          if (lat.total_s <= deadline) routes[i][c].push_back({cur});
          return;
        }
        for (const auto& sub : leg_subsets[leg]) {
          // Even split must leave every path at least epsilon.
          if (1.0 / sub.size() < eps - 1e-12) continue;
          cur.push_back(sub);
          build(leg + 1);
          cur.pop_back();
        }
      };
      build(0);
    }
  }

  // Placements in ascending cost, ties by encoding.
  std::vector<std::pair<double, std::vector<CnId>>> placements;
  {
    std::vector<CnId> p(n, 0);
    while (true) {
      Stage2Solution probe = Stage2Solution::Empty(s.NumUsers());
      for (int i = 0; i < n; ++i) probe.placement[users[i]] = p[i];
      placements.push_back({TotalCost(probe, s, sol1, prev_placement).total, p});
      int d = n - 1;
      while (d >= 0 && ++p[d] == n_cns) p[d--] = 0;
      if (d < 0 || n == 0) break;
    }
  }
  std::stable_sort(placements.begin(), placements.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<DemandProfile> demand(n);
  for (int i = 0; i < n; ++i) demand[i] = ComputeDemand(s, sol1, users[i]);
  std::vector<std::vector<double>> traffic(n);
  for (int i = 0; i < n; ++i) {
    for (const Leg& l : sol1.legs[users[i]]) {
      traffic[i].push_back(LegTraffic(s, m, sol1, users[i], l.bs));
    }
  }

  ExactStage2Result result;
  for (const auto& [cost, place] : placements) {
    std::vector<ResourceVector> used(n_cns);
    for (int i = 0; i < n; ++i) {
      ResourceVector& r = used[place[i]];
      r.gpu += demand[i].gpu;
      r.cpu += demand[i].cpu;
      r.ram += demand[i].ram;
      r.net += demand[i].net;
    }
    bool fits = true;
    for (CnId c = 0; c < n_cns; ++c) {
      const ResourceVector& cap = s.compute_nodes[c].capacity;
      fits = fits && used[c].gpu <= cap.gpu * (1 + 1e-9) &&
             used[c].cpu <= cap.cpu * (1 + 1e-9) &&
             used[c].ram <= cap.ram * (1 + 1e-9) &&
             used[c].net <= cap.net * (1 + 1e-9);
    }
    bool any_route = true;
    for (int i = 0; i < n; ++i) any_route = any_route && !routes[i][place[i]].empty();
    if (!fits || !any_route) continue;

    std::vector<int> pick(n, 0);
    std::optional<Stage2Solution> found;
    std::function<void(int)> search = [&](int i) {
      if (found) return;
      if (i == n) {
        result.evaluations += 1;
        // (user, leg, path) -> flow fraction, even split first.
        std::vector<std::vector<std::vector<double>>> frac(n);
        std::vector<double> load(s.links.size(), 0.0);
        for (int j = 0; j < n; ++j) {
          const RouteOption& ro = routes[j][place[j]][pick[j]];
          frac[j].resize(ro.per_leg.size());
          for (size_t l = 0; l < ro.per_leg.size(); ++l) {
            frac[j][l].assign(ro.per_leg[l].size(), 1.0 / ro.per_leg[l].size());
            for (size_t q = 0; q < ro.per_leg[l].size(); ++q) {
              for (LinkId e : s.paths[ro.per_leg[l][q]].links) {
                load[e] += frac[j][l][q] * traffic[j][l];
              }
            }
          }
        }
        auto residual = [&](PathId p) {
          double r = std::numeric_limits<double>::infinity();
          for (LinkId e : s.paths[p].links) {
            r = std::min(r, s.links[e].capacity_bps - load[e]);
          }
          return r;
        };
        // One rebalance pass: move flow off overloaded paths onto the
        // sibling path with the most room.
        for (int j = 0; j < n; ++j) {
          const RouteOption& ro = routes[j][place[j]][pick[j]];
          for (size_t l = 0; l < ro.per_leg.size(); ++l) {
            const std::vector<PathId>& ps = ro.per_leg[l];
            if (ps.size() < 2) continue;
            const double d = traffic[j][l];
            for (size_t q = 0; q < ps.size(); ++q) {
              double over = -residual(ps[q]);
              if (over <= 0.0) continue;
              size_t to = q;
              double room = 0.0;
              for (size_t t = 0; t < ps.size(); ++t) {
                if (t == q) continue;
                double rr = residual(ps[t]);
                if (rr > room) {
                  room = rr;
                  to = t;
                }
              }
              if (to == q) continue;
              double move = std::min({over, room, (frac[j][l][q] - eps) * d});
              if (move <= 0.0) continue;
              for (LinkId e : s.paths[ps[q]].links) load[e] -= move;
              for (LinkId e : s.paths[ps[to]].links) load[e] += move;
              frac[j][l][q] -= move / d;
              frac[j][l][to] += move / d;
            }
          }
        }
        for (const Link& e : s.links) {
          if (load[e.id] > e.capacity_bps * (1 + 1e-9)) return;
        }
        Stage2Solution sol = Stage2Solution::Empty(s.NumUsers());
        for (int j = 0; j < n; ++j) {
          UserId u = users[j];
          sol.placement[u] = place[j];
          const RouteOption& ro = routes[j][place[j]][pick[j]];
          for (size_t l = 0; l < ro.per_leg.size(); ++l) {
            double sum = 0.0;
            for (size_t q = 0; q < ro.per_leg[l].size(); ++q) {
              double f = q + 1 == ro.per_leg[l].size() ? 1.0 - sum : frac[j][l][q];
              sum += f;
              sol.flows[u].push_back({ro.per_leg[l][q], f});
            }
          }
        }
        if (VerifyStage2(sol, s, sol1).empty()) found = std::move(sol);
        return;
      }
      for (int r = 0; r < static_cast<int>(routes[i][place[i]].size()); ++r) {
        pick[i] = r;
        search(i + 1);
        if (found) return;
      }
    };
    search(0);
    if (found) {
      result.feasible = true;
      result.solution = std::move(*found);
      result.cost = TotalCost(result.solution, s, sol1, prev_placement);
      return result;
    }
  }
  result.solution = Stage2Solution::Empty(s.NumUsers());
  result.solution.unplaced = users;
  return result;
}

ExactStage3Result ExactStage3(const Scenario& s, const Stage1Solution& sol1,
                              const OracleBounds& bounds) {
  std::vector<UserId> users = Admitted(s, sol1);
  const int n = static_cast<int>(users.size());
  if (n > bounds.max_users ||
      s.radio.numerology.ttis_per_window > bounds.max_ttis) {
    Refuse("instance has more admitted users or TTIs than the bounds allow",
           Stage3Estimate(s, users));
  }
  const double estimate = Stage3Estimate(s, users);
  CheckMenus(s, users, bounds, estimate);
  RadioMap m(s);

  for (UserId u : users) {
    if (static_cast<int>(s.users[u].objects.size()) > bounds.max_objects) {
      Refuse("user " + std::to_string(u) + " has too many objects", estimate);
    }
  }
  CheckBudget(estimate, bounds);

  // Per-user feasible resolution vectors with their QoE and PRB targets.
  struct Option {
    std::vector<int> res;
    double qoe = 0.0;
    std::vector<std::pair<BsId, int>> targets;
  };
  std::vector<std::vector<Option>> options(n);
  for (int i = 0; i < n; ++i) {
    UserId u = users[i];
    const int n_obj = static_cast<int>(s.users[u].objects.size());
    const int menu = static_cast<int>(s.HeadsetOf(s.users[u]).resolutions.size());
    const double load = UserLoad(s, sol1, u);
    std::vector<int> r(n_obj, 0);
    while (true) {
      double obj = ObjectsLoad(s, sol1, r, u);
      bool ok = obj <= load * (1 + 1e-9);
      for (const Leg& l : sol1.legs[u]) {
        double tp = Throughput(l.prbs, s.base_stations[l.bs].prb_bandwidth_hz,
                               m.at(u, l.bs).sinr_linear);
        ok = ok && l.share * obj <= tp * (1 + 1e-9);
      }
      if (ok) {
        Option o;
        o.res = r;
        o.qoe = QoeStage3(s, sol1, r, u);
        for (const Leg& l : sol1.legs[u]) {
          o.targets.push_back({l.bs, PrbTarget(s, m, sol1, r, u, l.bs)});
        }
        options[i].push_back(std::move(o));
      }
      int d = n_obj - 1;
      while (d >= 0 && ++r[d] == menu) r[d--] = 0;
      if (d < 0 || n_obj == 0) break;
    }
  }

  const int K = s.radio.numerology.ttis_per_window;
  std::vector<long long> free(s.NumBs());
  for (const BaseStation& b : s.base_stations) {
    free[b.id] = static_cast<long long>(b.usable_prbs) * K;
  }
  std::vector<std::pair<double, std::vector<int>>> feasible;
  std::vector<int> pick(n, 0);
  ExactStage3Result result;
  std::function<void(int, double)> enumerate = [&](int i, double qoe) {
    if (i == n) {
      result.evaluations += 1;
      feasible.push_back({qoe, pick});
      return;
    }
    for (int o = 0; o < static_cast<int>(options[i].size()); ++o) {
      bool fits = true;
      for (const auto& [b, y] : options[i][o].targets) fits = fits && y <= free[b];
      if (!fits) continue;
      for (const auto& [b, y] : options[i][o].targets) free[b] -= y;
      pick[i] = o;
      enumerate(i + 1, qoe + options[i][o].qoe);
      for (const auto& [b, y] : options[i][o].targets) free[b] += y;
    }
  };
  enumerate(0, 0.0);
  std::stable_sort(feasible.begin(), feasible.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });

  for (const auto& [qoe, choice] : feasible) {
    std::vector<std::vector<int>> table(s.NumUsers());
    for (int i = 0; i < n; ++i) table[users[i]] = options[i][choice[i]].res;
    Stage3Solution sol;
    try {
      sol = MtpSched(s, sol1, table);
    } catch (const InfeasibleError&) {
      continue;
    }
    if (!VerifyStage3(sol, s, sol1).empty()) continue;
    result.feasible = true;
    result.solution = std::move(sol);
    result.objective = TotalQoeStage3(s, sol1, result.solution);
    return result;
  }
  return result;
}

}  // namespace vrcg
