#include "vrcg/stage1.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "stage1_state.h"
#include "vrcg/rng.h"

namespace vrcg {
namespace internal {

constexpr double kRelTol = 1e-9;

double PixelsOf(const Scenario& s, UserId u, int res) {
  return s.HeadsetOf(s.users[u]).resolutions[res].Pixels();
}

double FpsOf(const Scenario& s, UserId u, int fps) {
  return s.HeadsetOf(s.users[u]).frame_rates[fps];
}

Stage1State::Stage1State(const Scenario& s, const RadioMap& m)
    : s_(s),
      m_(m),
      avail_(s.NumBs()),
      arrivals_(s.NumBs(), 0.0),
      members_(s.NumBs()),
      sol_(Stage1Solution::Empty(s.NumUsers())) {
  for (const BaseStation& b : s.base_stations) avail_[b.id] = b.usable_prbs;
}

Stage1State::Stage1State(const Scenario& s, const RadioMap& m,
                         const Stage1Solution& sol)
    : Stage1State(s, m) {
  for (UserId u = 0; u < s.NumUsers(); ++u) {
    if (sol.admitted[u]) {
      Assign(u, sol.legs[u], sol.resolution[u], sol.frame_rate[u]);
    } else {
      sol_.resolution[u] = sol.resolution[u];
      sol_.frame_rate[u] = sol.frame_rate[u];
    }
  }
}

std::optional<std::vector<Leg>> Stage1State::Plan(UserId u,
                                                  const std::vector<BsId>& bss,
                                                  int res, int fps) const {
  const double pixels = PixelsOf(s_, u, res);
  const double rate = FpsOf(s_, u, fps);
  const double routing = NearestCnRouting(s_, bss);
  if (!std::isfinite(routing)) return std::nullopt;
  const double a_u = s_.users[u].frame_arrival_rate;
  std::vector<Leg> legs;
  for (BsId b : bss) {
    if (!m_.at(u, b).in_coverage) return std::nullopt;
    LegInput in;
    in.bs = b;
    in.share = 1.0 / static_cast<double>(bss.size());
    in.render_speed_pps =
        s_.compute_nodes[s_.base_stations[b].nearest_cn].render_speed_pps;
    bool present = sol_.LegAt(u, b) != nullptr;
    in.arrivals_fps = arrivals_[b] + (present ? 0.0 : a_u);
    std::optional<int> y = MinimumPrbs(s_, m_.at(u, b), pixels, rate, routing, in);
    if (!y) return std::nullopt;
    legs.push_back({b, *y, in.share});
  }
  std::sort(legs.begin(), legs.end(),
            [](const Leg& a, const Leg& b) { return a.bs < b.bs; });
  return legs;
}

bool Stage1State::Fits(UserId u, const std::vector<Leg>& legs) const {
  for (const Leg& l : legs) {
    const Leg* cur = sol_.LegAt(u, l.bs);
    int free = avail_[l.bs] + (cur ? cur->prbs : 0);
    if (l.prbs > free) return false;
  }
  return true;
}

bool Stage1State::UserMeetsDeadline(UserId v,
                                    const std::vector<double>& arrivals) const {
  LatencyBreakdown lat = Stage1Latency(s_, m_, sol_, arrivals, v);
  return lat.total_s <= DeadlineFor(s_.radio, SelectedFps(s_, sol_, v));
}

bool Stage1State::IncumbentsKeepDeadline(UserId u,
                                         const std::vector<BsId>& bss) const {
  std::vector<double> arrivals = arrivals_;
  std::vector<BsId> joined;
  for (BsId b : bss) {
    if (sol_.LegAt(u, b) == nullptr) {
      arrivals[b] += s_.users[u].frame_arrival_rate;
      joined.push_back(b);
    }
  }
  // Users on BSs u leaves see lower queues, which never hurts.
  for (BsId b : joined) {
    for (UserId v : members_[b]) {
      if (v != u && !UserMeetsDeadline(v, arrivals)) return false;
    }
  }
  return true;
}

void Stage1State::Assign(UserId u, std::vector<Leg> legs, int res, int fps) {
  Remove(u);
  for (const Leg& l : legs) {
    avail_[l.bs] -= l.prbs;
    arrivals_[l.bs] += s_.users[u].frame_arrival_rate;
    members_[l.bs].push_back(u);
  }
  sol_.legs[u] = std::move(legs);
  sol_.resolution[u] = res;
  sol_.frame_rate[u] = fps;
  sol_.admitted[u] = true;
}

void Stage1State::Remove(UserId u) {
  for (const Leg& l : sol_.legs[u]) {
    avail_[l.bs] += l.prbs;
    arrivals_[l.bs] -= s_.users[u].frame_arrival_rate;
    auto& mem = members_[l.bs];
    mem.erase(std::find(mem.begin(), mem.end(), u));
  }
  sol_.legs[u].clear();
  sol_.admitted[u] = false;
}

}  // namespace internal

using internal::FpsOf;
using internal::PixelsOf;
using internal::Stage1State;

Stage1Solution Stage1Solution::Empty(int n_users) {
  Stage1Solution s;
  s.legs.assign(n_users, {});
  s.resolution.assign(n_users, -1);
  s.frame_rate.assign(n_users, -1);
  s.admitted.assign(n_users, false);
  return s;
}

int Stage1Solution::NumAdmitted() const {
  return static_cast<int>(std::count(admitted.begin(), admitted.end(), true));
}

std::vector<BsId> Stage1Solution::ServingBs(UserId u) const {
  std::vector<BsId> out;
  for (const Leg& l : legs[u]) out.push_back(l.bs);
  return out;
}

const Leg* Stage1Solution::LegAt(UserId u, BsId b) const {
  for (const Leg& l : legs[u]) {
    if (l.bs == b) return &l;
  }
  return nullptr;
}

int Stage1Solution::PrbsAt(UserId u, BsId b) const {
  const Leg* l = LegAt(u, b);
  return l ? l->prbs : 0;
}

const Resolution& SelectedResolution(const Scenario& s,
                                     const Stage1Solution& sol, UserId u) {
  return s.HeadsetOf(s.users[u]).resolutions[sol.resolution[u]];
}

double SelectedFps(const Scenario& s, const Stage1Solution& sol, UserId u) {
  return s.HeadsetOf(s.users[u]).frame_rates[sol.frame_rate[u]];
}

double UserLoad(const Scenario& s, const Stage1Solution& sol, UserId u) {
  return TrafficLoad(SelectedResolution(s, sol, u), SelectedFps(s, sol, u), 1.0,
                     s.radio);
}

double QoeStage1(const Scenario& s, const Stage1Solution& sol, UserId u) {
  const Headset& h = s.HeadsetOf(s.users[u]);
  if (s.GameOf(s.users[u]).mode == PreferenceMode::kQuality) {
    return std::log(h.resolutions[sol.resolution[u]].Pixels() /
                    h.resolutions.front().Pixels());
  }
  return std::log(h.frame_rates[sol.frame_rate[u]] / h.frame_rates.front());
}

double TotalQoeStage1(const Scenario& s, const Stage1Solution& sol) {
  double total = 0.0;
  for (UserId u = 0; u < s.NumUsers(); ++u) {
    if (sol.admitted[u]) total += QoeStage1(s, sol, u);
  }
  return total;
}

std::vector<double> ArrivalsPerBs(const Scenario& s, const Stage1Solution& sol) {
  std::vector<double> a(s.NumBs(), 0.0);
  for (UserId u = 0; u < s.NumUsers(); ++u) {
    if (!sol.admitted[u]) continue;
    for (const Leg& l : sol.legs[u]) a[l.bs] += s.users[u].frame_arrival_rate;
  }
  return a;
}

LatencyBreakdown Stage1Latency(const Scenario& s, const RadioMap& m,
                               const Stage1Solution& sol,
                               const std::vector<double>& arrivals, UserId u) {
  std::vector<LegInput> legs;
  for (const Leg& l : sol.legs[u]) {
    LegInput in;
    in.bs = l.bs;
    in.prbs = l.prbs;
    in.share = l.share;
    in.render_speed_pps =
        s.compute_nodes[s.base_stations[l.bs].nearest_cn].render_speed_pps;
    in.arrivals_fps = arrivals[l.bs];
    legs.push_back(in);
  }
  return ComputeLatency(s, m, u, SelectedResolution(s, sol, u).Pixels(),
                        SelectedFps(s, sol, u),
                        NearestCnRouting(s, sol.ServingBs(u)), legs);
}

std::vector<std::vector<BsId>> BsPreferences(const Scenario& s,
                                             const RadioMap& m) {
  std::vector<std::vector<BsId>> prefs(s.NumUsers());
  for (UserId u = 0; u < s.NumUsers(); ++u) {
    for (BsId b = 0; b < s.NumBs(); ++b) {
      if (m.at(u, b).in_coverage) prefs[u].push_back(b);
    }
    std::stable_sort(prefs[u].begin(), prefs[u].end(), [&](BsId a, BsId b) {
      return m.at(u, a).sinr_linear > m.at(u, b).sinr_linear;
    });
  }
  return prefs;
}

namespace {

// Limits how often one user can be displaced so the admission loop ends.
constexpr int kMaxEvictionsPerUser = 4;

void Restore(Stage1State& st, const Stage1Solution& snapshot) {
  for (UserId v = 0; v < static_cast<int>(snapshot.legs.size()); ++v) {
    const Stage1Solution& cur = st.solution();
    if (cur.legs[v] == snapshot.legs[v] &&
        cur.resolution[v] == snapshot.resolution[v] &&
        cur.frame_rate[v] == snapshot.frame_rate[v]) {
      continue;
    }
    if (snapshot.admitted[v]) {
      st.Assign(v, snapshot.legs[v], snapshot.resolution[v],
                snapshot.frame_rate[v]);
    } else {
      st.Remove(v);
    }
  }
}

// Hands incumbents of b other than u over to another BS of their own
// preference list, keeping their selection, until b has `need` free PRBs.
// Restores every moved user and returns false when that is not possible.
bool HandOver(Stage1State& st, const std::vector<std::vector<BsId>>& prefs,
              const std::vector<std::vector<int>>& rank, UserId u, BsId b,
              int need) {
  if (st.Available(b) >= need) return true;
  std::vector<UserId> cands;
  for (UserId v : st.Members(b)) {
    if (v != u) cands.push_back(v);
  }
  std::sort(cands.begin(), cands.end(), [&](UserId a, UserId c) {
    if (rank[a][b] != rank[c][b]) return rank[a][b] > rank[c][b];
    return a < c;
  });
  std::vector<std::pair<UserId, std::vector<Leg>>> moved;
  for (UserId v : cands) {
    if (st.Available(b) >= need) break;
    const Stage1Solution& cur = st.solution();
    std::vector<BsId> from = cur.ServingBs(v);
    for (BsId alt : prefs[v]) {
      if (std::find(from.begin(), from.end(), alt) != from.end()) continue;
      std::vector<BsId> to;
      for (BsId x : from) {
        if (x != b) to.push_back(x);
      }
      to.push_back(alt);
      std::sort(to.begin(), to.end());
      int res = cur.resolution[v];
      int fps = cur.frame_rate[v];
      std::optional<std::vector<Leg>> legs = st.Plan(v, to, res, fps);
      if (!legs || !st.Fits(v, *legs) || !st.IncumbentsKeepDeadline(v, to)) {
        continue;
      }
      moved.push_back({v, cur.legs[v]});
      st.Assign(v, std::move(*legs), res, fps);
      break;
    }
  }
  if (st.Available(b) >= need) return true;
  for (auto it = moved.rbegin(); it != moved.rend(); ++it) {
    const Stage1Solution& cur = st.solution();
    int res = cur.resolution[it->first];
    int fps = cur.frame_rate[it->first];
    st.Assign(it->first, it->second, res, fps);
  }
  return false;
}

class VexaSolver {
 public:
  VexaSolver(const Scenario& s, const RadioMap& m, int max_conn,
             std::uint64_t seed)
      : s_(s),
        state_(s, m),
        prefs_(BsPreferences(s, m)),
        rank_(s.NumUsers(), std::vector<int>(s.NumBs(), -1)),
        cursor_(s.NumUsers(), 0),
        evictions_(s.NumUsers(), 0),
        max_conn_(max_conn),
        rng_(seed) {
    for (UserId u = 0; u < s.NumUsers(); ++u) {
      for (size_t i = 0; i < prefs_[u].size(); ++i) rank_[u][prefs_[u][i]] = i;
    }
  }

  Stage1Solution Run() {
    std::vector<UserId> pool;
    for (UserId u = 0; u < s_.NumUsers(); ++u) pool.push_back(u);
    while (!pool.empty()) {
      int pick = rng_.Index(static_cast<int>(pool.size()));
      UserId u = pool[pick];
      pool.erase(pool.begin() + pick);
      std::vector<UserId> evicted = Admit(u);
      for (UserId v : evicted) {
        pool.insert(std::lower_bound(pool.begin(), pool.end(), v), v);
      }
    }
    Stage1Solution sol = state_.solution();
    // Unadmitted users keep the minimum selection for reporting.
    for (UserId u = 0; u < s_.NumUsers(); ++u) {
      if (!sol.admitted[u]) {
        sol.resolution[u] = 0;
        sol.frame_rate[u] = 0;
      }
    }
    return sol;
  }

 private:
  bool TryCommit(UserId u, const std::vector<BsId>& bss) {
    std::optional<std::vector<Leg>> legs = state_.Plan(u, bss, 0, 0);
    if (!legs || !state_.Fits(u, *legs) ||
        !state_.IncumbentsKeepDeadline(u, bss)) {
      return false;
    }
    state_.Assign(u, std::move(*legs), 0, 0);
    return true;
  }

  // Splits across b and the next preferred BSs that still have free PRBs.
  bool TryMulti(UserId u, size_t from) {
    for (int c = 2; c <= max_conn_; ++c) {
      std::vector<BsId> bss = {prefs_[u][from]};
      for (size_t j = from + 1;
           j < prefs_[u].size() && static_cast<int>(bss.size()) < c; ++j) {
        if (state_.Available(prefs_[u][j]) > 0) bss.push_back(prefs_[u][j]);
      }
      if (static_cast<int>(bss.size()) < c) return false;
      if (TryCommit(u, bss)) return true;
    }
    return false;
  }

  // Makes room on b by moving incumbents to other BSs, then admits u there.
  bool TryHandOver(UserId u, BsId b) {
    std::optional<std::vector<Leg>> legs = state_.Plan(u, {b}, 0, 0);
    if (!legs || (*legs)[0].prbs > s_.base_stations[b].usable_prbs) return false;
    int need = (*legs)[0].prbs;
    if (state_.Available(b) >= need) return false;
    Stage1Solution snapshot = state_.solution();
    if (HandOver(state_, prefs_, rank_, u, b, need) && TryCommit(u, {b})) {
      return true;
    }
    Restore(state_, snapshot);
    return false;
  }

  // Evicts lower-priority incumbents of b if that lets u in on b alone.
  bool TryReplace(UserId u, BsId b, std::vector<UserId>& evicted) {
    std::vector<UserId> cands;
    for (UserId v : state_.Members(b)) {
      if (rank_[v][b] > rank_[u][b] && evictions_[v] < kMaxEvictionsPerUser) {
        cands.push_back(v);
      }
    }
    if (cands.empty()) return false;
    std::sort(cands.begin(), cands.end(), [&](UserId a, UserId c) {
      if (rank_[a][b] != rank_[c][b]) return rank_[a][b] > rank_[c][b];
      return a < c;
    });
    std::optional<std::vector<Leg>> legs = state_.Plan(u, {b}, 0, 0);
    if (!legs) return false;
    int need = (*legs)[0].prbs;
    int freed = state_.Available(b);
    size_t take = 0;
    while (take < cands.size() && freed < need) {
      freed += state_.solution().PrbsAt(cands[take], b);
      ++take;
    }
    if (freed < need) return false;

    Stage1Solution snapshot = state_.solution();
    std::vector<UserId> out(cands.begin(), cands.begin() + take);
    for (UserId v : out) state_.Remove(v);
    if (!TryCommit(u, {b})) {
      for (UserId v : out) {
        state_.Assign(v, snapshot.legs[v], snapshot.resolution[v],
                      snapshot.frame_rate[v]);
      }
      return false;
    }
    for (UserId v : out) {
      ++evictions_[v];
      const std::vector<BsId>& pv = prefs_[v];
      if (pv[cursor_[v]] == b) ++cursor_[v];
      evicted.push_back(v);
    }
    return true;
  }

  std::vector<UserId> Admit(UserId u) {
    std::vector<UserId> evicted;
    for (size_t i = cursor_[u]; i < prefs_[u].size(); ++i) {
      BsId b = prefs_[u][i];
      cursor_[u] = static_cast<int>(i);
      if (TryCommit(u, {b})) return evicted;
      if (TryMulti(u, i)) return evicted;
      if (TryHandOver(u, b)) return evicted;
      if (TryReplace(u, b, evicted)) return evicted;
    }
    cursor_[u] = static_cast<int>(prefs_[u].size());
    return evicted;
  }

  const Scenario& s_;
  Stage1State state_;
  std::vector<std::vector<BsId>> prefs_;
  std::vector<std::vector<int>> rank_;
  std::vector<int> cursor_;
  std::vector<int> evictions_;
  int max_conn_;
  Rng rng_;
};

double MaxQoe(const Scenario& s, UserId u) {
  const Headset& h = s.HeadsetOf(s.users[u]);
  if (s.GameOf(s.users[u]).mode == PreferenceMode::kQuality) {
    return std::log(h.resolutions.back().Pixels() / h.resolutions.front().Pixels());
  }
  return std::log(h.frame_rates.back() / h.frame_rates.front());
}

}  // namespace

Stage1Solution MaximizeQoe(const Scenario& s, Stage1Solution sol) {
  RadioMap m(s);
  Stage1State state(s, m, sol);
  std::vector<std::vector<BsId>> prefs = BsPreferences(s, m);
  std::vector<std::vector<int>> rank(s.NumUsers(), std::vector<int>(s.NumBs(), -1));
  for (UserId u = 0; u < s.NumUsers(); ++u) {
    for (size_t i = 0; i < prefs[u].size(); ++i) rank[u][prefs[u][i]] = i;
  }
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<std::pair<double, UserId>> order;
    const Stage1Solution& cur = state.solution();
    for (UserId u = 0; u < s.NumUsers(); ++u) {
      if (cur.admitted[u]) order.push_back({MaxQoe(s, u) - QoeStage1(s, cur, u), u});
    }
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    for (const auto& [util, u] : order) {
      const Headset& h = s.HeadsetOf(s.users[u]);
      int res = state.solution().resolution[u];
      int fps = state.solution().frame_rate[u];
      if (s.GameOf(s.users[u]).mode == PreferenceMode::kQuality) {
        if (res + 1 >= static_cast<int>(h.resolutions.size())) continue;
        ++res;
      } else {
        if (fps + 1 >= static_cast<int>(h.frame_rates.size())) continue;
        ++fps;
      }
      std::vector<BsId> bss = state.solution().ServingBs(u);
      std::optional<std::vector<Leg>> legs = state.Plan(u, bss, res, fps);
      if (!legs) continue;
      if (!state.Fits(u, *legs)) {
        // Free the missing PRBs by handing other users over.
        Stage1Solution snapshot = state.solution();
        bool ok = true;
        for (const Leg& l : *legs) {
          int need = l.prbs - state.solution().PrbsAt(u, l.bs);
          if (!HandOver(state, prefs, rank, u, l.bs, need)) {
            ok = false;
            break;
          }
        }
        if (!ok || !state.Fits(u, *legs)) {
          Restore(state, snapshot);
          continue;
        }
      }
      state.Assign(u, std::move(*legs), res, fps);
      changed = true;
    }
  }
  return state.solution();
}

Stage1Solution Vexa(const Scenario& s, const Stage1Options& opts) {
  RadioMap m(s);
  int n = std::max(1, opts.max_connections.value_or(s.radio.max_connections));
  VexaSolver solver(s, m, n, opts.seed.value_or(s.seed));
  return MaximizeQoe(s, solver.Run());
}

Stage1Solution BaselineSingleAssociation(const Scenario& s) {
  Stage1Options o;
  o.max_connections = 1;
  return Vexa(s, o);
}

Stage1Solution BaselineDualConnectivity(const Scenario& s) {
  Stage1Options o;
  o.max_connections = 2;
  return Vexa(s, o);
}

ViolationReport VerifyStage1(const Stage1Solution& sol, const Scenario& s) {
  ViolationReport r;
  auto add = [&](std::string c, std::string e, std::string d) {
    r.push_back({std::move(c), std::move(e), std::move(d)});
  };
  const int n = s.NumUsers();
  if (static_cast<int>(sol.legs.size()) != n ||
      static_cast<int>(sol.resolution.size()) != n ||
      static_cast<int>(sol.frame_rate.size()) != n ||
      static_cast<int>(sol.admitted.size()) != n) {
    add("shape", "solution", "per-user arrays do not match the user count");
    return r;
  }
  RadioMap m(s);
  std::vector<int> used(s.NumBs(), 0);
  bool shape_ok = true;
  for (UserId u = 0; u < n; ++u) {
    std::string who = "user " + std::to_string(u);
    const Headset& h = s.HeadsetOf(s.users[u]);
    if (!sol.admitted[u]) {
      if (!sol.legs[u].empty()) add("association", who, "unadmitted user has legs");
      continue;
    }
    int k = static_cast<int>(sol.legs[u].size());
    if (k < 1 || k > s.radio.max_connections) {
      add("association", who, "needs between 1 and N serving BSs, has " +
                                  std::to_string(k));
    }
    if (sol.resolution[u] < 0 ||
        sol.resolution[u] >= static_cast<int>(h.resolutions.size())) {
      add("resolution", who, "exactly one supported resolution required");
      shape_ok = false;
    }
    if (sol.frame_rate[u] < 0 ||
        sol.frame_rate[u] >= static_cast<int>(h.frame_rates.size())) {
      add("frame_rate", who, "exactly one supported frame rate required");
      shape_ok = false;
    }
    double share_sum = 0.0;
    for (size_t i = 0; i < sol.legs[u].size(); ++i) {
      const Leg& l = sol.legs[u][i];
      if (l.bs < 0 || l.bs >= s.NumBs()) {
        add("association", who, "unknown BS " + std::to_string(l.bs));
        shape_ok = false;
        continue;
      }
      for (size_t j = 0; j < i; ++j) {
        if (sol.legs[u][j].bs == l.bs) add("association", who, "duplicate BS");
      }
      if (l.prbs <= 0) {
        add("prb_exclusivity", who, "serving BS " + std::to_string(l.bs) +
                                        " grants no PRBs");
      }
      if (!m.at(u, l.bs).in_coverage) {
        add("coverage", who, "BS " + std::to_string(l.bs) + " out of range");
      }
      if (!(l.share > 0.0)) add("share", who, "non-positive traffic share");
      share_sum += l.share;
      used[l.bs] += l.prbs;
    }
    if (k >= 1 && std::abs(share_sum - 1.0) > 1e-9) {
      add("share", who, "traffic shares sum to " + std::to_string(share_sum));
    }
  }
  for (const BaseStation& b : s.base_stations) {
    if (used[b.id] > b.usable_prbs) {
      add("bs_capacity", "base_station " + std::to_string(b.id),
          std::to_string(used[b.id]) + " PRBs allocated, " +
              std::to_string(b.usable_prbs) + " usable");
    }
  }
  if (!shape_ok) return r;

  std::vector<double> arrivals = ArrivalsPerBs(s, sol);
  for (UserId u = 0; u < n; ++u) {
    if (!sol.admitted[u] || sol.legs[u].empty()) continue;
    std::string who = "user " + std::to_string(u);
    double load = UserLoad(s, sol, u);
    for (const Leg& l : sol.legs[u]) {
      const BaseStation& b = s.base_stations[l.bs];
      double tp = Throughput(l.prbs, b.prb_bandwidth_hz, m.at(u, l.bs).sinr_linear);
      if (l.share * load > tp * (1.0 + internal::kRelTol)) {
        add("throughput", who, "load exceeds throughput on BS " +
                                   std::to_string(l.bs));
      }
    }
    LatencyBreakdown lat = Stage1Latency(s, m, sol, arrivals, u);
    double deadline = DeadlineFor(s.radio, SelectedFps(s, sol, u));
    if (!(lat.total_s <= deadline * (1.0 + internal::kRelTol))) {
      add("deadline", who, "latency " + std::to_string(lat.total_s) +
                               " s exceeds " + std::to_string(deadline) + " s");
    }
  }
  return r;
}

}  // namespace vrcg
