#include "vrcg/stage3.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

namespace vrcg {
namespace {

constexpr double kRelTol = 1e-9;
constexpr double kTimeTol = 1e-12;

double PixelsAt(const Scenario& s, UserId u, int res) {
  return s.HeadsetOf(s.users[u]).resolutions[res].Pixels();
}

std::vector<std::vector<BsId>> MembersPerBs(const Scenario& s,
                                            const Stage1Solution& sol1) {
  std::vector<std::vector<BsId>> out(s.NumBs());
  for (UserId u = 0; u < s.NumUsers(); ++u) {
    if (!sol1.admitted[u]) continue;
    for (const Leg& l : sol1.legs[u]) out[l.bs].push_back(u);
  }
  return out;
}

Stage3Solution Skeleton(const Scenario& s, const Stage1Solution& sol1,
                        const std::vector<std::vector<int>>& object_res) {
  Stage3Solution out;
  out.ttis = s.radio.numerology.ttis_per_window;
  out.groups.assign(s.NumUsers(), 0);
  for (UserId u = 0; u < s.NumUsers(); ++u) {
    if (!sol1.admitted[u]) continue;
    out.groups[u] = GroupCount(s, sol1, u);
    for (int o = 0; o < static_cast<int>(object_res[u].size()); ++o) {
      out.objects.push_back({u, o, object_res[u][o]});
    }
  }
  return out;
}

// Appends one BS's grants, (tti, user) ordered.
void AppendGrants(BsId b, const std::map<std::pair<int, UserId>, int>& grants,
                  std::vector<Grant>* schedule) {
  for (const auto& [key, n] : grants) {
    if (n > 0) schedule->push_back({b, key.first, key.second, n});
  }
}

// PRB ledger of one BS over the window.
class Spectrum {
 public:
  Spectrum(int ttis, int prbs) : free_(ttis, prbs) {}

  // Nearest TTI to `target` with a free PRB, ties to the earlier one,
  // searching [lo, hi) only. -1 when that range is full.
  int Nearest(int target, int lo, int hi) const {
    for (int d = 0; d < static_cast<int>(free_.size()); ++d) {
      int before = target - d;
      int after = target + d;
      bool any = false;
      if (before >= lo && before < hi) {
        any = true;
        if (free_[before] > 0) return before;
      }
      if (d > 0 && after >= lo && after < hi) {
        any = true;
        if (free_[after] > 0) return after;
      }
      if (!any && (before < lo && after >= hi)) break;
    }
    return -1;
  }

  void Take(int k) { --free_[k]; }
  int ttis() const { return static_cast<int>(free_.size()); }

 private:
  std::vector<int> free_;
};

struct LegSchedule {
  // (tti, prbs), ascending TTI.
  std::vector<std::pair<int, int>> grants;
};

}  // namespace

std::vector<std::vector<int>> Stage3Solution::ResolutionTable(
    const Scenario& s) const {
  std::vector<std::vector<int>> out(s.NumUsers());
  for (UserId u = 0; u < s.NumUsers(); ++u) {
    out[u].assign(s.users[u].objects.size(), -1);
  }
  for (const ObjectChoice& c : objects) {
    if (c.user < 0 || c.user >= s.NumUsers()) continue;
    if (c.object < 0 || c.object >= static_cast<int>(out[c.user].size())) {
      continue;
    }
    out[c.user][c.object] = c.resolution;
  }
  return out;
}

int GroupCount(const Scenario& s, const Stage1Solution& sol1, UserId u) {
  const Numerology& n = s.radio.numerology;
  int frames =
      static_cast<int>(std::floor(SelectedFps(s, sol1, u) * n.WindowSeconds() + 1e-9));
  return std::clamp(frames, 1, n.ttis_per_window);
}

int GroupStart(int group, int n_groups, int ttis) {
  long long num = static_cast<long long>(group) * ttis;
  return static_cast<int>((num + n_groups - 1) / n_groups);
}

int GroupOf(int tti, int n_groups, int ttis) {
  return static_cast<int>(static_cast<long long>(tti) * n_groups / ttis);
}

double QoeStage3(const Scenario& s, const Stage1Solution& sol1,
                 const std::vector<int>& object_res, UserId u) {
  const User& user = s.users[u];
  const Headset& h = s.HeadsetOf(user);
  double fps_ratio = SelectedFps(s, sol1, u) / h.frame_rates.front();
  double min_px = h.resolutions.front().Pixels();
  double q = 0.0;
  for (size_t o = 0; o < user.objects.size(); ++o) {
    q += user.objects[o].attention *
         std::log(h.resolutions[object_res[o]].Pixels() / min_px * fps_ratio);
  }
  return q;
}

double TotalQoeStage3(const Scenario& s, const Stage1Solution& sol1,
                      const Stage3Solution& sol3) {
  std::vector<std::vector<int>> table = sol3.ResolutionTable(s);
  double total = 0.0;
  for (UserId u = 0; u < s.NumUsers(); ++u) {
    if (sol1.admitted[u]) total += QoeStage3(s, sol1, table[u], u);
  }
  return total;
}

double BaselineQoeStage3(const Scenario& s, const Stage1Solution& sol1) {
  std::vector<std::vector<int>> table = InitialObjectResolutions(s, sol1);
  double total = 0.0;
  for (UserId u = 0; u < s.NumUsers(); ++u) {
    if (sol1.admitted[u]) total += QoeStage3(s, sol1, table[u], u);
  }
  return total;
}

double ObjectsLoad(const Scenario& s, const Stage1Solution& sol1,
                   const std::vector<int>& object_res, UserId u) {
  const User& user = s.users[u];
  double fps = SelectedFps(s, sol1, u);
  double load = 0.0;
  for (size_t o = 0; o < user.objects.size(); ++o) {
    load += TrafficLoadPixels(PixelsAt(s, u, object_res[o]), fps,
                              user.objects[o].pixel_share, s.radio);
  }
  return load;
}

double BitsPerPrbTti(const Scenario& s, const RadioMap& m, UserId u, BsId b) {
  return Throughput(1, s.base_stations[b].prb_bandwidth_hz,
                    m.at(u, b).sinr_linear) *
         s.radio.numerology.tti_s;
}

int PrbTarget(const Scenario& s, const RadioMap& m, const Stage1Solution& sol1,
              const std::vector<int>& object_res, UserId u, BsId b) {
  const Leg* leg = sol1.LegAt(u, b);
  if (leg == nullptr) return 0;
  const int n_groups = GroupCount(s, sol1, u);
  double bits = leg->share * ObjectsLoad(s, sol1, object_res, u) *
                s.radio.numerology.WindowSeconds() / n_groups;
  double per = BitsPerPrbTti(s, m, u, b);
  int per_group = static_cast<int>(std::ceil(bits / per * (1.0 - kRelTol)));
  return n_groups * std::max(1, per_group);
}

std::vector<std::vector<int>> InitialObjectResolutions(
    const Scenario& s, const Stage1Solution& sol1) {
  std::vector<std::vector<int>> out(s.NumUsers());
  for (UserId u = 0; u < s.NumUsers(); ++u) {
    if (!sol1.admitted[u]) continue;
    out[u].assign(s.users[u].objects.size(), sol1.resolution[u]);
  }
  return out;
}

std::vector<std::vector<int>> RefineResolutions(const Scenario& s,
                                                const Stage1Solution& sol1) {
  RadioMap m(s);
  std::vector<std::vector<int>> res = InitialObjectResolutions(s, sol1);

  std::vector<UserId> order;
  for (UserId u = 0; u < s.NumUsers(); ++u) {
    if (sol1.admitted[u]) order.push_back(u);
  }
  std::stable_sort(order.begin(), order.end(), [&](UserId a, UserId b) {
    return s.HeadsetOf(s.users[a]).resolutions.back().Pixels() >
           s.HeadsetOf(s.users[b]).resolutions.back().Pixels();
  });

  for (UserId u : order) {
    const User& user = s.users[u];
    const int n_obj = static_cast<int>(user.objects.size());
    const int top = static_cast<int>(s.HeadsetOf(user).resolutions.size()) - 1;
    const double budget = UserLoad(s, sol1, u);
    std::vector<double> tp;
    for (const Leg& l : sol1.legs[u]) {
      tp.push_back(Throughput(l.prbs, s.base_stations[l.bs].prb_bandwidth_hz,
                              m.at(u, l.bs).sinr_linear));
    }
    auto feasible = [&](const std::vector<int>& r) {
      double load = ObjectsLoad(s, sol1, r, u);
      if (load > budget * (1.0 + kRelTol)) return false;
      for (size_t i = 0; i < tp.size(); ++i) {
        if (sol1.legs[u][i].share * load > tp[i] * (1.0 + kRelTol)) return false;
      }
      return true;
    };
    auto gain = [&](int o, int from, int to) {
      return user.objects[o].attention *
             std::log(PixelsAt(s, u, to) / PixelsAt(s, u, from));
    };

    std::vector<int> by_attention(n_obj);
    std::iota(by_attention.begin(), by_attention.end(), 0);
    std::vector<int> by_size = by_attention;
    std::stable_sort(by_attention.begin(), by_attention.end(), [&](int a, int b) {
      return user.objects[a].attention > user.objects[b].attention;
    });
    std::stable_sort(by_size.begin(), by_size.end(), [&](int a, int b) {
      return user.objects[a].pixel_share > user.objects[b].pixel_share;
    });

    std::vector<int>& r = res[u];
    for (int o : by_attention) {
      if (r[o] >= top) continue;
      std::vector<int> up = r;
      ++up[o];
      if (feasible(up)) {
        r = std::move(up);
        continue;
      }
      for (int p : by_size) {
        if (p == o || r[p] == 0) continue;
        if (!(user.objects[o].attention > user.objects[p].attention)) continue;
        std::vector<int> swap = up;
        --swap[p];
        if (gain(o, r[o], r[o] + 1) - gain(p, r[p] - 1, r[p]) <= 0.0) continue;
        if (feasible(swap)) {
          r = std::move(swap);
          break;
        }
      }
    }
  }
  return res;
}

Stage3Solution MtpSched(const Scenario& s, const Stage1Solution& sol1,
                        const std::vector<std::vector<int>>& object_res) {
  RadioMap m(s);
  Stage3Solution out = Skeleton(s, sol1, object_res);
  const int K = out.ttis;
  std::vector<std::vector<BsId>> members = MembersPerBs(s, sol1);

  for (const BaseStation& b : s.base_stations) {
    const std::vector<UserId>& us = members[b.id];
    std::vector<int> target(us.size());
    long long demand = 0;
    for (size_t i = 0; i < us.size(); ++i) {
      target[i] = PrbTarget(s, m, sol1, object_res[us[i]], us[i], b.id);
      demand += target[i];
    }
    long long supply = static_cast<long long>(b.usable_prbs) * K;
    if (demand > supply) {
      throw InfeasibleError("base_station " + std::to_string(b.id),
                            "needs " + std::to_string(demand) +
                                " PRB-TTIs, window holds " +
                                std::to_string(supply));
    }

    Spectrum spectrum(K, b.usable_prbs);
    std::map<std::pair<int, UserId>, int> grants;
    auto place = [&](UserId u, int n_groups, int group) {
      int lo = GroupStart(group, n_groups, K);
      int hi = GroupStart(group + 1, n_groups, K);
      int k = spectrum.Nearest(lo, lo, hi);
      if (k < 0) k = spectrum.Nearest(lo, 0, K);
      spectrum.Take(k);
      ++grants[{k, u}];
    };

    // One PRB per group for every user before any user's second, so group
    // coverage does not depend on the user order.
    for (size_t i = 0; i < us.size(); ++i) {
      UserId u = us[i];
      for (int g = 0; g < out.groups[u]; ++g) place(u, out.groups[u], g);
    }
    for (size_t i = 0; i < us.size(); ++i) {
      UserId u = us[i];
      int n_groups = out.groups[u];
      int per_group = target[i] / n_groups;
      for (int g = 0; g < n_groups; ++g) {
        for (int j = 1; j < per_group; ++j) place(u, n_groups, g);
      }
    }
    AppendGrants(b.id, grants, &out.schedule);
  }
  return out;
}

Stage3Solution Amps(const Scenario& s, const Stage1Solution& sol1) {
  return MtpSched(s, sol1, RefineResolutions(s, sol1));
}

Stage3Solution BaselineRoundRobin(const Scenario& s, const Stage1Solution& sol1) {
  Stage3Solution out = Skeleton(s, sol1, InitialObjectResolutions(s, sol1));
  std::vector<std::vector<BsId>> members = MembersPerBs(s, sol1);
  for (const BaseStation& b : s.base_stations) {
    const std::vector<UserId>& us = members[b.id];
    if (us.empty()) continue;
    std::map<std::pair<int, UserId>, int> grants;
    size_t next = 0;
    for (int k = 0; k < out.ttis; ++k) {
      for (int p = 0; p < b.usable_prbs; ++p) {
        ++grants[{k, us[next]}];
        next = (next + 1) % us.size();
      }
    }
    AppendGrants(b.id, grants, &out.schedule);
  }
  return out;
}

Stage3Solution BaselineProportionalFair(const Scenario& s,
                                        const Stage1Solution& sol1,
                                        int horizon_ttis) {
  RadioMap m(s);
  Stage3Solution out = Skeleton(s, sol1, InitialObjectResolutions(s, sol1));
  std::vector<std::vector<BsId>> members = MembersPerBs(s, sol1);
  const double beta = 1.0 / std::max(1, horizon_ttis);
  for (const BaseStation& b : s.base_stations) {
    const std::vector<UserId>& us = members[b.id];
    if (us.empty()) continue;
    std::vector<double> rate(us.size());
    for (size_t i = 0; i < us.size(); ++i) rate[i] = BitsPerPrbTti(s, m, us[i], b.id);
    std::vector<double> avg = rate;
    std::map<std::pair<int, UserId>, int> grants;
    for (int k = 0; k < out.ttis; ++k) {
      std::vector<double> served(us.size(), 0.0);
      for (int p = 0; p < b.usable_prbs; ++p) {
        size_t best = 0;
        double best_metric = -1.0;
        for (size_t i = 0; i < us.size(); ++i) {
          // Grants earlier in this TTI count toward the running average.
          double metric = rate[i] / (avg[i] + beta * served[i]);
          if (metric > best_metric) {
            best_metric = metric;
            best = i;
          }
        }
        served[best] += rate[best];
        ++grants[{k, us[best]}];
      }
      for (size_t i = 0; i < us.size(); ++i) {
        avg[i] = (1.0 - beta) * avg[i] + beta * served[i];
      }
    }
    AppendGrants(b.id, grants, &out.schedule);
  }
  return out;
}

MtpReport MtpLatency(const Scenario& s, const Stage1Solution& sol1,
                     const Stage3Solution& sol3, const Stage2Solution* sol2) {
  RadioMap m(s);
  const double tti = s.radio.numerology.tti_s;
  const double window = tti * sol3.ttis;
  std::vector<std::vector<int>> table = sol3.ResolutionTable(s);

  std::map<std::pair<UserId, BsId>, LegSchedule> legs;
  for (const Grant& g : sol3.schedule) {
    legs[{g.user, g.bs}].grants.push_back({g.tti, g.prbs});
  }

  MtpReport rep;
  rep.per_user_s.assign(s.NumUsers(), 0.0);
  rep.samples_s.assign(s.NumUsers(), {});
  int counted = 0;
  double sum = 0.0;
  for (UserId u = 0; u < s.NumUsers(); ++u) {
    if (!sol1.admitted[u]) continue;
    const double fps = SelectedFps(s, sol1, u);
    const double pixels = SelectedResolution(s, sol1, u).Pixels();
    const int frames = std::max(1, sol3.groups.empty() ? GroupCount(s, sol1, u)
                                                       : sol3.groups[u]);
    const double objects = ObjectsLoad(s, sol1, table[u], u);

    double routing = 0.0;
    CnId host = -1;
    if (sol2 != nullptr && sol2->placement[u] >= 0) {
      host = sol2->placement[u];
      for (const PathFlow& f : sol2->flows[u]) {
        routing = std::max(routing, s.paths[f.path].latency_s);
      }
    } else {
      routing = NearestCnRouting(s, sol1.ServingBs(u));
    }

    std::vector<double> done(frames, 0.0);
    for (const Leg& leg : sol1.legs[u]) {
      CnId c = host >= 0 ? host : s.base_stations[leg.bs].nearest_cn;
      LegInput in;
      in.bs = leg.bs;
      in.prbs = leg.prbs;
      in.share = leg.share;
      in.render_speed_pps = s.compute_nodes[c].render_speed_pps;
      LegLatency lat = ComputeLegLatency(s, m.at(u, leg.bs), pixels, fps, in);
      const double fixed =
          routing + lat.render_s + lat.propagation_s + lat.processing_s;

      const double frame_bits = leg.share * objects / fps;
      const double per_prb = BitsPerPrbTti(s, m, u, leg.bs);
      std::vector<double> finish(frames, window);
      int i = 0;
      double left = frame_bits;
      auto it = legs.find({u, leg.bs});
      if (it != legs.end()) {
        for (const auto& [k, n] : it->second.grants) {
          double start = k * tti;
          double cap = n * per_prb;
          while (i < frames && cap > 0.0 && i / fps <= start + kTimeTol) {
            double take = std::min(cap, left);
            cap -= take;
            left -= take;
            if (left <= frame_bits * kRelTol) {
              finish[i] = start + tti;
              ++i;
              left = frame_bits;
            }
          }
          if (i >= frames) break;
        }
      }
      for (int f = 0; f < frames; ++f) {
        if (f >= i) ++rep.undelivered;
        done[f] = std::max(done[f], finish[f] - f / fps + fixed);
      }
    }
    rep.samples_s[u] = done;
    double mean = 0.0;
    for (double d : done) mean += d;
    mean /= frames;
    rep.per_user_s[u] = mean;
    sum += mean;
    ++counted;
  }
  rep.average_s = counted > 0 ? sum / counted : 0.0;
  return rep;
}

double PrbUsageFraction(const Scenario& s, const Stage3Solution& sol3) {
  double used = 0.0;
  double total = 0.0;
  for (const Grant& g : sol3.schedule) used += g.prbs;
  for (const BaseStation& b : s.base_stations) {
    total += static_cast<double>(b.usable_prbs) * sol3.ttis;
  }
  return total > 0.0 ? used / total : 0.0;
}

ViolationReport VerifyStage3(const Stage3Solution& sol, const Scenario& s,
                             const Stage1Solution& sol1,
                             const Stage3VerifyOptions& opts) {
  ViolationReport r;
  auto add = [&](std::string c, std::string e, std::string d) {
    r.push_back({std::move(c), std::move(e), std::move(d)});
  };
  const int n = s.NumUsers();
  if (sol.ttis <= 0 || static_cast<int>(sol.groups.size()) != n) {
    add("shape", "solution", "window or group table does not match the scenario");
    return r;
  }
  RadioMap m(s);

  // Exactly one resolution per (user, object).
  std::vector<std::vector<int>> count(n);
  for (UserId u = 0; u < n; ++u) count[u].assign(s.users[u].objects.size(), 0);
  std::vector<std::vector<int>> table(n);
  for (UserId u = 0; u < n; ++u) table[u].assign(s.users[u].objects.size(), 0);
  for (const ObjectChoice& c : sol.objects) {
    std::string who = "user " + std::to_string(c.user) + " object " +
                      std::to_string(c.object);
    if (c.user < 0 || c.user >= n || c.object < 0 ||
        c.object >= static_cast<int>(count[c.user].size())) {
      add("object_resolution", who, "unknown object");
      continue;
    }
    if (!sol1.admitted[c.user]) {
      add("object_resolution", who, "resolution for an unadmitted user");
      continue;
    }
    int menu = static_cast<int>(s.HeadsetOf(s.users[c.user]).resolutions.size());
    if (c.resolution < 0 || c.resolution >= menu) {
      add("object_resolution", who, "resolution index out of range");
      continue;
    }
    ++count[c.user][c.object];
    table[c.user][c.object] = c.resolution;
  }
  std::vector<bool> objects_ok(n, true);
  for (UserId u = 0; u < n; ++u) {
    if (!sol1.admitted[u]) continue;
    for (size_t o = 0; o < count[u].size(); ++o) {
      if (count[u][o] != 1) {
        add("object_resolution",
            "user " + std::to_string(u) + " object " + std::to_string(o),
            std::to_string(count[u][o]) + " resolutions selected");
        objects_ok[u] = false;
      }
    }
  }

  // Grants: valid indices, serving BS only, per-TTI capacity.
  std::map<std::pair<BsId, int>, int> per_tti;
  std::map<std::pair<UserId, BsId>, std::vector<std::pair<int, int>>> legs;
  for (const Grant& g : sol.schedule) {
    std::string where = "bs " + std::to_string(g.bs) + " tti " + std::to_string(g.tti);
    if (g.bs < 0 || g.bs >= s.NumBs() || g.tti < 0 || g.tti >= sol.ttis ||
        g.user < 0 || g.user >= n) {
      add("schedule", where, "grant outside the scenario or window");
      continue;
    }
    if (g.prbs <= 0) {
      add("transmission_mapping", where + " user " + std::to_string(g.user),
          "grant without PRBs");
      continue;
    }
    if (!sol1.admitted[g.user] || sol1.LegAt(g.user, g.bs) == nullptr) {
      add("transmission_mapping", where + " user " + std::to_string(g.user),
          "PRBs from a BS that does not serve the user");
      continue;
    }
    per_tti[{g.bs, g.tti}] += g.prbs;
    legs[{g.user, g.bs}].push_back({g.tti, g.prbs});
  }
  for (const auto& [key, used] : per_tti) {
    if (used > s.base_stations[key.first].usable_prbs) {
      add("tti_capacity",
          "bs " + std::to_string(key.first) + " tti " + std::to_string(key.second),
          std::to_string(used) + " PRBs over " +
              std::to_string(s.base_stations[key.first].usable_prbs));
    }
  }

  const double window_s = s.radio.numerology.tti_s * sol.ttis;
  for (UserId u = 0; u < n; ++u) {
    if (!sol1.admitted[u] || !objects_ok[u]) continue;
    std::string who = "user " + std::to_string(u);
    double objects = ObjectsLoad(s, sol1, table[u], u);
    double load = UserLoad(s, sol1, u);
    if (objects > load * (1.0 + kRelTol)) {
      add("objects_load", who, "Objects(u) " + std::to_string(objects) +
                                   " exceeds Load(u) " + std::to_string(load));
    }
    int n_groups = sol.groups[u];
    if (n_groups != GroupCount(s, sol1, u)) {
      add("tti_groups", who, "group count differs from the frame rate");
      n_groups = GroupCount(s, sol1, u);
    }
    double served_bits = 0.0;
    for (const Leg& leg : sol1.legs[u]) {
      std::string where = who + " bs " + std::to_string(leg.bs);
      auto it = legs.find({u, leg.bs});
      int total = 0;
      std::vector<bool> covered(n_groups, false);
      if (it != legs.end()) {
        for (const auto& [k, p] : it->second) {
          total += p;
          covered[GroupOf(k, n_groups, sol.ttis)] = true;
        }
      }
      served_bits += total * BitsPerPrbTti(s, m, u, leg.bs);
      if (total == 0) {
        add("starvation", where, "no TTI carries data");
        continue;
      }
      if (!opts.check_targets) continue;
      int target = PrbTarget(s, m, sol1, table[u], u, leg.bs);
      if (total != target) {
        add("prb_total", where, std::to_string(total) + " PRB-TTIs, target " +
                                    std::to_string(target));
      }
      for (int g = 0; g < n_groups; ++g) {
        if (!covered[g]) {
          add("tti_groups", where, "TTI group " + std::to_string(g) + " empty");
          break;
        }
      }
    }
    if (opts.check_targets &&
        served_bits < objects * window_s * (1.0 - kRelTol)) {
      add("throughput", who, "scheduled bits below Objects(u) over the window");
    }
  }
  return r;
}

}  // namespace vrcg
