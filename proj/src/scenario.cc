#include "vrcg/scenario.h"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>
#include <tuple>

namespace vrcg {
namespace {

constexpr double kShareTolerance = 1e-9;
// Guards best-first path expansion on dense configs.
constexpr int kMaxPathExpansions = 2000000;

std::string Name(const char* kind, int id) {
  return std::string(kind) + " " + std::to_string(id);
}

std::string JoinIssues(const std::vector<ConfigIssue>& issues) {
  std::ostringstream os;
  os << "invalid scenario:";
  for (const ConfigIssue& i : issues) {
    os << "\n  " << i.entity << " [" << i.field << "]: " << i.message;
  }
  return os.str();
}

}  // namespace

ConfigError::ConfigError(std::vector<ConfigIssue> issues)
    : std::runtime_error(JoinIssues(issues)), issues_(std::move(issues)) {}

double Distance(const User& u, const BaseStation& b) {
  return std::hypot(u.x_m - b.x_m, u.y_m - b.y_m);
}

bool Covers(const BaseStation& b, double x_m, double y_m) {
  return std::hypot(x_m - b.x_m, y_m - b.y_m) <= b.coverage_radius_m;
}

std::vector<Path> EnumeratePaths(const std::vector<Link>& links, NodeId from,
                                 NodeId to, int k) {
  std::vector<Path> out;
  if (k < 1) return out;
  NodeId max_node = std::max(from, to);
  for (const Link& l : links) max_node = std::max({max_node, l.src, l.dst});
  std::vector<std::vector<LinkId>> adj(max_node + 1);
  for (size_t i = 0; i < links.size(); ++i) adj[links[i].src].push_back(i);

  struct Partial {
    double latency;
    std::vector<NodeId> nodes;
    std::vector<LinkId> links;
  };
  // Extending a partial path never lowers its key, so complete paths pop in
  // ascending (latency, node sequence) order.
  auto worse = [](const Partial& a, const Partial& b) {
    return std::tie(a.latency, a.nodes) > std::tie(b.latency, b.nodes);
  };
  std::priority_queue<Partial, std::vector<Partial>, decltype(worse)> open(
      worse);
  open.push({0.0, {from}, {}});
  int expansions = 0;
  while (!open.empty() && static_cast<int>(out.size()) < k &&
         expansions < kMaxPathExpansions) {
    Partial p = open.top();
    open.pop();
    ++expansions;
    NodeId tail = p.nodes.back();
    if (tail == to) {
      if (p.links.empty()) continue;
      Path path;
      path.links = p.links;
      path.nodes = p.nodes;
      // Summed in link order so the stored value is reproducible.
      path.latency_s = 0.0;
      for (LinkId id : p.links) path.latency_s += links[id].latency_s;
      out.push_back(std::move(path));
      continue;
    }
    for (LinkId id : adj[tail]) {
      NodeId next = links[id].dst;
      if (std::find(p.nodes.begin(), p.nodes.end(), next) != p.nodes.end()) {
        continue;
      }
      Partial q = p;
      q.latency += links[id].latency_s;
      q.nodes.push_back(next);
      q.links.push_back(id);
      open.push(std::move(q));
    }
  }
  return out;
}

std::vector<ConfigIssue> ValidateScenario(const Scenario& s) {
  std::vector<ConfigIssue> issues;
  auto add = [&](std::string entity, std::string field, std::string msg) {
    issues.push_back({std::move(entity), std::move(field), std::move(msg)});
  };
  const RadioParams& r = s.radio;
  if (!(r.epsilon >= 0.0 && r.epsilon < 1.0)) {
    add("radio", "epsilon", "epsilon out of range");
  }
  if (r.max_connections < 1) add("radio", "max_connections", "must be >= 1");
  if (!(r.numerology.tti_s > 0.0)) add("radio", "tti_s", "must be > 0");
  if (r.numerology.ttis_per_window < 1) {
    add("radio", "ttis_per_window", "must be >= 1");
  }
  if (!(r.compression_rate > 0.0 && r.compression_rate <= 1.0)) {
    add("radio", "compression_rate", "must be in (0, 1]");
  }
  if (!(r.carrier_ghz > 0.0)) add("radio", "carrier_ghz", "must be > 0");
  if (!(r.speed_of_light_mps > 0.0)) {
    add("radio", "speed_of_light_mps", "must be > 0");
  }
  if (!(r.bits_per_pixel > 0.0)) add("radio", "bits_per_pixel", "must be > 0");
  if (r.k_paths < 1) add("radio", "k_paths", "must be >= 1");
  if (r.deadline_s && !(*r.deadline_s > 0.0)) {
    add("radio", "deadline_s", "must be > 0");
  }
  if (r.migration_unit_cost < 0.0) {
    add("radio", "migration_unit_cost", "must be >= 0");
  }
  if (!(s.area_w_m > 0.0 && s.area_h_m > 0.0)) {
    add("scenario", "area_m", "area must be positive");
  }

  for (size_t i = 0; i < s.headsets.size(); ++i) {
    const Headset& h = s.headsets[i];
    std::string e = Name("headset", h.id);
    if (h.id != static_cast<int>(i)) add(e, "id", "ids must be 0..n-1");
    if (h.resolutions.empty()) add(e, "resolutions", "missing resolutions");
    for (size_t j = 0; j < h.resolutions.size(); ++j) {
      if (h.resolutions[j].width_px <= 0 || h.resolutions[j].height_px <= 0) {
        add(e, "resolutions", "dimensions must be positive");
      }
      if (j > 0 && !(h.resolutions[j].Pixels() > h.resolutions[j - 1].Pixels())) {
        add(e, "resolutions", "not strictly increasing by pixel count");
      }
    }
    if (h.frame_rates.empty()) add(e, "frame_rates", "missing frame_rates");
    for (size_t j = 0; j < h.frame_rates.size(); ++j) {
      if (!(h.frame_rates[j] >= 1.0)) add(e, "frame_rates", "must be >= 1 Hz");
      if (j > 0 && !(h.frame_rates[j] > h.frame_rates[j - 1])) {
        add(e, "frame_rates", "not strictly increasing");
      }
    }
    if (h.market_share < 0.0) add(e, "market_share", "must be >= 0");
  }
  for (size_t i = 0; i < s.games.size(); ++i) {
    if (s.games[i].id != static_cast<int>(i)) {
      add(Name("game", s.games[i].id), "id", "ids must be 0..n-1");
    }
  }

  for (size_t i = 0; i < s.base_stations.size(); ++i) {
    const BaseStation& b = s.base_stations[i];
    std::string e = Name("base_station", b.id);
    if (b.id != static_cast<int>(i)) add(e, "id", "ids must be 0..n-1");
    if (!(b.usable_prbs > 0 && b.usable_prbs <= b.total_prbs)) {
      add(e, "usable_prbs", "need 0 < usable_prbs <= total_prbs");
    }
    if (!(b.prb_bandwidth_hz > 0.0)) add(e, "prb_bandwidth_hz", "must be > 0");
    if (!(b.processing_capacity_bps > 0.0)) {
      add(e, "processing_capacity_bps", "must be > 0");
    }
    if (!(b.processing_capacity_fps > 0.0)) {
      add(e, "processing_capacity_fps", "must be > 0");
    }
    if (!(b.coverage_radius_m > 0.0)) {
      add(e, "coverage_radius_m", "must be > 0");
    }
    if (b.nearest_cn < 0 || b.nearest_cn >= s.NumCns()) {
      add(e, "nearest_cn", "unknown compute node");
    }
  }

  for (size_t i = 0; i < s.compute_nodes.size(); ++i) {
    const ComputeNode& c = s.compute_nodes[i];
    std::string e = Name("compute_node", c.id);
    if (c.id != static_cast<int>(i)) add(e, "id", "ids must be 0..n-1");
    const ResourceVector& cap = c.capacity;
    if (!(cap.gpu > 0 && cap.cpu > 0 && cap.ram > 0 && cap.net > 0)) {
      add(e, "capacity", "all capacities must be > 0");
    }
    if (!(c.render_speed_pps > 0.0)) add(e, "render_speed_pps", "must be > 0");
    const ResourceVector& uc = c.unit_cost;
    if (c.fixed_cost < 0 || uc.gpu < 0 || uc.cpu < 0 || uc.ram < 0 ||
        uc.net < 0) {
      add(e, "costs", "costs must be >= 0");
    }
  }

  // Node ids must be unique across base stations and compute nodes.
  std::map<NodeId, std::string> owners;
  auto claim = [&](NodeId n, const std::string& who) {
    if (n < 0) {
      add(who, "node", "node id must be >= 0");
      return;
    }
    auto [it, fresh] = owners.emplace(n, who);
    if (!fresh) add(who, "node", "node id already used by " + it->second);
  };
  for (const BaseStation& b : s.base_stations) {
    claim(b.node, Name("base_station", b.id));
  }
  for (const ComputeNode& c : s.compute_nodes) {
    claim(c.node, Name("compute_node", c.id));
  }

  for (size_t i = 0; i < s.links.size(); ++i) {
    const Link& l = s.links[i];
    std::string e = Name("link", l.id);
    if (l.id != static_cast<int>(i)) add(e, "id", "ids must be 0..n-1");
    if (!(l.capacity_bps > 0.0)) add(e, "capacity_bps", "must be > 0");
    if (!(l.latency_s >= 0.0)) add(e, "latency_s", "must be >= 0");
    if (l.src < 0 || l.dst < 0) add(e, "src/dst", "node ids must be >= 0");
    if (l.src == l.dst) add(e, "src/dst", "self loop");
  }

  for (size_t i = 0; i < s.users.size(); ++i) {
    const User& u = s.users[i];
    std::string e = Name("user", u.id);
    if (u.id != static_cast<int>(i)) add(e, "id", "ids must be 0..n-1");
    if (u.x_m < 0 || u.x_m > s.area_w_m || u.y_m < 0 || u.y_m > s.area_h_m) {
      add(e, "position", "outside scenario area");
    }
    if (!(u.height_m > 0.0)) add(e, "height_m", "must be > 0");
    if (u.headset < 0 || u.headset >= static_cast<int>(s.headsets.size())) {
      add(e, "headset", "unknown headset");
    }
    if (u.game < 0 || u.game >= static_cast<int>(s.games.size())) {
      add(e, "game", "unknown game");
    }
    if (u.frame_arrival_rate < 0.0) {
      add(e, "frame_arrival_rate", "must be >= 0");
    }
    if (u.objects.empty()) {
      add(e, "objects", "at least one object required");
    } else {
      double share = 0.0, attention = 0.0;
      for (const VirtualObject& o : u.objects) {
        if (o.pixel_share < 0 || o.pixel_share > 1) {
          add(e, "objects", "pixel_share outside [0,1]");
        }
        if (o.attention < 0 || o.attention > 1) {
          add(e, "objects", "attention outside [0,1]");
        }
        share += o.pixel_share;
        attention += o.attention;
      }
      if (std::abs(share - 1.0) > kShareTolerance) {
        add(e, "objects", "pixel shares must sum to 1");
      }
      if (std::abs(attention - 1.0) > kShareTolerance) {
        add(e, "objects", "attention must sum to 1");
      }
    }
    bool covered = false;
    for (const BaseStation& b : s.base_stations) {
      covered = covered || Covers(b, u.x_m, u.y_m);
    }
    if (!covered) add(e, "position", "not covered by any base station");
  }
  for (const auto& [uid, cid] : s.prev_placement) {
    if (uid < 0 || uid >= s.NumUsers() || cid < 0 || cid >= s.NumCns()) {
      add("prev_placement", std::to_string(uid), "unknown user or node");
    }
  }
  return issues;
}

Scenario FinalizeScenario(Scenario s, bool assign_nearest_cn) {
  if (assign_nearest_cn) {
    for (BaseStation& b : s.base_stations) {
      // Lowest routing latency wins, then lowest id.
      double best = INFINITY;
      for (const ComputeNode& c : s.compute_nodes) {
        std::vector<Path> p = EnumeratePaths(s.links, c.node, b.node, 1);
        double lat = p.empty() ? INFINITY : p[0].latency_s;
        if (c.node == b.node) lat = 0.0;
        if (lat < best) {
          best = lat;
          b.nearest_cn = c.id;
        }
      }
    }
  }
  std::vector<ConfigIssue> issues = ValidateScenario(s);
  if (!issues.empty()) throw ConfigError(std::move(issues));

  s.paths.clear();
  s.paths_by_bs_cn.assign(s.base_stations.size() * s.compute_nodes.size(), {});
  for (const BaseStation& b : s.base_stations) {
    for (const ComputeNode& c : s.compute_nodes) {
      std::vector<Path> found =
          EnumeratePaths(s.links, c.node, b.node, s.radio.k_paths);
      for (Path& p : found) {
        p.id = static_cast<PathId>(s.paths.size());
        p.bs = b.id;
        p.cn = c.id;
        s.paths_by_bs_cn[b.id * s.compute_nodes.size() + c.id].push_back(p.id);
        s.paths.push_back(std::move(p));
      }
    }
  }

  // Undirected hop distance between compute nodes over the transport graph.
  NodeId max_node = 0;
  for (const BaseStation& b : s.base_stations) max_node = std::max(max_node, b.node);
  for (const ComputeNode& c : s.compute_nodes) max_node = std::max(max_node, c.node);
  for (const Link& l : s.links) max_node = std::max({max_node, l.src, l.dst});
  std::vector<std::vector<NodeId>> adj(max_node + 1);
  for (const Link& l : s.links) {
    adj[l.src].push_back(l.dst);
    adj[l.dst].push_back(l.src);
  }
  const int n_cn = s.NumCns();
  s.cn_hops.assign(n_cn, std::vector<int>(n_cn, -1));
  for (int a = 0; a < n_cn; ++a) {
    std::vector<int> dist(max_node + 1, -1);
    std::queue<NodeId> q;
    dist[s.compute_nodes[a].node] = 0;
    q.push(s.compute_nodes[a].node);
    while (!q.empty()) {
      NodeId n = q.front();
      q.pop();
      for (NodeId m : adj[n]) {
        if (dist[m] < 0) {
          dist[m] = dist[n] + 1;
          q.push(m);
        }
      }
    }
    for (int c = 0; c < n_cn; ++c) s.cn_hops[a][c] = dist[s.compute_nodes[c].node];
  }
  return s;
}

double SpeedOf(SpeedClass c) {
  switch (c) {
    case SpeedClass::kStationary:
      return 0.0;
    case SpeedClass::kBus:
      return 8.0;
    case SpeedClass::kCar:
      return 14.0;
  }
  return 0.0;
}

const char* ToString(PreferenceMode m) {
  return m == PreferenceMode::kQuality ? "quality" : "performance";
}

const char* ToString(CnTier t) {
  switch (t) {
    case CnTier::kEdge:
      return "edge";
    case CnTier::kRegional:
      return "regional";
    case CnTier::kCloud:
      return "cloud";
  }
  return "edge";
}

const char* ToString(SpeedClass c) {
  switch (c) {
    case SpeedClass::kStationary:
      return "stationary";
    case SpeedClass::kBus:
      return "bus";
    case SpeedClass::kCar:
      return "car";
  }
  return "stationary";
}

}  // namespace vrcg
