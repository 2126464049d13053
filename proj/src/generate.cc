#include <algorithm>
#include <cmath>

#include "vrcg/rng.h"
#include "vrcg/scenario.h"

namespace vrcg {
namespace {

struct TierSpec {
  ResourceVector capacity;
  double render_speed_pps;
  double fixed_cost;
  ResourceVector unit_cost;
};

TierSpec SpecFor(CnTier tier) {
  switch (tier) {
    case CnTier::kEdge:
      return {{8000, 600, 400, 20e9}, 4e11, 100.0, {0.05, 0.5, 0.2, 1e-8}};
    case CnTier::kRegional:
      return {{12000, 1600, 1600, 40e9}, 6e11, 60.0, {0.03, 0.3, 0.12, 6e-9}};
    case CnTier::kCloud:
      return {{60000, 8000, 8000, 100e9}, 8e11, 40.0, {0.02, 0.2, 0.08, 4e-9}};
  }
  return {};
}

void AddDuplex(std::vector<Link>& links, NodeId a, NodeId b, double cap_bps,
               double latency_s) {
  links.push_back({static_cast<LinkId>(links.size()), a, b, cap_bps, latency_s});
  links.push_back({static_cast<LinkId>(links.size()), b, a, cap_bps, latency_s});
}

}  // namespace

Scenario GenerateSynthetic(std::uint64_t seed, int n_users, int n_bs,
                           int n_cns, double area_w_m, double area_h_m,
                           const GenerationOverrides& ov) {
  std::vector<ConfigIssue> issues;
  if (n_users < 1) issues.push_back({"generate", "users", "must be >= 1"});
  if (n_bs < 1) issues.push_back({"generate", "bs", "must be >= 1"});
  if (n_cns < 1) issues.push_back({"generate", "cns", "must be >= 1"});
  if (!(area_w_m > 0 && area_h_m > 0)) {
    issues.push_back({"generate", "area_m", "area must be positive"});
  }
  const double radius = ov.coverage_radius_m.value_or(400.0);
  if (!(radius > 0)) {
    issues.push_back({"generate", "coverage_radius_m", "must be > 0"});
  } else if (area_w_m > 0 && area_h_m > 0 &&
             (area_w_m < radius || area_h_m < radius)) {
    issues.push_back({"generate", "area_m",
                      "area too small for the requested coverage radius"});
  }
  if (ov.headset &&
      (*ov.headset < 0 ||
       *ov.headset >= static_cast<int>(BuiltinHeadsets().size()))) {
    issues.push_back({"generate", "headset", "unknown catalog headset"});
  }
  if (!issues.empty()) throw ConfigError(std::move(issues));

  Scenario s;
  s.seed = seed;
  s.area_w_m = area_w_m;
  s.area_h_m = area_h_m;
  if (ov.compression_rate) s.radio.compression_rate = *ov.compression_rate;
  if (ov.k_paths) s.radio.k_paths = *ov.k_paths;
  if (ov.max_connections) s.radio.max_connections = *ov.max_connections;
  if (ov.ttis_per_window) s.radio.numerology.ttis_per_window = *ov.ttis_per_window;

  s.headsets = BuiltinHeadsets();
  for (Headset& h : s.headsets) {
    if (ov.max_resolutions_per_headset &&
        static_cast<int>(h.resolutions.size()) > *ov.max_resolutions_per_headset) {
      h.resolutions.resize(std::max(1, *ov.max_resolutions_per_headset));
    }
    if (ov.max_frame_rates_per_headset &&
        static_cast<int>(h.frame_rates.size()) > *ov.max_frame_rates_per_headset) {
      h.frame_rates.resize(std::max(1, *ov.max_frame_rates_per_headset));
    }
  }
  s.games = BuiltinGames();

  // Base stations at grid cell centres.
  const int cols = static_cast<int>(
      std::ceil(std::sqrt(static_cast<double>(n_bs) * area_w_m / area_h_m)));
  const int rows = (n_bs + cols - 1) / cols;
  const double cell_w = area_w_m / cols;
  const double cell_h = area_h_m / rows;
  const int total_prbs = ov.total_prbs.value_or(56);
  const int usable = std::max(
      1, static_cast<int>(std::floor(ov.usable_prb_fraction.value_or(0.30) *
                                     total_prbs + 1e-9)));
  for (int b = 0; b < n_bs; ++b) {
    BaseStation bs;
    bs.id = b;
    bs.node = b;
    bs.x_m = (b % cols + 0.5) * cell_w;
    bs.y_m = (b / cols + 0.5) * cell_h;
    bs.total_prbs = total_prbs;
    bs.usable_prbs = std::min(usable, total_prbs);
    bs.tx_power_dbm = ov.tx_power_dbm.value_or(23.0);
    bs.channel_id = b;
    bs.coverage_radius_m = radius;
    s.base_stations.push_back(bs);
  }

  // Compute nodes: one edge per BS first, then regionals, the last is cloud.
  const int n_edge = std::min(n_cns, n_bs);
  const int n_extra = n_cns - n_edge;
  const double cn_scale = ov.cn_capacity_scale.value_or(1.0);
  for (int c = 0; c < n_cns; ++c) {
    CnTier tier = c < n_edge                ? CnTier::kEdge
                  : c == n_cns - 1          ? CnTier::kCloud
                                            : CnTier::kRegional;
    TierSpec spec = SpecFor(tier);
    ComputeNode cn;
    cn.id = c;
    cn.node = n_bs + c;
    cn.tier = tier;
    cn.capacity = {spec.capacity.gpu * cn_scale, spec.capacity.cpu * cn_scale,
                   spec.capacity.ram * cn_scale, spec.capacity.net * cn_scale};
    cn.render_speed_pps = spec.render_speed_pps;
    cn.fixed_cost = spec.fixed_cost;
    cn.unit_cost = spec.unit_cost;
    s.compute_nodes.push_back(cn);
  }

  const double lscale = ov.link_capacity_scale.value_or(1.0);
  auto edge_node = [&](int i) { return n_bs + i; };
  for (int b = 0; b < n_bs; ++b) {
    int e = b % n_edge;
    AddDuplex(s.links, edge_node(e), b, 10e9 * lscale, 0.05e-3);
    s.base_stations[b].nearest_cn = e;
  }
  if (n_edge == 2) {
    AddDuplex(s.links, edge_node(0), edge_node(1), 1e9 * lscale, 0.25e-3);
  } else if (n_edge >= 3) {
    for (int i = 0; i < n_edge; ++i) {
      AddDuplex(s.links, edge_node(i), edge_node((i + 1) % n_edge),
                1e9 * lscale, 0.25e-3);
    }
  }
  const int n_regional = std::max(0, n_extra - 1);
  std::vector<NodeId> attach_cloud;
  for (int r = 0; r < n_regional; ++r) {
    NodeId node = n_bs + n_edge + r;
    int a = (r * n_edge) / n_regional;
    int b = (a + n_edge / 2) % n_edge;
    AddDuplex(s.links, edge_node(a), node, 1e9 * lscale, 0.5e-3);
    if (b != a) AddDuplex(s.links, edge_node(b), node, 1e9 * lscale, 0.5e-3);
    attach_cloud.push_back(node);
  }
  if (n_extra >= 1) {
    NodeId cloud = n_bs + n_cns - 1;
    if (attach_cloud.empty()) {
      attach_cloud.push_back(edge_node(0));
      if (n_edge > 1) attach_cloud.push_back(edge_node(n_edge / 2));
    }
    for (NodeId n : attach_cloud) {
      AddDuplex(s.links, n, cloud, 2e9 * lscale, 1.5e-3);
    }
  }

  Rng rng(seed);
  std::vector<double> headset_w, game_w;
  for (const Headset& h : s.headsets) headset_w.push_back(h.market_share);
  for (const Game& g : s.games) game_w.push_back(g.popularity);
  const int n_objects = std::max(1, ov.objects_per_user.value_or(5));
  for (int i = 0; i < n_users; ++i) {
    User u;
    u.id = i;
    for (;;) {
      u.x_m = rng.Uniform(0.0, area_w_m);
      u.y_m = rng.Uniform(0.0, area_h_m);
      bool covered = false;
      for (const BaseStation& b : s.base_stations) {
        covered = covered || Covers(b, u.x_m, u.y_m);
      }
      if (covered) break;
    }
    u.waypoint_x_m = u.x_m;
    u.waypoint_y_m = u.y_m;
    u.headset = rng.Weighted(headset_w);
    if (ov.headset) u.headset = *ov.headset;
    u.game = rng.Weighted(game_w);
    std::vector<double> share = rng.Dirichlet(n_objects);
    std::vector<double> attention = rng.Dirichlet(n_objects);
    for (int o = 0; o < n_objects; ++o) {
      u.objects.push_back({o, share[o], attention[o]});
    }
    u.frame_arrival_rate = s.headsets[u.headset].frame_rates.back();
    u.speed_class = static_cast<SpeedClass>(rng.Weighted({0.4, 0.3, 0.3}));
    s.users.push_back(std::move(u));
  }
  return FinalizeScenario(std::move(s));
}

}  // namespace vrcg
