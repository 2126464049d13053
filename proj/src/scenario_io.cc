#include <array>

#include <json.hpp>

#include "vrcg/scenario.h"

namespace vrcg {
namespace {

using nlohmann::json;

json ToJson(const ResourceVector& r) {
  return {{"gpu", r.gpu}, {"cpu", r.cpu}, {"ram", r.ram}, {"net", r.net}};
}

// Reads optional and required fields while collecting every problem.
class Reader {
 public:
  explicit Reader(std::vector<ConfigIssue>& issues) : issues_(issues) {}

  template <typename T>
  void Opt(const json& obj, const char* key, T& out, const std::string& who) {
    if (!obj.is_object() || !obj.contains(key)) return;
    Read(obj.at(key), key, out, who);
  }

  template <typename T>
  void Req(const json& obj, const char* key, T& out, const std::string& who) {
    if (!obj.is_object() || !obj.contains(key)) {
      issues_.push_back({who, key, std::string("missing ") + key});
      return;
    }
    Read(obj.at(key), key, out, who);
  }

  void Fail(const std::string& who, const std::string& field,
            const std::string& msg) {
    issues_.push_back({who, field, msg});
  }

 private:
  template <typename T>
  void Read(const json& v, const char* key, T& out, const std::string& who) {
    try {
      out = v.get<T>();
    } catch (const json::exception& e) {
      issues_.push_back({who, key, std::string("wrong type: ") + e.what()});
    }
  }

  std::vector<ConfigIssue>& issues_;
};

template <typename E>
E ParseEnum(Reader& rd, const json& obj, const char* key, const std::string& who,
            std::initializer_list<std::pair<const char*, E>> names, E fallback,
            bool required) {
  std::string text;
  if (required) {
    rd.Req(obj, key, text, who);
  } else {
    rd.Opt(obj, key, text, who);
  }
  if (text.empty()) return fallback;
  for (const auto& [name, value] : names) {
    if (text == name) return value;
  }
  rd.Fail(who, key, "unknown value '" + text + "'");
  return fallback;
}

ResourceVector ParseResources(Reader& rd, const json& obj, const char* key,
                              const std::string& who, bool required) {
  ResourceVector r;
  if (!obj.contains(key)) {
    if (required) rd.Fail(who, key, std::string("missing ") + key);
    return r;
  }
  const json& v = obj.at(key);
  rd.Req(v, "gpu", r.gpu, who);
  rd.Req(v, "cpu", r.cpu, who);
  rd.Req(v, "ram", r.ram, who);
  rd.Req(v, "net", r.net, who);
  return r;
}

const json& ArrayOrEmpty(const json& doc, const char* key, Reader& rd) {
  static const json kEmpty = json::array();
  if (!doc.contains(key)) {
    rd.Fail("scenario", key, std::string("missing ") + key);
    return kEmpty;
  }
  if (!doc.at(key).is_array()) {
    rd.Fail("scenario", key, "must be an array");
    return kEmpty;
  }
  return doc.at(key);
}

}  // namespace

std::string ScenarioToJson(const Scenario& s) {
  json doc;
  doc["seed"] = s.seed;
  doc["area_m"] = {s.area_w_m, s.area_h_m};
  const RadioParams& r = s.radio;
  json radio = {
      {"carrier_ghz", r.carrier_ghz},
      {"noise_density_dbm_hz", r.noise_density_dbm_hz},
      {"los_threshold_m", r.los_threshold_m},
      {"speed_of_light_mps", r.speed_of_light_mps},
      {"bits_per_pixel", r.bits_per_pixel},
      {"compression_rate", r.compression_rate},
      {"numerology",
       {{"tti_s", r.numerology.tti_s},
        {"ttis_per_window", r.numerology.ttis_per_window}}},
      {"max_connections", r.max_connections},
      {"epsilon", r.epsilon},
      {"migration_unit_cost", r.migration_unit_cost},
      {"k_paths", r.k_paths},
      {"demand",
       {{"gpu_per_mpixel_per_s", r.demand.gpu_per_mpixel_per_s},
        {"cpu_base", r.demand.cpu_base},
        {"cpu_per_fps", r.demand.cpu_per_fps},
        {"ram_base", r.demand.ram_base},
        {"ram_per_mpixel", r.demand.ram_per_mpixel}}},
  };
  if (r.deadline_s) radio["deadline_s"] = *r.deadline_s;
  doc["radio"] = radio;

  json headsets = json::array();
  for (const Headset& h : s.headsets) {
    json res = json::array();
    for (const Resolution& x : h.resolutions) {
      res.push_back({x.width_px, x.height_px});
    }
    headsets.push_back({{"id", h.id},
                        {"name", h.name},
                        {"resolutions", res},
                        {"frame_rates", h.frame_rates},
                        {"market_share", h.market_share}});
  }
  doc["headsets"] = headsets;

  json games = json::array();
  for (const Game& g : s.games) {
    games.push_back({{"id", g.id},
                     {"name", g.name},
                     {"preference_mode", ToString(g.mode)},
                     {"popularity", g.popularity}});
  }
  doc["games"] = games;

  json users = json::array();
  for (const User& u : s.users) {
    json objects = json::array();
    for (const VirtualObject& o : u.objects) {
      objects.push_back({{"id", o.id},
                         {"pixel_share", o.pixel_share},
                         {"attention", o.attention}});
    }
    users.push_back({{"id", u.id},
                     {"position", {u.x_m, u.y_m}},
                     {"waypoint", {u.waypoint_x_m, u.waypoint_y_m}},
                     {"height_m", u.height_m},
                     {"headset", u.headset},
                     {"game", u.game},
                     {"objects", objects},
                     {"frame_arrival_rate", u.frame_arrival_rate},
                     {"speed_class", ToString(u.speed_class)}});
  }
  doc["users"] = users;

  json bss = json::array();
  for (const BaseStation& b : s.base_stations) {
    bss.push_back({{"id", b.id},
                   {"node", b.node},
                   {"position", {b.x_m, b.y_m}},
                   {"total_prbs", b.total_prbs},
                   {"usable_prbs", b.usable_prbs},
                   {"prb_bandwidth_hz", b.prb_bandwidth_hz},
                   {"tx_power_dbm", b.tx_power_dbm},
                   {"processing_capacity_bps", b.processing_capacity_bps},
                   {"processing_capacity_fps", b.processing_capacity_fps},
                   {"channel_id", b.channel_id},
                   {"coverage_radius_m", b.coverage_radius_m},
                   {"nearest_cn", b.nearest_cn}});
  }
  doc["base_stations"] = bss;

  json cns = json::array();
  for (const ComputeNode& c : s.compute_nodes) {
    cns.push_back({{"id", c.id},
                   {"node", c.node},
                   {"capacity", ToJson(c.capacity)},
                   {"render_speed_pps", c.render_speed_pps},
                   {"fixed_cost", c.fixed_cost},
                   {"unit_costs", ToJson(c.unit_cost)},
                   {"tier", ToString(c.tier)}});
  }
  doc["compute_nodes"] = cns;

  json links = json::array();
  for (const Link& l : s.links) {
    links.push_back({{"id", l.id},
                     {"src", l.src},
                     {"dst", l.dst},
                     {"capacity_bps", l.capacity_bps},
                     {"latency_s", l.latency_s}});
  }
  doc["links"] = links;

  if (!s.prev_placement.empty()) {
    json prev = json::object();
    for (const auto& [u, c] : s.prev_placement) prev[std::to_string(u)] = c;
    doc["prev_placement"] = prev;
  }
  return doc.dump(2) + "\n";
}

Scenario LoadScenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError({{"document", "", std::string("parse error: ") + e.what()}});
  }
  if (!doc.is_object()) {
    throw ConfigError({{"document", "", "top level must be an object"}});
  }
  std::vector<ConfigIssue> issues;
  Reader rd(issues);
  Scenario s;
  rd.Opt(doc, "seed", s.seed, "scenario");
  if (doc.contains("area_m")) {
    std::vector<double> area;
    rd.Opt(doc, "area_m", area, "scenario");
    if (area.size() == 2) {
      s.area_w_m = area[0];
      s.area_h_m = area[1];
    } else {
      rd.Fail("scenario", "area_m", "expected [w, h]");
    }
  }

  if (!doc.contains("radio")) {
    rd.Fail("scenario", "radio", "missing radio");
  } else {
    const json& r = doc.at("radio");
    RadioParams& p = s.radio;
    const std::string who = "radio";
    rd.Opt(r, "carrier_ghz", p.carrier_ghz, who);
    rd.Opt(r, "noise_density_dbm_hz", p.noise_density_dbm_hz, who);
    rd.Opt(r, "los_threshold_m", p.los_threshold_m, who);
    rd.Opt(r, "speed_of_light_mps", p.speed_of_light_mps, who);
    rd.Opt(r, "bits_per_pixel", p.bits_per_pixel, who);
    rd.Opt(r, "compression_rate", p.compression_rate, who);
    if (r.contains("numerology")) {
      rd.Opt(r.at("numerology"), "tti_s", p.numerology.tti_s, who);
      rd.Opt(r.at("numerology"), "ttis_per_window",
             p.numerology.ttis_per_window, who);
    }
    rd.Opt(r, "max_connections", p.max_connections, who);
    if (r.contains("deadline_s") && !r.at("deadline_s").is_null()) {
      double d = 0.0;
      rd.Opt(r, "deadline_s", d, who);
      p.deadline_s = d;
    }
    rd.Opt(r, "epsilon", p.epsilon, who);
    rd.Opt(r, "migration_unit_cost", p.migration_unit_cost, who);
    rd.Opt(r, "k_paths", p.k_paths, who);
    if (r.contains("demand")) {
      const json& d = r.at("demand");
      rd.Opt(d, "gpu_per_mpixel_per_s", p.demand.gpu_per_mpixel_per_s, who);
      rd.Opt(d, "cpu_base", p.demand.cpu_base, who);
      rd.Opt(d, "cpu_per_fps", p.demand.cpu_per_fps, who);
      rd.Opt(d, "ram_base", p.demand.ram_base, who);
      rd.Opt(d, "ram_per_mpixel", p.demand.ram_per_mpixel, who);
    }
  }

  int index = 0;
  for (const json& h : ArrayOrEmpty(doc, "headsets", rd)) {
    Headset x;
    x.id = index++;
    rd.Opt(h, "id", x.id, "headset " + std::to_string(x.id));
    const std::string who = "headset " + std::to_string(x.id);
    rd.Opt(h, "name", x.name, who);
    std::vector<std::array<int, 2>> res;
    rd.Req(h, "resolutions", res, who);
    for (const auto& wh : res) x.resolutions.push_back({wh[0], wh[1]});
    rd.Req(h, "frame_rates", x.frame_rates, who);
    rd.Opt(h, "market_share", x.market_share, who);
    s.headsets.push_back(std::move(x));
  }

  index = 0;
  for (const json& g : ArrayOrEmpty(doc, "games", rd)) {
    Game x;
    x.id = index++;
    rd.Opt(g, "id", x.id, "game " + std::to_string(x.id));
    const std::string who = "game " + std::to_string(x.id);
    rd.Opt(g, "name", x.name, who);
    x.mode = ParseEnum<PreferenceMode>(
        rd, g, "preference_mode", who,
        {{"quality", PreferenceMode::kQuality},
         {"performance", PreferenceMode::kPerformance}},
        PreferenceMode::kQuality, true);
    rd.Opt(g, "popularity", x.popularity, who);
    s.games.push_back(std::move(x));
  }

  index = 0;
  for (const json& u : ArrayOrEmpty(doc, "users", rd)) {
    User x;
    x.id = index++;
    rd.Opt(u, "id", x.id, "user " + std::to_string(x.id));
    const std::string who = "user " + std::to_string(x.id);
    std::array<double, 2> pos{0, 0};
    rd.Req(u, "position", pos, who);
    x.x_m = pos[0];
    x.y_m = pos[1];
    std::array<double, 2> wp = pos;
    rd.Opt(u, "waypoint", wp, who);
    x.waypoint_x_m = wp[0];
    x.waypoint_y_m = wp[1];
    rd.Opt(u, "height_m", x.height_m, who);
    rd.Req(u, "headset", x.headset, who);
    rd.Req(u, "game", x.game, who);
    if (!u.contains("objects") || !u.at("objects").is_array()) {
      rd.Fail(who, "objects", "missing objects");
    } else {
      int oi = 0;
      for (const json& o : u.at("objects")) {
        VirtualObject v;
        v.id = oi++;
        rd.Opt(o, "id", v.id, who);
        rd.Req(o, "pixel_share", v.pixel_share, who);
        rd.Req(o, "attention", v.attention, who);
        x.objects.push_back(v);
      }
    }
    rd.Req(u, "frame_arrival_rate", x.frame_arrival_rate, who);
    x.speed_class = ParseEnum<SpeedClass>(
        rd, u, "speed_class", who,
        {{"stationary", SpeedClass::kStationary},
         {"bus", SpeedClass::kBus},
         {"car", SpeedClass::kCar}},
        SpeedClass::kStationary, false);
    s.users.push_back(std::move(x));
  }

  const json& bs_array = ArrayOrEmpty(doc, "base_stations", rd);
  const int n_bs = static_cast<int>(bs_array.size());
  bool any_nearest_missing = false;
  index = 0;
  for (const json& b : bs_array) {
    BaseStation x;
    x.id = index++;
    rd.Opt(b, "id", x.id, "base_station " + std::to_string(x.id));
    const std::string who = "base_station " + std::to_string(x.id);
    x.node = x.id;
    rd.Opt(b, "node", x.node, who);
    std::array<double, 2> pos{0, 0};
    rd.Req(b, "position", pos, who);
    x.x_m = pos[0];
    x.y_m = pos[1];
    rd.Opt(b, "total_prbs", x.total_prbs, who);
    x.usable_prbs = static_cast<int>(0.3 * x.total_prbs + 1e-9);
    rd.Opt(b, "usable_prbs", x.usable_prbs, who);
    rd.Opt(b, "prb_bandwidth_hz", x.prb_bandwidth_hz, who);
    rd.Opt(b, "tx_power_dbm", x.tx_power_dbm, who);
    rd.Opt(b, "processing_capacity_bps", x.processing_capacity_bps, who);
    rd.Opt(b, "processing_capacity_fps", x.processing_capacity_fps, who);
    x.channel_id = x.id;
    rd.Opt(b, "channel_id", x.channel_id, who);
    rd.Opt(b, "coverage_radius_m", x.coverage_radius_m, who);
    if (b.contains("nearest_cn")) {
      rd.Opt(b, "nearest_cn", x.nearest_cn, who);
    } else {
      any_nearest_missing = true;
    }
    s.base_stations.push_back(x);
  }

  index = 0;
  for (const json& c : ArrayOrEmpty(doc, "compute_nodes", rd)) {
    ComputeNode x;
    x.id = index++;
    rd.Opt(c, "id", x.id, "compute_node " + std::to_string(x.id));
    const std::string who = "compute_node " + std::to_string(x.id);
    x.node = n_bs + x.id;
    rd.Opt(c, "node", x.node, who);
    x.capacity = ParseResources(rd, c, "capacity", who, true);
    rd.Opt(c, "render_speed_pps", x.render_speed_pps, who);
    rd.Opt(c, "fixed_cost", x.fixed_cost, who);
    x.unit_cost = ParseResources(rd, c, "unit_costs", who, false);
    x.tier = ParseEnum<CnTier>(rd, c, "tier", who,
                               {{"edge", CnTier::kEdge},
                                {"regional", CnTier::kRegional},
                                {"cloud", CnTier::kCloud}},
                               CnTier::kEdge, false);
    s.compute_nodes.push_back(x);
  }

  index = 0;
  for (const json& l : ArrayOrEmpty(doc, "links", rd)) {
    Link x;
    x.id = index++;
    rd.Opt(l, "id", x.id, "link " + std::to_string(x.id));
    const std::string who = "link " + std::to_string(x.id);
    rd.Req(l, "src", x.src, who);
    rd.Req(l, "dst", x.dst, who);
    rd.Req(l, "capacity_bps", x.capacity_bps, who);
    rd.Opt(l, "latency_s", x.latency_s, who);
    s.links.push_back(x);
  }

  if (doc.contains("prev_placement") && doc.at("prev_placement").is_object()) {
    for (const auto& [k, v] : doc.at("prev_placement").items()) {
      try {
        s.prev_placement[std::stoi(k)] = v.get<int>();
      } catch (const std::exception&) {
        rd.Fail("prev_placement", k, "expected user id -> compute node id");
      }
    }
  }

  if (!issues.empty()) throw ConfigError(std::move(issues));
  return FinalizeScenario(std::move(s), any_nearest_missing);
}

}  // namespace vrcg
