#ifndef VRCG_SCENARIO_H_
#define VRCG_SCENARIO_H_

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vrcg {

// Entity ids are dense indices into the owning Scenario vector.
using UserId = int;
using BsId = int;
using CnId = int;
using LinkId = int;
using PathId = int;
using NodeId = int;

struct Resolution {
  int width_px = 0;
  int height_px = 0;

  double Pixels() const {
    return static_cast<double>(width_px) * static_cast<double>(height_px);
  }
  friend bool operator==(const Resolution&, const Resolution&) = default;
};

struct Headset {
  int id = 0;
  std::string name;
  // Strictly increasing by pixel count.
  std::vector<Resolution> resolutions;
  // Strictly increasing, Hz.
  std::vector<double> frame_rates;
  double market_share = 1.0;
};

enum class PreferenceMode { kQuality, kPerformance };

struct Game {
  int id = 0;
  std::string name;
  PreferenceMode mode = PreferenceMode::kQuality;
  double popularity = 1.0;
};

struct VirtualObject {
  int id = 0;
  double pixel_share = 0.0;
  double attention = 0.0;
};

enum class SpeedClass { kStationary, kBus, kCar };

struct User {
  UserId id = 0;
  double x_m = 0.0;
  double y_m = 0.0;
  double height_m = 1.5;
  int headset = 0;
  int game = 0;
  std::vector<VirtualObject> objects;
  // a_u, frames/s offered to the serving base station queue.
  double frame_arrival_rate = 0.0;
  SpeedClass speed_class = SpeedClass::kStationary;
  // Random-waypoint target; equal to the position when idle.
  double waypoint_x_m = 0.0;
  double waypoint_y_m = 0.0;
};

struct BaseStation {
  BsId id = 0;
  NodeId node = 0;
  double x_m = 0.0;
  double y_m = 0.0;
  int total_prbs = 56;
  int usable_prbs = 16;
  double prb_bandwidth_hz = 360e3;
  double tx_power_dbm = 23.0;
  // rho(b) in bits/s, used for the processing latency.
  double processing_capacity_bps = 10e9;
  // rho(b) in frames/s, used for the buffer latency.
  double processing_capacity_fps = 1e5;
  int channel_id = 0;
  double coverage_radius_m = 400.0;
  CnId nearest_cn = 0;
};

enum class CnTier { kEdge, kRegional, kCloud };

struct ResourceVector {
  double gpu = 0.0;
  double cpu = 0.0;
  double ram = 0.0;
  double net = 0.0;

  friend bool operator==(const ResourceVector&, const ResourceVector&) = default;
};

struct ComputeNode {
  CnId id = 0;
  NodeId node = 0;
  ResourceVector capacity;
  double render_speed_pps = 4e11;
  double fixed_cost = 0.0;
  ResourceVector unit_cost;
  CnTier tier = CnTier::kEdge;
};

// Directed transport link.
struct Link {
  LinkId id = 0;
  NodeId src = 0;
  NodeId dst = 0;
  double capacity_bps = 0.0;
  double latency_s = 0.0;
};

// Directed walk from a compute node to a base station.
struct Path {
  PathId id = 0;
  BsId bs = 0;
  CnId cn = 0;
  std::vector<LinkId> links;
  std::vector<NodeId> nodes;
  double latency_s = 0.0;
};

struct Numerology {
  double tti_s = 0.5e-3;
  int ttis_per_window = 2000;

  double WindowSeconds() const { return tti_s * ttis_per_window; }
};

// Linear mapping from a quality selection to compute demand.
struct DemandModel {
  double gpu_per_mpixel_per_s = 1.0;
  double cpu_base = 2.0;
  double cpu_per_fps = 0.1;
  double ram_base = 4.0;
  double ram_per_mpixel = 0.5;
};

struct RadioParams {
  double carrier_ghz = 3.5;
  double noise_density_dbm_hz = -174.0;
  double los_threshold_m = 50.0;
  double speed_of_light_mps = 3e8;
  double bits_per_pixel = 24.0;
  double compression_rate = 0.0005;
  Numerology numerology;
  int max_connections = 3;
  // Absolute end-to-end deadline; unset means one frame period.
  std::optional<double> deadline_s;
  double epsilon = 0.05;
  double migration_unit_cost = 2.0;
  int k_paths = 3;
  DemandModel demand;
};

struct Scenario {
  std::uint64_t seed = 0;
  double area_w_m = 2000.0;
  double area_h_m = 2000.0;
  RadioParams radio;
  std::vector<Headset> headsets;
  std::vector<Game> games;
  std::vector<User> users;
  std::vector<BaseStation> base_stations;
  std::vector<ComputeNode> compute_nodes;
  std::vector<Link> links;
  // Derived by FinalizeScenario.
  std::vector<Path> paths;
  std::vector<std::vector<PathId>> paths_by_bs_cn;
  std::vector<std::vector<int>> cn_hops;
  std::map<UserId, CnId> prev_placement;

  int NumUsers() const { return static_cast<int>(users.size()); }
  int NumBs() const { return static_cast<int>(base_stations.size()); }
  int NumCns() const { return static_cast<int>(compute_nodes.size()); }

  const Headset& HeadsetOf(const User& u) const { return headsets[u.headset]; }
  const Game& GameOf(const User& u) const { return games[u.game]; }
  const std::vector<PathId>& PathsBetween(BsId bs, CnId cn) const {
    return paths_by_bs_cn[static_cast<size_t>(bs) * compute_nodes.size() + cn];
  }
};

// One invariant violation in a scenario document.
struct ConfigIssue {
  std::string entity;
  std::string field;
  std::string message;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<ConfigIssue> issues);
  const std::vector<ConfigIssue>& issues() const { return issues_; }

 private:
  std::vector<ConfigIssue> issues_;
};

double Distance(const User& u, const BaseStation& b);
bool Covers(const BaseStation& b, double x_m, double y_m);

// Up to k loop-free cn->bs paths, ascending latency, ties broken by the
// lexicographic node sequence. Path ids are left at 0.
std::vector<Path> EnumeratePaths(const std::vector<Link>& links, NodeId from,
                                 NodeId to, int k);

// Checks entity invariants; an empty result means the scenario is valid.
std::vector<ConfigIssue> ValidateScenario(const Scenario& s);

// Validates, then derives paths, nearest CNs (when `assign_nearest_cn`) and
// CN hop distances. Throws ConfigError listing every violation.
Scenario FinalizeScenario(Scenario s, bool assign_nearest_cn = false);

struct GenerationOverrides {
  std::optional<int> total_prbs;
  std::optional<double> usable_prb_fraction;
  std::optional<double> coverage_radius_m;
  std::optional<double> tx_power_dbm;
  std::optional<double> compression_rate;
  std::optional<int> objects_per_user;
  std::optional<int> max_resolutions_per_headset;
  std::optional<int> max_frame_rates_per_headset;
  std::optional<int> k_paths;
  std::optional<int> max_connections;
  std::optional<int> ttis_per_window;
  std::optional<double> link_capacity_scale;
  std::optional<double> cn_capacity_scale;
  // Forces every user onto one fixed headset (catalog index).
  std::optional<int> headset;
};

// Built-in synthetic catalogs.
std::vector<Headset> BuiltinHeadsets();
std::vector<Game> BuiltinGames();

Scenario GenerateSynthetic(std::uint64_t seed, int n_users, int n_bs,
                           int n_cns, double area_w_m, double area_h_m,
                           const GenerationOverrides& overrides = {});

// Moves users for one timestep of `dt_s` seconds (random waypoint inside
// coverage). Depends only on the scenario seed, the step index and ids.
Scenario StepMobility(const Scenario& s, int step, double dt_s = 1.0);

double SpeedOf(SpeedClass c);

// JSON document with the keys accepted by LoadScenario. Derived fields
// (paths, hop matrix) are not written.
std::string ScenarioToJson(const Scenario& s);

// Parses and validates; throws ConfigError on any problem.
Scenario LoadScenario(const std::string& text);

const char* ToString(PreferenceMode m);
const char* ToString(CnTier t);
const char* ToString(SpeedClass c);

}  // namespace vrcg

#endif  // VRCG_SCENARIO_H_
