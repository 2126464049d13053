#include <algorithm>

#include "vrcg/scenario.h"

namespace vrcg {
namespace {

// Per-eye resolution ladder, ascending pixel count.
constexpr Resolution kLadder[] = {
    {960, 1080},  {1080, 1200}, {1280, 1440}, {1440, 1440}, {1440, 1600},
    {1440, 1700}, {1800, 1920}, {1832, 1920}, {2560, 1440}, {2000, 2040},
    {2064, 2208}, {2160, 2160}, {2448, 2448}, {2560, 2560}, {2880, 2720},
};

// Each headset exposes up to this many ladder steps ending at its panel.
constexpr int kStepsPerHeadset = 4;

struct HeadsetRow {
  const char* name;
  int native;  // index into kLadder
  std::vector<double> rates;
  double share;
};

const std::vector<HeadsetRow>& Rows() {
  static const std::vector<HeadsetRow> rows = {
      {"Quest 2", 7, {72, 80, 90, 120}, 0.36},
      {"Quest 3", 10, {72, 80, 90, 120}, 0.19},
      {"Quest 3S", 7, {72, 90, 120}, 0.04},
      {"Quest Pro", 6, {72, 90}, 0.02},
      {"Quest", 4, {72}, 0.03},
      {"Rift S", 2, {80}, 0.04},
      {"Rift CV1", 1, {90}, 0.02},
      {"Valve Index", 4, {80, 90, 120, 144}, 0.14},
      {"Vive", 1, {90}, 0.02},
      {"Vive Pro", 4, {90}, 0.02},
      {"Vive Pro 2", 12, {90, 120}, 0.02},
      {"Vive Cosmos", 5, {90}, 0.01},
      {"Vive Focus 3", 12, {90}, 0.01},
      {"Reverb G2", 11, {90}, 0.02},
      {"WMR Generic", 3, {90}, 0.02},
      {"Pico 4", 11, {72, 90}, 0.03},
      {"Pico Neo 3", 7, {72, 90}, 0.01},
      {"Pimax 5K", 8, {72, 90, 100, 120, 144}, 0.01},
      {"Bigscreen Beyond", 13, {72, 90}, 0.01},
      {"Varjo Aero", 14, {90}, 0.005},
      {"PlayStation VR2", 9, {90, 120}, 0.01},
      {"PlayStation VR", 0, {90, 120}, 0.005},
  };
  return rows;
}

}  // namespace

std::vector<Headset> BuiltinHeadsets() {
  std::vector<Headset> out;
  const std::vector<HeadsetRow>& rows = Rows();
  for (size_t i = 0; i < rows.size(); ++i) {
    Headset h;
    h.id = static_cast<int>(i);
    h.name = rows[i].name;
    int first = std::max(0, rows[i].native - (kStepsPerHeadset - 1));
    for (int r = first; r <= rows[i].native; ++r) {
      h.resolutions.push_back(kLadder[r]);
    }
    h.frame_rates = rows[i].rates;
    h.market_share = rows[i].share;
    out.push_back(std::move(h));
  }
  return out;
}

std::vector<Game> BuiltinGames() {
  struct Row {
    const char* name;
    PreferenceMode mode;
    double popularity;
  };
  static const Row rows[] = {
      {"Arena Shooter", PreferenceMode::kPerformance, 0.18},
      {"Rhythm Blades", PreferenceMode::kPerformance, 0.15},
      {"Orbital Sandbox", PreferenceMode::kQuality, 0.14},
      {"Haunted Manor", PreferenceMode::kQuality, 0.10},
      {"Kart League", PreferenceMode::kPerformance, 0.09},
      {"Museum Walk", PreferenceMode::kQuality, 0.08},
      {"Flight Deck", PreferenceMode::kQuality, 0.08},
      {"Boxing Club", PreferenceMode::kPerformance, 0.07},
      {"Puzzle Tower", PreferenceMode::kQuality, 0.06},
      {"Social Plaza", PreferenceMode::kQuality, 0.05},
  };
  std::vector<Game> out;
  for (size_t i = 0; i < std::size(rows); ++i) {
    out.push_back({static_cast<int>(i), rows[i].name, rows[i].mode,
                   rows[i].popularity});
  }
  return out;
}

}  // namespace vrcg
