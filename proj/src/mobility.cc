#include <cmath>

#include "vrcg/rng.h"
#include "vrcg/scenario.h"

namespace vrcg {
namespace {

bool Covered(const Scenario& s, double x, double y) {
  if (x < 0 || x > s.area_w_m || y < 0 || y > s.area_h_m) return false;
  for (const BaseStation& b : s.base_stations) {
    if (Covers(b, x, y)) return true;
  }
  return false;
}

void DrawWaypoint(const Scenario& s, Rng& rng, User& u) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    double x = rng.Uniform(0.0, s.area_w_m);
    double y = rng.Uniform(0.0, s.area_h_m);
    if (Covered(s, x, y)) {
      u.waypoint_x_m = x;
      u.waypoint_y_m = y;
      return;
    }
  }
  u.waypoint_x_m = u.x_m;
  u.waypoint_y_m = u.y_m;
}

}  // namespace

Scenario StepMobility(const Scenario& s, int step, double dt_s) {
  Scenario next = s;
  for (User& u : next.users) {
    double speed = SpeedOf(u.speed_class);
    if (speed <= 0.0) continue;
    Rng rng(Rng::Mix(Rng::Mix(s.seed, static_cast<std::uint64_t>(step)),
                     static_cast<std::uint64_t>(u.id)));
    double budget = speed * dt_s;
    double dx = u.waypoint_x_m - u.x_m;
    double dy = u.waypoint_y_m - u.y_m;
    double dist = std::hypot(dx, dy);
    if (dist <= budget) {
      u.x_m = u.waypoint_x_m;
      u.y_m = u.waypoint_y_m;
      DrawWaypoint(next, rng, u);
      continue;
    }
    double nx = u.x_m + dx / dist * budget;
    double ny = u.y_m + dy / dist * budget;
    if (Covered(next, nx, ny)) {
      u.x_m = nx;
      u.y_m = ny;
    } else {
      // Straight segments can cross coverage holes; wait and re-target.
      DrawWaypoint(next, rng, u);
    }
  }
  return next;
}

}  // namespace vrcg
