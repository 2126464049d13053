#include "vrcg/solution_io.h"

#include <stdexcept>

#include <json.hpp>

namespace vrcg {
namespace {

using nlohmann::json;

void Require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("malformed solution: " + what);
}

json Stage1ToJson(const Stage1Solution& sol) {
  json users = json::array();
  for (size_t u = 0; u < sol.legs.size(); ++u) {
    json legs = json::array();
    for (const Leg& l : sol.legs[u]) {
      legs.push_back({{"bs", l.bs}, {"prbs", l.prbs}, {"share", l.share}});
    }
    users.push_back({{"user", static_cast<int>(u)},
                     {"admitted", static_cast<bool>(sol.admitted[u])},
                     {"resolution", sol.resolution[u]},
                     {"frame_rate", sol.frame_rate[u]},
                     {"legs", std::move(legs)}});
  }
  return users;
}

Stage1Solution Stage1FromJson(const json& j, const Scenario& s) {
  const int n = s.NumUsers();
  Require(j.is_array() && static_cast<int>(j.size()) == n,
          "stage1 needs one entry per user");
  Stage1Solution sol = Stage1Solution::Empty(n);
  for (int u = 0; u < n; ++u) {
    const json& e = j[u];
    Require(e.at("user").get<int>() == u, "stage1 users out of order");
    sol.admitted[u] = e.at("admitted").get<bool>();
    sol.resolution[u] = e.at("resolution").get<int>();
    sol.frame_rate[u] = e.at("frame_rate").get<int>();
    for (const json& l : e.at("legs")) {
      sol.legs[u].push_back(Leg{l.at("bs").get<int>(), l.at("prbs").get<int>(),
                                l.at("share").get<double>()});
    }
  }
  return sol;
}

json Stage2ToJson(const Stage2Solution& sol) {
  json users = json::array();
  for (size_t u = 0; u < sol.placement.size(); ++u) {
    json flows = json::array();
    for (const PathFlow& f : sol.flows[u]) {
      flows.push_back({{"path", f.path}, {"flow", f.flow}});
    }
    users.push_back({{"user", static_cast<int>(u)},
                     {"cn", sol.placement[u]},
                     {"flows", std::move(flows)}});
  }
  return {{"users", std::move(users)}, {"unplaced", sol.unplaced}};
}

Stage2Solution Stage2FromJson(const json& j, const Scenario& s) {
  const int n = s.NumUsers();
  const json& users = j.at("users");
  Require(users.is_array() && static_cast<int>(users.size()) == n,
          "stage2 needs one entry per user");
  Stage2Solution sol = Stage2Solution::Empty(n);
  for (int u = 0; u < n; ++u) {
    const json& e = users[u];
    Require(e.at("user").get<int>() == u, "stage2 users out of order");
    sol.placement[u] = e.at("cn").get<int>();
    for (const json& f : e.at("flows")) {
      sol.flows[u].push_back(
          PathFlow{f.at("path").get<int>(), f.at("flow").get<double>()});
    }
  }
  sol.unplaced = j.at("unplaced").get<std::vector<UserId>>();
  return sol;
}

json Stage3ToJson(const Stage3Solution& sol) {
  json objects = json::array();
  for (const ObjectChoice& o : sol.objects) {
    objects.push_back({o.user, o.object, o.resolution});
  }
  json schedule = json::array();
  for (const Grant& g : sol.schedule) {
    schedule.push_back({g.bs, g.tti, g.user, g.prbs});
  }
  return {{"ttis", sol.ttis},
          {"groups", sol.groups},
          {"objects", std::move(objects)},
          {"schedule", std::move(schedule)}};
}

Stage3Solution Stage3FromJson(const json& j, const Scenario& s) {
  Stage3Solution sol;
  sol.ttis = j.at("ttis").get<int>();
  sol.groups = j.at("groups").get<std::vector<int>>();
  Require(static_cast<int>(sol.groups.size()) == s.NumUsers(),
          "stage3 needs one group count per user");
  for (const json& o : j.at("objects")) {
    Require(o.is_array() && o.size() == 3, "object choices are triples");
    sol.objects.push_back(
        ObjectChoice{o[0].get<int>(), o[1].get<int>(), o[2].get<int>()});
  }
  for (const json& g : j.at("schedule")) {
    Require(g.is_array() && g.size() == 4, "grants are quadruples");
    sol.schedule.push_back(
        Grant{g[0].get<int>(), g[1].get<int>(), g[2].get<int>(), g[3].get<int>()});
  }
  return sol;
}

void CheckIndices(const MethodSolution& m, const Scenario& s) {
  for (const auto& legs : m.stage1.legs) {
    for (const Leg& l : legs) {
      Require(l.bs >= 0 && l.bs < s.NumBs(), "leg BS out of range");
    }
  }
  if (m.stage2) {
    for (CnId c : m.stage2->placement) {
      Require(c >= -1 && c < s.NumCns(), "placement CN out of range");
    }
    for (const auto& flows : m.stage2->flows) {
      for (const PathFlow& f : flows) {
        Require(f.path >= 0 && f.path < static_cast<int>(s.paths.size()),
                "path out of range");
      }
    }
  }
  if (m.stage3) {
    for (const ObjectChoice& o : m.stage3->objects) {
      Require(o.user >= 0 && o.user < s.NumUsers(), "object user out of range");
    }
    for (const Grant& g : m.stage3->schedule) {
      Require(g.bs >= 0 && g.bs < s.NumBs(), "grant BS out of range");
      Require(g.user >= 0 && g.user < s.NumUsers(), "grant user out of range");
    }
  }
}

}  // namespace

std::string SolutionsToJson(const SolutionDocument& doc) {
  json sols = json::array();
  for (const MethodSolution& m : doc.solutions) {
    json j;
    j["method"] = m.method;
    j["stage"] = static_cast<int>(m.stage);
    j["stage1"] = Stage1ToJson(m.stage1);
    json prev = json::array();
    for (const auto& [u, c] : m.prev_placement) prev.push_back({u, c});
    j["prev_placement"] = std::move(prev);
    if (m.stage2) j["stage2"] = Stage2ToJson(*m.stage2);
    if (m.stage3) j["stage3"] = Stage3ToJson(*m.stage3);
    sols.push_back(std::move(j));
  }
  json out;
  out["timestep"] = doc.timestep;
  out["solutions"] = std::move(sols);
  return out.dump() + "\n";
}

SolutionDocument ParseSolutions(const std::string& text, const Scenario& s) {
  SolutionDocument doc;
  try {
    json j = json::parse(text);
    doc.timestep = j.at("timestep").get<int>();
    Require(doc.timestep >= 0, "negative timestep");
    for (const json& e : j.at("solutions")) {
      MethodSolution m;
      m.method = e.at("method").get<std::string>();
      std::optional<Stage> stage = StageOf(m.method);
      Require(stage.has_value(), "unknown method " + m.method);
      Require(static_cast<int>(*stage) == e.at("stage").get<int>(),
              "stage does not match method " + m.method);
      m.stage = *stage;
      m.stage1 = Stage1FromJson(e.at("stage1"), s);
      for (const json& p : e.at("prev_placement")) {
        m.prev_placement[p.at(0).get<int>()] = p.at(1).get<int>();
      }
      if (m.stage == Stage::kTwo) m.stage2 = Stage2FromJson(e.at("stage2"), s);
      if (m.stage == Stage::kThree) m.stage3 = Stage3FromJson(e.at("stage3"), s);
      CheckIndices(m, s);
      doc.solutions.push_back(std::move(m));
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed solution: ") + e.what());
  }
  return doc;
}

int SolutionTimestep(const std::string& text) {
  try {
    int t = json::parse(text).at("timestep").get<int>();
    Require(t >= 0, "negative timestep");
    return t;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed solution: ") + e.what());
  }
}

Scenario ScenarioAt(const Scenario& s, int timestep) {
  Scenario cur = s;
  for (int t = 1; t <= timestep; ++t) cur = StepMobility(cur, t);
  return cur;
}

}  // namespace vrcg
