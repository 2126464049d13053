#include "vrcg/metrics.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace vrcg {
namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

MethodMetrics NotApplicable(const std::string& method) {
  MethodMetrics m;
  m.method = method;
  m.cost_fixed = m.cost_variable = m.cost_migration = m.cost_total = kNaN;
  m.avg_mtp_s = kNaN;
  m.prb_usage_fraction = kNaN;
  return m;
}

void FillQoe(const std::vector<double>& qoe, MethodMetrics* m) {
  m->total_qoe = 0.0;
  for (double q : qoe) m->total_qoe += q;
  if (qoe.empty()) {
    m->avg_qoe = 0.0;
    m->jain_index = kNaN;
    return;
  }
  m->avg_qoe = m->total_qoe / static_cast<double>(qoe.size());
  // QoE is >= 0 by construction; the clamp only absorbs rounding.
  std::vector<double> clamped(qoe.size());
  std::transform(qoe.begin(), qoe.end(), clamped.begin(),
                 [](double q) { return std::max(q, 0.0); });
  m->jain_index = JainIndex(clamped);
}

std::string FormatNumber(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

double ParseNumber(const std::string& field) {
  if (field.empty()) return kNaN;
  size_t used = 0;
  double v = std::stod(field, &used);
  if (used != field.size()) throw std::invalid_argument("bad number: " + field);
  return v;
}

json NumberOrNull(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

double NumberFrom(const json& j, const char* key) {
  const json& v = j.at(key);
  if (v.is_null()) return kNaN;
  return v.get<double>();
}

std::vector<MetricsReport> ParseJson(const std::string& text) {
  std::vector<MetricsReport> out;
  json doc = json::parse(text);
  for (const json& r : doc.at("reports")) {
    MetricsReport rep;
    rep.timestep = r.at("timestep").get<int>();
    for (const json& j : r.at("methods")) {
      MethodMetrics m;
      m.method = j.at("method").get<std::string>();
      m.total_qoe = NumberFrom(j, "total_qoe");
      m.avg_qoe = NumberFrom(j, "avg_qoe");
      m.jain_index = NumberFrom(j, "jain_index");
      const json& c = j.at("cost");
      m.cost_fixed = NumberFrom(c, "fixed");
      m.cost_variable = NumberFrom(c, "variable");
      m.cost_migration = NumberFrom(c, "migration");
      m.cost_total = NumberFrom(c, "total");
      m.avg_mtp_s = NumberFrom(j, "avg_mtp_s");
      m.prb_usage_fraction = NumberFrom(j, "prb_usage_fraction");
      if (!j.at("solve_time_s").is_null()) {
        m.solve_time_s = j.at("solve_time_s").get<double>();
      }
      m.unadmitted_count = j.at("unadmitted_count").get<int>();
      rep.methods.push_back(std::move(m));
    }
    out.push_back(std::move(rep));
  }
  return out;
}

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

std::vector<MetricsReport> ParseCsv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("empty CSV");
  std::vector<std::string> header = SplitCsvLine(line);
  const std::vector<std::string>& cols = MetricColumns();
  if (header != cols) throw std::invalid_argument("unexpected CSV header");
  std::vector<MetricsReport> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f = SplitCsvLine(line);
    if (f.size() != cols.size()) {
      throw std::invalid_argument("CSV row has " + std::to_string(f.size()) +
                                  " fields");
    }
    int t = std::stoi(f[0]);
    if (out.empty() || out.back().timestep != t) {
      out.push_back(MetricsReport{t, {}});
    }
    MethodMetrics m;
    m.method = f[1];
    m.total_qoe = ParseNumber(f[2]);
    m.avg_qoe = ParseNumber(f[3]);
    m.jain_index = ParseNumber(f[4]);
    m.cost_fixed = ParseNumber(f[5]);
    m.cost_variable = ParseNumber(f[6]);
    m.cost_migration = ParseNumber(f[7]);
    m.cost_total = ParseNumber(f[8]);
    m.avg_mtp_s = ParseNumber(f[9]);
    m.prb_usage_fraction = ParseNumber(f[10]);
    if (!f[11].empty()) m.solve_time_s = ParseNumber(f[11]);
    m.unadmitted_count = std::stoi(f[12]);
    out.back().methods.push_back(std::move(m));
  }
  return out;
}

}  // namespace

double JainIndex(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("Jain index of no values");
  double sum = 0.0, sq = 0.0;
  for (double v : values) {
    if (v < 0.0) throw std::invalid_argument("Jain index of a negative value");
    sum += v;
    sq += v * v;
  }
  if (sq == 0.0) return 1.0;
  double j = sum * sum / (static_cast<double>(values.size()) * sq);
  return std::min(j, 1.0);
}

const std::vector<std::string>& KnownMethods() {
  static const std::vector<std::string> kMethods = {
      "vexa",          "sa",  "dc",  "gepar",         "single_path",
      "unconstrained", "amps", "mtpsched", "rr",      "pf",
      "oracle_stage1", "oracle_stage2", "oracle_stage3"};
  return kMethods;
}

std::optional<Stage> StageOf(const std::string& method) {
  if (method == "vexa" || method == "sa" || method == "dc" ||
      method == "oracle_stage1") {
    return Stage::kOne;
  }
  if (method == "gepar" || method == "single_path" ||
      method == "unconstrained" || method == "oracle_stage2") {
    return Stage::kTwo;
  }
  if (method == "amps" || method == "mtpsched" || method == "rr" ||
      method == "pf" || method == "oracle_stage3") {
    return Stage::kThree;
  }
  return std::nullopt;
}

MethodMetrics ComputeMetrics(const Scenario& s, const MethodSolution& sol) {
  MethodMetrics m = NotApplicable(sol.method);
  const Stage1Solution& sol1 = sol.stage1;
  const int n = s.NumUsers();
  std::vector<double> qoe;
  switch (sol.stage) {
    case Stage::kOne: {
      for (UserId u = 0; u < n; ++u) {
        if (sol1.admitted[u]) qoe.push_back(QoeStage1(s, sol1, u));
      }
      double used = 0.0, usable = 0.0;
      for (UserId u = 0; u < n; ++u) {
        for (const Leg& l : sol1.legs[u]) used += l.prbs;
      }
      for (const BaseStation& b : s.base_stations) usable += b.usable_prbs;
      m.prb_usage_fraction = usable > 0.0 ? used / usable : 0.0;
      break;
    }
    case Stage::kTwo: {
      const Stage2Solution& sol2 = *sol.stage2;
      for (UserId u = 0; u < n; ++u) {
        if (sol1.admitted[u] && sol2.placement[u] >= 0) {
          qoe.push_back(QoeStage1(s, sol1, u));
        }
      }
      CostBreakdown c = TotalCost(sol2, s, sol1, sol.prev_placement);
      m.cost_fixed = c.fixed;
      m.cost_variable = c.variable;
      m.cost_migration = c.migration;
      m.cost_total = c.total;
      break;
    }
    case Stage::kThree: {
      const Stage3Solution& sol3 = *sol.stage3;
      std::vector<std::vector<int>> table = sol3.ResolutionTable(s);
      for (UserId u = 0; u < n; ++u) {
        if (sol1.admitted[u]) qoe.push_back(QoeStage3(s, sol1, table[u], u));
      }
      m.avg_mtp_s = MtpLatency(s, sol1, sol3).average_s;
      m.prb_usage_fraction = PrbUsageFraction(s, sol3);
      break;
    }
  }
  FillQoe(qoe, &m);
  m.unadmitted_count = n - static_cast<int>(qoe.size());
  return m;
}

MethodSolution SolveMethod(const Scenario& s, const std::string& method,
                           const Stage1Solution& feed,
                           const std::map<UserId, CnId>& prev_placement,
                           const OracleBounds& bounds) {
  std::optional<Stage> stage = StageOf(method);
  if (!stage) throw std::invalid_argument("unknown method: " + method);
  MethodSolution out;
  out.method = method;
  out.stage = *stage;
  if (*stage == Stage::kOne) {
    if (method == "vexa") {
      out.stage1 = Vexa(s);
    } else if (method == "sa") {
      out.stage1 = BaselineSingleAssociation(s);
    } else if (method == "dc") {
      out.stage1 = BaselineDualConnectivity(s);
    } else {
      out.stage1 = ExactStage1(s, bounds).solution;
    }
    return out;
  }
  out.stage1 = feed;
  if (*stage == Stage::kTwo) {
    out.prev_placement = prev_placement;
    if (method == "gepar") {
      out.stage2 = Gepar(s, feed, prev_placement);
    } else if (method == "single_path") {
      out.stage2 = BaselineSinglePath(s, feed, prev_placement);
    } else if (method == "unconstrained") {
      out.stage2 = BaselineUnconstrained(s, feed, prev_placement);
    } else {
      ExactStage2Result r = ExactStage2(s, feed, prev_placement, bounds);
      if (!r.feasible) throw InfeasibleError("oracle_stage2", "no routable placement");
      out.stage2 = std::move(r.solution);
    }
    return out;
  }
  if (method == "amps") {
    out.stage3 = Amps(s, feed);
  } else if (method == "mtpsched") {
    out.stage3 = MtpSched(s, feed, InitialObjectResolutions(s, feed));
  } else if (method == "rr") {
    out.stage3 = BaselineRoundRobin(s, feed);
  } else if (method == "pf") {
    out.stage3 = BaselineProportionalFair(s, feed);
  } else {
    ExactStage3Result r = ExactStage3(s, feed, bounds);
    if (!r.feasible) throw InfeasibleError("oracle_stage3", "no schedulable selection");
    out.stage3 = std::move(r.solution);
  }
  return out;
}

ViolationReport VerifyMethod(const Scenario& s, const MethodSolution& sol) {
  switch (sol.stage) {
    case Stage::kOne:
      return VerifyStage1(sol.stage1, s);
    case Stage::kTwo: {
      ViolationReport r = VerifyStage2(*sol.stage2, s, sol.stage1);
      if (sol.method == "unconstrained") {
        std::erase_if(r, [](const Violation& v) {
          return v.constraint == "deadline" || v.constraint == "cn_capacity" ||
                 v.constraint == "link_capacity";
        });
      }
      return r;
    }
    case Stage::kThree: {
      Stage3VerifyOptions o;
      o.check_targets = !(sol.method == "rr" || sol.method == "pf");
      return VerifyStage3(*sol.stage3, s, sol.stage1, o);
    }
  }
  return {};
}

VerificationFailure::VerificationFailure(const std::string& method,
                                         int timestep, ViolationReport report)
    : std::runtime_error(method + " at timestep " + std::to_string(timestep) +
                         " failed verification:\n" + Describe(report)),
      report_(std::move(report)) {}

ExperimentResult RunExperiment(const Scenario& s,
                               const std::vector<std::string>& methods,
                               int timesteps, const ExperimentOptions& opts) {
  if (timesteps < 1) throw std::invalid_argument("timesteps must be >= 1");
  bool needs_feed = false;
  for (const std::string& m : methods) {
    std::optional<Stage> st = StageOf(m);
    if (!st) throw std::invalid_argument("unknown method: " + m);
    if (*st != Stage::kOne) needs_feed = true;
  }

  ExperimentResult result;
  std::map<std::string, std::map<UserId, CnId>> chains;
  Scenario cur = s;
  for (int t = 0; t < timesteps; ++t) {
    if (t > 0) cur = StepMobility(cur, t);
    Stage1Solution feed = Stage1Solution::Empty(cur.NumUsers());
    if (needs_feed) feed = Vexa(cur);

    MetricsReport rep;
    rep.timestep = t;
    std::vector<MethodSolution> solved;
    for (const std::string& m : methods) {
      auto chain = chains.try_emplace(m, cur.prev_placement).first;
      auto start = std::chrono::steady_clock::now();
      MethodSolution sol =
          SolveMethod(cur, m, feed, chain->second, opts.oracle_bounds);
      std::chrono::duration<double> took =
          std::chrono::steady_clock::now() - start;
      ViolationReport v = VerifyMethod(cur, sol);
      if (!v.empty()) throw VerificationFailure(m, t, std::move(v));

      MethodMetrics mm = ComputeMetrics(cur, sol);
      if (opts.measure_time) mm.solve_time_s = took.count();
      rep.methods.push_back(std::move(mm));

      if (sol.stage2) {
        for (UserId u = 0; u < cur.NumUsers(); ++u) {
          if (sol.stage2->placement[u] >= 0) {
            chain->second[u] = sol.stage2->placement[u];
          }
        }
      }
      solved.push_back(std::move(sol));
    }
    result.reports.push_back(std::move(rep));
    if (t == timesteps - 1) {
      result.final_solutions = std::move(solved);
      result.final_timestep = t;
    }
  }
  result.final_scenario = std::move(cur);
  return result;
}

const std::vector<std::string>& MetricColumns() {
  static const std::vector<std::string> kColumns = {
      "timestep",       "method",        "total_qoe",
      "avg_qoe",        "jain_index",    "cost_fixed",
      "cost_variable",  "cost_migration", "cost_total",
      "avg_mtp_s",      "prb_usage_fraction", "solve_time_s",
      "unadmitted_count"};
  return kColumns;
}

std::string EmitCsv(const std::vector<MetricsReport>& reports) {
  std::string out;
  const std::vector<std::string>& cols = MetricColumns();
  for (size_t i = 0; i < cols.size(); ++i) {
    if (i) out += ',';
    out += cols[i];
  }
  out += '\n';
  for (const MetricsReport& r : reports) {
    for (const MethodMetrics& m : r.methods) {
      out += std::to_string(r.timestep) + ',' + m.method;
      for (double v : {m.total_qoe, m.avg_qoe, m.jain_index, m.cost_fixed,
                       m.cost_variable, m.cost_migration, m.cost_total,
                       m.avg_mtp_s, m.prb_usage_fraction}) {
        out += ',' + FormatNumber(v);
      }
      out += ',' + (m.solve_time_s ? FormatNumber(*m.solve_time_s) : "");
      out += ',' + std::to_string(m.unadmitted_count) + '\n';
    }
  }
  return out;
}

std::string EmitJson(const std::vector<MetricsReport>& reports) {
  json arr = json::array();
  for (const MetricsReport& r : reports) {
    json methods = json::array();
    for (const MethodMetrics& m : r.methods) {
      json j;
      j["method"] = m.method;
      j["total_qoe"] = NumberOrNull(m.total_qoe);
      j["avg_qoe"] = NumberOrNull(m.avg_qoe);
      j["jain_index"] = NumberOrNull(m.jain_index);
      j["cost"] = {{"fixed", NumberOrNull(m.cost_fixed)},
                   {"variable", NumberOrNull(m.cost_variable)},
                   {"migration", NumberOrNull(m.cost_migration)},
                   {"total", NumberOrNull(m.cost_total)}};
      j["avg_mtp_s"] = NumberOrNull(m.avg_mtp_s);
      j["prb_usage_fraction"] = NumberOrNull(m.prb_usage_fraction);
      j["solve_time_s"] =
          m.solve_time_s ? json(*m.solve_time_s) : json(nullptr);
      j["unadmitted_count"] = m.unadmitted_count;
      methods.push_back(std::move(j));
    }
    arr.push_back({{"timestep", r.timestep}, {"methods", std::move(methods)}});
  }
  json doc;
  doc["reports"] = std::move(arr);
  return doc.dump(2) + "\n";
}

std::vector<MetricsReport> ParseReports(const std::string& text) {
  size_t first = text.find_first_not_of(" \t\r\n");
  try {
    if (first != std::string::npos && text[first] == '{') return ParseJson(text);
    return ParseCsv(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed results: ") + e.what());
  } catch (const std::out_of_range& e) {
    throw std::invalid_argument(std::string("malformed results: ") + e.what());
  }
}

}  // namespace vrcg
