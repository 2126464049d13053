// Command-line front end: generate scenarios, run experiments, verify stored
// solutions and compare result files.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vrcg/metrics.h"
#include "vrcg/oracle.h"
#include "vrcg/scenario.h"
#include "vrcg/solution_io.h"
#include "vrcg/violations.h"

namespace {

using namespace vrcg;

constexpr int kOk = 0;
constexpr int kInfeasible = 1;
constexpr int kConfigError = 2;

// Input or usage problems that are not scenario validation issues.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GenerateArgs {
  std::uint64_t seed = 1;
  int users = 100;
  int bs = 10;
  int cns = 13;
  double width_m = 2000.0;
  double height_m = 2000.0;
  std::optional<int> ttis;
  std::optional<double> link_scale;
  std::optional<double> cn_scale;
};

void AddGenerateFlags(CLI::App* cmd, GenerateArgs* g) {
  cmd->add_option("--seed", g->seed, "Scenario seed");
  cmd->add_option("--users", g->users, "Number of users")->check(CLI::NonNegativeNumber);
  cmd->add_option("--bs", g->bs, "Number of base stations")->check(CLI::PositiveNumber);
  cmd->add_option("--cns", g->cns, "Number of compute nodes")->check(CLI::PositiveNumber);
  cmd->add_option("--width", g->width_m, "Area width in meters");
  cmd->add_option("--height", g->height_m, "Area height in meters");
  cmd->add_option("--ttis", g->ttis, "TTIs per scheduling window");
  cmd->add_option("--link-capacity-scale", g->link_scale,
                  "Multiplier on transport link capacities");
  cmd->add_option("--cn-capacity-scale", g->cn_scale,
                  "Multiplier on compute node capacities");
}

Scenario Generate(const GenerateArgs& g) {
  GenerationOverrides o;
  o.ttis_per_window = g.ttis;
  o.link_capacity_scale = g.link_scale;
  o.cn_capacity_scale = g.cn_scale;
  return GenerateSynthetic(g.seed, g.users, g.bs, g.cns, g.width_m, g.height_m, o);
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteOutput(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot write " + path);
  out << text;
  if (!out.flush()) throw UsageError("write failed: " + path);
}

// A scenario file when given, else a generated one.
Scenario LoadOrGenerate(const std::string& path, const GenerateArgs& g) {
  if (!path.empty()) return LoadScenario(ReadFile(path));
  return Generate(g);
}

std::vector<std::string> SplitMethods(const std::string& list) {
  std::vector<std::string> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if (!StageOf(item)) throw UsageError("unknown method: " + item);
    out.push_back(item);
  }
  if (out.empty()) throw UsageError("no methods given");
  return out;
}

std::string FormatCell(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

// One row per (timestep, method, metric) present in both files.
std::string GapTable(const std::vector<MetricsReport>& a,
                     const std::vector<MetricsReport>& b) {
  std::string out = "timestep,method,metric,a,b,difference,relative_gap\n";
  auto values = [](const MethodMetrics& m) {
    return std::vector<std::pair<const char*, double>>{
        {"total_qoe", m.total_qoe},
        {"avg_qoe", m.avg_qoe},
        {"jain_index", m.jain_index},
        {"cost_fixed", m.cost_fixed},
        {"cost_variable", m.cost_variable},
        {"cost_migration", m.cost_migration},
        {"cost_total", m.cost_total},
        {"avg_mtp_s", m.avg_mtp_s},
        {"prb_usage_fraction", m.prb_usage_fraction},
        {"solve_time_s", m.solve_time_s.value_or(std::nan(""))},
        {"unadmitted_count", static_cast<double>(m.unadmitted_count)}};
  };
  for (const MetricsReport& ra : a) {
    const MetricsReport* rb = nullptr;
    for (const MetricsReport& r : b) {
      if (r.timestep == ra.timestep) rb = &r;
    }
    if (!rb) continue;
    for (const MethodMetrics& ma : ra.methods) {
      for (const MethodMetrics& mb : rb->methods) {
        if (mb.method != ma.method) continue;
        auto va = values(ma), vb = values(mb);
        for (size_t i = 0; i < va.size(); ++i) {
          double x = va[i].second, y = vb[i].second;
          if (std::isnan(x) && std::isnan(y)) continue;
          double diff = y - x;
          double rel = (x != 0.0 && !std::isnan(diff)) ? diff / std::fabs(x)
                                                       : std::nan("");
          out += std::to_string(ra.timestep) + ',' + ma.method + ',' +
                 va[i].first + ',' + FormatCell(x) + ',' + FormatCell(y) +
                 ',' + FormatCell(diff) + ',' + FormatCell(rel) + '\n';
        }
      }
    }
  }
  return out;
}

int RunMain(int argc, char** argv) {
  CLI::App app{"VR cloud-gaming resource allocation simulator"};
  app.require_subcommand(1);

  GenerateArgs gen;
  std::string out_path;
  CLI::App* generate = app.add_subcommand("generate", "Write a synthetic scenario");
  AddGenerateFlags(generate, &gen);
  generate->add_option("--out", out_path, "Output file (default stdout)");

  GenerateArgs run_gen;
  std::string run_scenario, run_out, run_solutions, methods = "vexa,gepar,amps",
                                                    format = "csv";
  int timesteps = 1;
  bool timing = false;
  CLI::App* run = app.add_subcommand("run", "Solve and report metrics");
  AddGenerateFlags(run, &run_gen);
  run->add_option("--scenario", run_scenario, "Scenario file; generated from flags when absent");
  run->add_option("--methods", methods, "Comma-separated method list");
  run->add_option("--timesteps", timesteps, "Number of timesteps")->check(CLI::PositiveNumber);
  run->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  run->add_option("--out", run_out, "Metrics file (default stdout)");
  run->add_option("--solutions", run_solutions, "Write last-timestep solutions here");
  run->add_flag("--timing", timing, "Record solver wall time (output is no longer reproducible)");

  GenerateArgs ver_gen;
  std::string ver_scenario, ver_solution, ver_out;
  CLI::App* verify = app.add_subcommand("verify", "Check a solution file against a scenario");
  AddGenerateFlags(verify, &ver_gen);
  verify->add_option("--scenario", ver_scenario, "Scenario file; generated from flags when absent");
  verify->add_option("--solution", ver_solution, "Solution file")->required();
  verify->add_option("--out", ver_out, "Report file (default stdout)");

  std::string cmp_a, cmp_b, cmp_out;
  CLI::App* compare = app.add_subcommand("compare", "Gap table between two result files");
  compare->add_option("a", cmp_a, "Reference results")->required();
  compare->add_option("b", cmp_b, "Compared results")->required();
  compare->add_option("--out", cmp_out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  if (*generate) {
    WriteOutput(out_path, ScenarioToJson(Generate(gen)));
    return kOk;
  }

  if (*run) {
    std::vector<std::string> list = SplitMethods(methods);
    Scenario s = LoadOrGenerate(run_scenario, run_gen);
    ExperimentOptions opts;
    opts.measure_time = timing;
    ExperimentResult r = RunExperiment(s, list, timesteps, opts);
    WriteOutput(run_out, format == "json" ? EmitJson(r.reports) : EmitCsv(r.reports));
    if (!run_solutions.empty()) {
      SolutionDocument doc{r.final_timestep, r.final_solutions};
      WriteOutput(run_solutions, SolutionsToJson(doc));
    }
    return kOk;
  }

  if (*verify) {
    Scenario base = LoadOrGenerate(ver_scenario, ver_gen);
    std::string text = ReadFile(ver_solution);
    Scenario s = ScenarioAt(base, SolutionTimestep(text));
    SolutionDocument doc = ParseSolutions(text, s);
    std::string report;
    bool clean = true;
    for (const MethodSolution& m : doc.solutions) {
      ViolationReport v = VerifyMethod(s, m);
      if (v.empty()) {
        report += m.method + ": ok\n";
      } else {
        clean = false;
        report += m.method + ": " + std::to_string(v.size()) + " violations\n" +
                  Describe(v) + "\n";
      }
    }
    WriteOutput(ver_out, report);
    return clean ? kOk : kInfeasible;
  }

  if (*compare) {
    std::vector<MetricsReport> a = ParseReports(ReadFile(cmp_a));
    std::vector<MetricsReport> b = ParseReports(ReadFile(cmp_b));
    WriteOutput(cmp_out, GapTable(a, b));
    return kOk;
  }
  return kConfigError;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return RunMain(argc, argv);
  } catch (const vrcg::ConfigError& e) {
    std::cerr << "config error:\n";
    for (const vrcg::ConfigIssue& i : e.issues()) {
      std::cerr << "  " << i.entity << "." << i.field << ": " << i.message << "\n";
    }
    return kConfigError;
  } catch (const vrcg::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const vrcg::VerificationFailure& e) {
    std::cerr << e.what() << "\n";
    return kInfeasible;
  } catch (const vrcg::OracleRefusal& e) {
    std::cerr << "oracle refused: " << e.what() << "\n";
    return kConfigError;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  }
}
