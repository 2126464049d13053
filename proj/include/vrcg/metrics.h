#ifndef VRCG_METRICS_H_
#define VRCG_METRICS_H_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vrcg/oracle.h"
#include "vrcg/scenario.h"
#include "vrcg/stage1.h"
#include "vrcg/stage2.h"
#include "vrcg/stage3.h"

namespace vrcg {

// Metrics of one method at one timestep. Fields that do not apply to the
// method's stage hold NaN (empty in CSV, null in JSON).
struct MethodMetrics {
  std::string method;
  double total_qoe = 0.0;
  double avg_qoe = 0.0;
  double jain_index = 1.0;
  double cost_fixed = 0.0;
  double cost_variable = 0.0;
  double cost_migration = 0.0;
  double cost_total = 0.0;
  double avg_mtp_s = 0.0;
  double prb_usage_fraction = 0.0;
  // Unset unless timing was requested.
  std::optional<double> solve_time_s;
  int unadmitted_count = 0;
};

struct MetricsReport {
  int timestep = 0;
  std::vector<MethodMetrics> methods;
};

// (sum x)^2 / (n sum x^2). All-zero input is perfectly equal and yields 1.
// Throws std::invalid_argument on empty input or negative values.
double JainIndex(const std::vector<double>& values);

enum class Stage { kOne = 1, kTwo = 2, kThree = 3 };

// Every method name accepted by RunExperiment.
const std::vector<std::string>& KnownMethods();
std::optional<Stage> StageOf(const std::string& method);

// A solved method and the inputs needed to recompute its metrics.
struct MethodSolution {
  std::string method;
  Stage stage = Stage::kOne;
  // The method's own output for stage 1, otherwise the stage-1 input.
  Stage1Solution stage1;
  std::optional<Stage2Solution> stage2;
  std::optional<Stage3Solution> stage3;
  // Placement the stage-2 migration cost is measured against.
  std::map<UserId, CnId> prev_placement;
};

// Recomputes a method's metrics from its solution.
MethodMetrics ComputeMetrics(const Scenario& s, const MethodSolution& sol);

// Solves `method` on `s`. Stage-2 and stage-3 methods take `feed` as their
// stage-1 input. Throws InfeasibleError, OracleRefusal, std::invalid_argument.
MethodSolution SolveMethod(const Scenario& s, const std::string& method,
                           const Stage1Solution& feed,
                           const std::map<UserId, CnId>& prev_placement,
                           const OracleBounds& bounds = {});

// Checks a solution with its stage verifier. Unconstrained placements and the
// work-conserving schedulers are checked without the rules they ignore by
// design.
ViolationReport VerifyMethod(const Scenario& s, const MethodSolution& sol);

struct ExperimentOptions {
  bool measure_time = false;
  OracleBounds oracle_bounds;
};

struct ExperimentResult {
  std::vector<MetricsReport> reports;
  // Scenario and solutions of the last timestep.
  Scenario final_scenario;
  int final_timestep = 0;
  std::vector<MethodSolution> final_solutions;
};

// Thrown when a verifier rejects a heuristic's output during a run.
class VerificationFailure : public std::runtime_error {
 public:
  VerificationFailure(const std::string& method, int timestep,
                      ViolationReport report);
  const ViolationReport& report() const { return report_; }

 private:
  ViolationReport report_;
};

// Timestep 0 solves `s` as given; step t > 0 first applies mobility step t.
// Stage-2 and stage-3 methods are fed VEXA's stage-1 output of the same step,
// and each stage-2 method chains its own placement across steps.
ExperimentResult RunExperiment(const Scenario& s,
                               const std::vector<std::string>& methods,
                               int timesteps,
                               const ExperimentOptions& opts = {});

// Fixed column order used by the CSV writer.
const std::vector<std::string>& MetricColumns();

std::string EmitCsv(const std::vector<MetricsReport>& reports);
std::string EmitJson(const std::vector<MetricsReport>& reports);
// Reads either format back. Throws std::invalid_argument on malformed input.
std::vector<MetricsReport> ParseReports(const std::string& text);

}  // namespace vrcg

#endif  // VRCG_METRICS_H_
