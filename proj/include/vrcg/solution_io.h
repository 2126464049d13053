#ifndef VRCG_SOLUTION_IO_H_
#define VRCG_SOLUTION_IO_H_

#include <string>
#include <vector>

#include "vrcg/metrics.h"

namespace vrcg {

// Solutions of one timestep. The scenario state is not embedded: readers
// replay mobility from the scenario file up to `timestep`.
struct SolutionDocument {
  int timestep = 0;
  std::vector<MethodSolution> solutions;
};

// Stage-3 schedules are written as [bs, tti, user, prbs] quadruples.
std::string SolutionsToJson(const SolutionDocument& doc);
// Throws std::invalid_argument on malformed input; shapes are checked against
// `s` so verifiers can index safely.
SolutionDocument ParseSolutions(const std::string& text, const Scenario& s);

// Reads only the timestep field, so the matching scenario can be rebuilt
// before the full parse.
int SolutionTimestep(const std::string& text);

// Scenario state at `timestep`, replaying mobility steps 1..timestep.
Scenario ScenarioAt(const Scenario& s, int timestep);

}  // namespace vrcg

#endif  // VRCG_SOLUTION_IO_H_
