#ifndef VRCG_VIOLATIONS_H_
#define VRCG_VIOLATIONS_H_

#include <stdexcept>
#include <string>
#include <vector>

namespace vrcg {

// A broken constraint found by a verifier.
struct Violation {
  std::string constraint;
  std::string entity;
  std::string detail;
};

using ViolationReport = std::vector<Violation>;

std::string Describe(const Violation& v);
std::string Describe(const ViolationReport& r);

// A solver input that admits no feasible output, e.g. PRB demand above what a
// base station can schedule in the window.
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(std::string entity, const std::string& what)
      : std::runtime_error(entity + ": " + what), entity_(std::move(entity)) {}

  const std::string& entity() const { return entity_; }

 private:
  std::string entity_;
};

}  // namespace vrcg

#endif  // VRCG_VIOLATIONS_H_
