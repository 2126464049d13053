#include "vrcg/violations.h"

namespace vrcg {

std::string Describe(const Violation& v) {
  return v.constraint + " @ " + v.entity + ": " + v.detail;
}

std::string Describe(const ViolationReport& r) {
  std::string out;
  for (const Violation& v : r) out += Describe(v) + "\n";
  return out;
}

}  // namespace vrcg
