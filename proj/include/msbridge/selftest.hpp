#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace msb {

struct SelfCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Reduced invariant suite over seeded random instances and the built-in
/// two-by-three fixture.
std::vector<SelfCheck> run_selftest(std::uint64_t seed);

}  // namespace msb
