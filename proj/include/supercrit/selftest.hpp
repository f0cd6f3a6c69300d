#ifndef SUPERCRIT_SELFTEST_HPP
#define SUPERCRIT_SELFTEST_HPP

#include <filesystem>
#include <string>
#include <vector>

namespace supercrit {

struct SelftestCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Fast invariant suite on small grids; scratch receives the determinism runs.
std::vector<SelftestCheck> run_selftest(const std::filesystem::path& scratch);

}  // namespace supercrit

#endif  // SUPERCRIT_SELFTEST_HPP
