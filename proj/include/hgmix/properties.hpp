#pragma once

#include <string>
#include <vector>

namespace hgmix {

struct PropertyResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;   // measured error or statistic
  double threshold = 0.0;
  std::string detail;
};

// Cross-module identity checks that need no dataset: mixture reconstruction,
// calibrative r-invariance, classifier verdicts vs direct signs, hierarchy
// specializations, tail classification, density normalizations.
std::vector<PropertyResult> run_property_suite();

}  // namespace hgmix
