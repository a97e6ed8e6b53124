#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tdefumi/evaluation.hpp"

namespace tdefumi {

struct NamedCurve {
  std::string name;
  std::vector<RocPoint> points;
};

// Static ROC overlay: FAR on x, PD on y, both axes 0 to 1, one polyline and
// legend entry per curve. Output depends only on the inputs.
void write_roc_svg(std::ostream& os, const std::vector<NamedCurve>& curves, const std::string& title = "ROC");

}  // namespace tdefumi
