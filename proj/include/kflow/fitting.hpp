#pragma once

#include <utility>
#include <vector>

namespace kflow {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

LineFit linear_fit(const std::vector<std::pair<double, double>>& points);

}  // namespace kflow
