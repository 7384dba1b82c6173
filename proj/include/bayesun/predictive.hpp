#pragma once

#include <vector>

namespace bayesun {

/// Per-grid-point predictive summary; rows follow grid order.
struct PredictiveTable {
  std::vector<double> x;
  std::vector<double> mean;
  std::vector<double> std_epistemic;
  std::vector<double> std_total;
};

}  // namespace bayesun
