#pragma once

#include <string>

#include "bayesun/dataset.hpp"
#include "bayesun/predictive.hpp"

namespace bayesun::io {

/// Header x,mean,std_epistemic,std_total; one row per grid point in grid order.
std::string predictive_csv(const PredictiveTable& t);
PredictiveTable parse_predictive_csv(const std::string& text, const std::string& origin = "<string>");

/// Mean line, shaded +/- 2 total std band and an optional data scatter.
std::string predictive_svg(const PredictiveTable& t, const Dataset* data, const std::string& title);

}  // namespace bayesun::io
