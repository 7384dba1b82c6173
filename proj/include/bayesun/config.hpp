#pragma once

#include <string>
#include <vector>

#include "bayesun/experiment.hpp"

namespace bayesun::io {

/// Everything a command may need, with defaults; a YAML file overrides any subset.
struct RunConfig {
  experiment::Scenario scenario;
  lbun::LbunConfig lbun;
  vbun::VbunConfig vbun;
  std::vector<double> lbun_lambdas = experiment::UnlearnerConfig::default_lambdas(experiment::UnlearnerKind::lbun);
  std::vector<double> vbun_lambdas = experiment::UnlearnerConfig::default_lambdas(experiment::UnlearnerKind::vbun);
};

/// Applies the YAML document in `text` on top of `base`. Unknown keys are errors.
RunConfig apply_config(RunConfig base, const std::string& text, const std::string& origin);
RunConfig load_config(const std::string& path, RunConfig base = {});

}  // namespace bayesun::io
