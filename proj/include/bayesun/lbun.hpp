#pragma once

#include <optional>
#include <vector>

#include "bayesun/dataset.hpp"
#include "bayesun/gaussian.hpp"
#include "bayesun/mlp.hpp"
#include "bayesun/optim.hpp"
#include "bayesun/pathology.hpp"

namespace bayesun::lbun {

struct ClampMode {
  bool enabled = false;   ///< false: report_only
  double epsilon = 1e-8;  ///< precision floor when enabled
};

/// Retention-weighted Laplace unlearning settings.
///
/// The optimizer defaults skip the first-order phase and run damped Newton steps only:
/// the retention term is stiff (posterior precisions reach 1e6 on the sine task) and Adam's
/// fixed-size first steps would leave the starting mode even when retention dominates.
struct LbunConfig {
  double lambda = 1.0;
  OptimizerConfig optimizer = default_optimizer();
  ClampMode clamp;
  double objective_bound = 1e8;

  static OptimizerConfig default_optimizer() {
    OptimizerConfig c;
    c.iterations = 0;
    c.polish_iterations = 1000;
    return c;
  }
  void validate() const;
};

/// -log p(D_del | theta) + lambda log q_all(theta); writes its gradient into `grad`.
double objective(const MlpArchitecture& arch, const DiagGaussian& q_all, const Dataset& del_data,
                 double lambda, const Vector& theta, Vector& grad);

struct ModeResult {
  Vector theta;
  std::vector<double> trace;
  double final_grad_norm = 0.0;
  /// UNBOUNDED_FORGETTING when the objective crossed objective_bound.
  std::optional<PathologyReport> failure;
};

/// Ascends the objective from q_all.mean(). Throws OptimizationError on non-finite values.
ModeResult optimize_mode(const MlpArchitecture& arch, const DiagGaussian& q_all,
                         const Dataset& del_data, const LbunConfig& cfg);

struct LbunPosterior {
  NaturalGaussian natural;           ///< lambda / q_all.var - GGN_del, before any clamping
  DefinitenessClass definiteness;
  std::optional<DiagGaussian> posterior;
  PathologyReport report;
};

/// Gaussian around theta_lbun with diagonal precision lambda / q_all.var - diag GGN(D_del).
///
/// The GGN stands in for -Hessian of log p(D_del | theta), hence the subtraction. Non-PD
/// precisions are returned as natural parameters only (report_only) or floored (clamp).
LbunPosterior build_posterior(const MlpArchitecture& arch, const DiagGaussian& q_all,
                              const Vector& theta_lbun, const Dataset& del_data,
                              const LbunConfig& cfg);

struct LbunResult {
  ModeResult mode;
  LbunPosterior posterior;
};

/// optimize_mode followed by build_posterior. A divergent mode yields an
/// UNBOUNDED_FORGETTING report and no Gaussian.
LbunResult unlearn(const MlpArchitecture& arch, const DiagGaussian& q_all, const Dataset& del_data,
                   const LbunConfig& cfg);

}  // namespace bayesun::lbun
