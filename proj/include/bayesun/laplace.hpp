#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "bayesun/dataset.hpp"
#include "bayesun/gaussian.hpp"
#include "bayesun/mlp.hpp"
#include "bayesun/optim.hpp"
#include "bayesun/predictive.hpp"

namespace bayesun::laplace {

struct MapResult {
  Vector theta;
  double objective = 0.0;  ///< log p(D|theta) - prior_precision/2 |theta|^2
  double final_grad_norm = 0.0;
  std::vector<double> trace;
};

/// MAP estimate under an isotropic zero-mean Gaussian prior.
///
/// Runs cfg.iterations first-order steps from N(0, init_scale^2) (or `init`), then up to
/// cfg.polish_iterations Levenberg-Marquardt steps on the full Gauss-Newton curvature.
/// Deterministic in cfg.seed. Throws OptimizationError on non-finite loss.
MapResult train_map(const MlpArchitecture& arch, const Dataset& data, double prior_precision,
                    const OptimizerConfig& cfg, std::optional<Vector> init = std::nullopt);

/// diag(sum_n J_n J_n^T) / sigma^2.
Vector ggn_diagonal(const MlpArchitecture& arch, std::span<const double> theta, const Dataset& data,
                    Exec exec = Exec::parallel);

/// Dense sum_n J_n J_n^T / sigma^2.
Matrix ggn_full(const MlpArchitecture& arch, std::span<const double> theta, const Dataset& data,
                Exec exec = Exec::parallel);

struct LaplaceFit {
  Vector theta_map;
  DiagGaussian posterior;
  MapResult map;
};

/// Diagonal Laplace posterior: mean theta_MAP, precision prior_precision + GGN diagonal.
LaplaceFit fit_laplace(const MlpArchitecture& arch, const Dataset& data, double prior_precision,
                       const OptimizerConfig& cfg);

struct McMode {
  int samples = 1000;
  std::uint64_t seed = 0;
};
struct LinearizedMode {
  Vector theta_map;
};
using PredictMode = std::variant<McMode, LinearizedMode>;

/// Predictive mean and spread of f under a diagonal parameter posterior.
PredictiveTable predict(const MlpArchitecture& arch, const DiagGaussian& posterior,
                        const std::vector<double>& x_grid, double sigma, const PredictMode& mode,
                        Exec exec = Exec::parallel);

}  // namespace bayesun::laplace
