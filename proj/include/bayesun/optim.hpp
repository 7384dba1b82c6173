#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bayesun/gaussian.hpp"

namespace bayesun {

enum class OptimizerKind { adam, momentum };

std::string to_string(OptimizerKind k);
OptimizerKind parse_optimizer_kind(const std::string& s);

/// Settings for the full-batch first-order loop plus an optional curvature polish.
struct OptimizerConfig {
  double step_size = 1e-2;
  int iterations = 20000;
  double momentum = 0.9;  ///< heavy-ball coefficient, or Adam's first-moment decay
  double init_scale = 0.1;
  std::uint64_t seed = 0;
  OptimizerKind kind = OptimizerKind::adam;
  /// Step size at the last iteration as a fraction of step_size (cosine schedule); 1 = constant.
  double final_step_fraction = 1.0;
  /// Levenberg-Marquardt iterations after the first-order phase; 0 disables it.
  int polish_iterations = 200;

  void validate() const;
};

class OptimizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Objective to maximize: returns the value and writes the gradient. `iteration` lets
/// stochastic objectives draw fresh noise per step.
using Objective = std::function<double(const Vector& x, Vector& grad, int iteration)>;
/// Positive semi-definite model of the negative Hessian at x.
using Curvature = std::function<Matrix(const Vector& x)>;

enum class AscentStatus { completed, bound_exceeded };

struct AscentResult {
  Vector x;
  std::vector<double> trace;  ///< objective value at every evaluated iterate
  double final_value = 0.0;
  double final_grad_norm = 0.0;
  AscentStatus status = AscentStatus::completed;
  int iterations_run = 0;
};

/// First-order ascent. Throws OptimizationError on a non-finite value or gradient.
/// Stops with bound_exceeded when the value exceeds `value_bound`.
AscentResult gradient_ascent(const Objective& objective, Vector x0, const OptimizerConfig& cfg,
                             std::optional<double> value_bound = std::nullopt);

/// Damped Newton ascent (x += (C + mu I)^{-1} g, accepted only when the value increases).
/// `objective` must be deterministic; it is always called with iteration 0.
AscentResult levenberg_marquardt(const Objective& objective, const Curvature& curvature, Vector x0,
                                 int max_iterations, std::optional<double> value_bound = std::nullopt);

}  // namespace bayesun
