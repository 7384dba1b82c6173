#pragma once

#include <cstdint>
#include <vector>

#include "bayesun/dataset.hpp"
#include "bayesun/gaussian.hpp"
#include "bayesun/mlp.hpp"
#include "bayesun/optim.hpp"

namespace bayesun::vi {

/// Mean-field variational parameters; the induced variance is exp(2 log_std).
struct VariationalParams {
  Vector mean;
  Vector log_std;

  static VariationalParams from_gaussian(const DiagGaussian& g);
  [[nodiscard]] DiagGaussian to_gaussian() const;
  [[nodiscard]] Eigen::Index dim() const { return mean.size(); }
};

struct ObjectiveEstimate {
  double value = 0.0;       ///< reconstruction +/- KL
  double expected = 0.0;    ///< MC average of the likelihood term
  double kl = 0.0;          ///< closed-form KL term
  double std_error = 0.0;   ///< MC standard error of the likelihood average (0 when S == 1)
  Vector grad_mean;
  Vector grad_log_std;
};

/// Reparameterized ELBO estimate E_q[log p(D|theta)] - KL(q || prior) with S samples drawn
/// from Rng(seed); the gradient is the exact pathwise gradient of this estimator.
ObjectiveEstimate elbo_and_grad(const MlpArchitecture& arch, const VariationalParams& psi,
                                const Dataset& data, const DiagGaussian& prior, int samples,
                                std::uint64_t seed, Exec exec = Exec::parallel);

/// Same estimator with caller-supplied standard-normal noise (S x P).
ObjectiveEstimate elbo_with_noise(const MlpArchitecture& arch, const VariationalParams& psi,
                                  const Dataset& data, const DiagGaussian& prior, const Matrix& noise,
                                  Exec exec = Exec::parallel);

/// Gradient of KL(q || p) with respect to (mean, log_std) of q.
void kl_gradient(const VariationalParams& q, const DiagGaussian& p, Vector& grad_mean,
                 Vector& grad_log_std);

struct ViOptions {
  int train_samples = 8;
  int report_samples = 1000;
  int warm_start_iterations = 500;
  double init_log_std = -3.0;
};

struct ViResult {
  DiagGaussian posterior;
  std::vector<double> elbo_trace;
  ObjectiveEstimate final_elbo;  ///< evaluated with report_samples
};

/// Stochastic ELBO ascent; mean initialized from a short MAP warm start under `prior`.
/// Throws OptimizationError when the ELBO turns non-finite.
ViResult train_vi(const MlpArchitecture& arch, const Dataset& data, const DiagGaussian& prior,
                  const OptimizerConfig& cfg, const ViOptions& opts = {});

}  // namespace bayesun::vi
