#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bayesun/dataset.hpp"
#include "bayesun/gaussian.hpp"
#include "bayesun/mlp.hpp"
#include "bayesun/optim.hpp"
#include "bayesun/vi.hpp"

namespace bayesun::vbun {

/// Which parameter samples lose their forgetting gradient.
///
/// suppress_low_density drops samples with q_all(theta) < lambda_V * q_all(mode), i.e. tail
/// samples. suppress_high_density reverses the comparison.
enum class GateDirection { suppress_low_density, suppress_high_density };

std::string to_string(GateDirection g);
GateDirection parse_gate_direction(const std::string& s);

struct VbunConfig {
  double lambda = 0.5;
  int samples = 8;
  int report_samples = 1000;
  OptimizerConfig optimizer = default_optimizer();
  GateDirection gate = GateDirection::suppress_low_density;

  static OptimizerConfig default_optimizer() {
    OptimizerConfig c;
    c.step_size = 1e-3;
    c.iterations = 10000;
    c.polish_iterations = 0;
    return c;
  }
  void validate() const;
};

/// log q_all(theta) - log q_all(mode) = -1/2 sum (theta - mu)^2 / var.
double log_density_ratio(const DiagGaussian& q_all, const Vector& theta);

struct GateResult {
  double value = 0.0;  ///< log p(D_del | theta), reported whether or not the gate is active
  bool active = true;
  double log_ratio = 0.0;
};

GateResult gated_loglik(const MlpArchitecture& arch, const Vector& theta, const Dataset& del_data,
                        const DiagGaussian& q_all, const VbunConfig& cfg);

struct EuboEstimate {
  double value = 0.0;      ///< MC E_q[log p(D_del|theta)] + KL(q || q_all)
  double surrogate = 0.0;  ///< same with suppressed samples contributing zero; its gradient is `grad_*`
  double expected = 0.0;
  double kl = 0.0;
  double std_error = 0.0;
  int active_samples = 0;
  std::vector<bool> gate_pattern;
  Vector grad_mean;
  Vector grad_log_std;
};

EuboEstimate eubo_with_noise(const MlpArchitecture& arch, const vi::VariationalParams& psi,
                             const Dataset& del_data, const DiagGaussian& q_all,
                             const VbunConfig& cfg, const Matrix& noise, Exec exec = Exec::parallel);

/// cfg.samples reparameterized draws from Rng(seed).
EuboEstimate eubo_and_grad(const MlpArchitecture& arch, const vi::VariationalParams& psi,
                           const Dataset& del_data, const DiagGaussian& q_all,
                           const VbunConfig& cfg, std::uint64_t seed, Exec exec = Exec::parallel);

struct VbunResult {
  DiagGaussian posterior;
  std::vector<double> eubo_trace;
  EuboEstimate final_eubo;  ///< with cfg.report_samples
};

/// EUBO descent from psi0 = (q_all.mean, 1/2 log q_all.var).
VbunResult train_vbun(const MlpArchitecture& arch, const DiagGaussian& q_all, const Dataset& del_data,
                      const VbunConfig& cfg);

}  // namespace bayesun::vbun
