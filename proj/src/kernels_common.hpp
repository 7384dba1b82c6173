#pragma once

#include "bayesun/kernels.hpp"

namespace bayesun::kernels::detail {

struct NoiseConsts {
  double inv_var;
  double log_norm;  // -0.5 log(2 pi) - log(sigma)

  explicit NoiseConsts(double sigma)
      : inv_var(1.0 / (sigma * sigma)), log_norm(-0.9189385332046727418 - std::log(sigma)) {}
};

/// Accumulates one point's log-likelihood term and gradient contribution.
inline void add_loglik_point(LoglikGrad& acc, const NoiseConsts& c, double y, double f,
                             const double* jac) {
  const double r = y - f;
  acc.loglik += c.log_norm - 0.5 * r * r * c.inv_var;
  const double coef = r * c.inv_var;
  for (Eigen::Index i = 0; i < acc.grad.size(); ++i) acc.grad[i] += coef * jac[i];
}

inline void add_ggn_point(Vector& acc, const double* jac) {
  for (Eigen::Index i = 0; i < acc.size(); ++i) acc[i] += jac[i] * jac[i];
}

}  // namespace bayesun::kernels::detail
