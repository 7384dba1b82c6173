#pragma once

// Data-parallel inner loops of the MLP likelihood machinery.
//
// Every kernel exists twice: `serial` is the reference, `omp` fans the per-point (or
// per-sample) work out with OpenMP into per-item buffers and then reduces them in index
// order. The reduction arithmetic is shared, so both paths agree bit-for-bit.

#include <cmath>
#include <span>

#include "bayesun/mlp.hpp"

namespace bayesun::kernels {

namespace detail {

/// Writes df(x)/dtheta into jac (length P) and returns f(x).
inline double point_jacobian(int hidden, const double* theta, double x, double* jac) {
  if (hidden == 0) {
    jac[0] = x;
    jac[1] = 1.0;
    return theta[0] * x + theta[1];
  }
  const double* w1 = theta;
  const double* b1 = theta + hidden;
  const double* w2 = theta + 2 * hidden;
  const double b2 = theta[3 * hidden];
  double f = b2;
  for (int j = 0; j < hidden; ++j) {
    const double t = std::tanh(w1[j] * x + b1[j]);
    const double back = w2[j] * (1.0 - t * t);
    jac[j] = back * x;
    jac[hidden + j] = back;
    jac[2 * hidden + j] = t;
    f += w2[j] * t;
  }
  jac[3 * hidden] = 1.0;
  return f;
}

inline double point_forward(int hidden, const double* theta, double x) {
  if (hidden == 0) return theta[0] * x + theta[1];
  double f = theta[3 * hidden];
  for (int j = 0; j < hidden; ++j) f += theta[2 * hidden + j] * std::tanh(theta[j] * x + theta[hidden + j]);
  return f;
}

}  // namespace detail

namespace serial {
LoglikGrad loglik_and_grad(const MlpArchitecture& arch, std::span<const double> theta,
                           const Dataset& data);
Vector ggn_diagonal(const MlpArchitecture& arch, std::span<const double> theta, const Dataset& data);
/// N x P matrix of per-point Jacobians.
Matrix jacobian_rows(const MlpArchitecture& arch, std::span<const double> theta,
                     std::span<const double> xs);
/// S x G network outputs for S parameter rows over a grid.
Matrix forward_samples(const MlpArchitecture& arch, const Matrix& thetas, std::span<const double> grid);
}  // namespace serial

namespace omp {
LoglikGrad loglik_and_grad(const MlpArchitecture& arch, std::span<const double> theta,
                           const Dataset& data);
Vector ggn_diagonal(const MlpArchitecture& arch, std::span<const double> theta, const Dataset& data);
Matrix jacobian_rows(const MlpArchitecture& arch, std::span<const double> theta,
                     std::span<const double> xs);
Matrix forward_samples(const MlpArchitecture& arch, const Matrix& thetas, std::span<const double> grid);
}  // namespace omp

inline Vector ggn_diagonal(const MlpArchitecture& arch, std::span<const double> theta,
                           const Dataset& data, Exec exec = Exec::parallel) {
  return exec == Exec::serial ? serial::ggn_diagonal(arch, theta, data)
                              : omp::ggn_diagonal(arch, theta, data);
}

inline Matrix jacobian_rows(const MlpArchitecture& arch, std::span<const double> theta,
                            std::span<const double> xs, Exec exec = Exec::parallel) {
  return exec == Exec::serial ? serial::jacobian_rows(arch, theta, xs)
                              : omp::jacobian_rows(arch, theta, xs);
}

inline Matrix forward_samples(const MlpArchitecture& arch, const Matrix& thetas,
                              std::span<const double> grid, Exec exec = Exec::parallel) {
  return exec == Exec::serial ? serial::forward_samples(arch, thetas, grid)
                              : omp::forward_samples(arch, thetas, grid);
}

}  // namespace bayesun::kernels
