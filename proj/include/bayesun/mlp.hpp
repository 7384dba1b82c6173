#pragma once

#include <functional>
#include <span>

#include "bayesun/dataset.hpp"
#include "bayesun/gaussian.hpp"

namespace bayesun {

/// Selects the serial reference kernels or the OpenMP ones. Both produce identical bits.
enum class Exec { serial, parallel };

/// Fixed 1 -> H -> 1 tanh network.
///
/// Parameter layout for H > 0: W1 (H), b1 (H), W2 (H), b2 (1), so P = 3H + 1.
/// H == 0 is the linear model f(x) = w x + b with layout (w, b).
struct MlpArchitecture {
  int hidden_units = 50;

  [[nodiscard]] Eigen::Index param_count() const {
    return hidden_units == 0 ? 2 : 3 * static_cast<Eigen::Index>(hidden_units) + 1;
  }
  void check(std::span<const double> theta) const;
};

inline std::span<const double> as_span(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

double forward(const MlpArchitecture& arch, std::span<const double> theta, double x);

/// df(x)/dtheta.
Vector jacobian(const MlpArchitecture& arch, std::span<const double> theta, double x);

struct LoglikGrad {
  double loglik = 0.0;
  Vector grad;
};

/// Gaussian log-likelihood sum_n log N(y_n; f(x_n), sigma^2) and its gradient in theta.
LoglikGrad loglik_and_grad(const MlpArchitecture& arch, std::span<const double> theta,
                           const Dataset& data, Exec exec = Exec::parallel);

/// Central differences (f(p + e_i eps) - f(p - e_i eps)) / (2 eps).
Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& point,
                   double epsilon);

}  // namespace bayesun
