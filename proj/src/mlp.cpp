#include "bayesun/mlp.hpp"

#include "bayesun/kernels.hpp"

namespace bayesun {

void MlpArchitecture::check(std::span<const double> theta) const {
  if (hidden_units < 0) throw std::invalid_argument("MlpArchitecture: negative hidden_units");
  if (static_cast<Eigen::Index>(theta.size()) != param_count()) {
    throw DimensionError("MLP: parameter vector has length " + std::to_string(theta.size()) +
                         ", architecture expects " + std::to_string(param_count()));
  }
}

double forward(const MlpArchitecture& arch, std::span<const double> theta, double x) {
  arch.check(theta);
  return kernels::detail::point_forward(arch.hidden_units, theta.data(), x);
}

Vector jacobian(const MlpArchitecture& arch, std::span<const double> theta, double x) {
  arch.check(theta);
  Vector jac(arch.param_count());
  kernels::detail::point_jacobian(arch.hidden_units, theta.data(), x, jac.data());
  return jac;
}

LoglikGrad loglik_and_grad(const MlpArchitecture& arch, std::span<const double> theta,
                           const Dataset& data, Exec exec) {
  return exec == Exec::serial ? kernels::serial::loglik_and_grad(arch, theta, data)
                              : kernels::omp::loglik_and_grad(arch, theta, data);
}

Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& point,
                   double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("fd_gradient: epsilon must be positive");
  Vector grad(point.size());
  Vector probe = point;
  for (Eigen::Index i = 0; i < point.size(); ++i) {
    probe[i] = point[i] + epsilon;
    const double up = f(probe);
    probe[i] = point[i] - epsilon;
    const double down = f(probe);
    probe[i] = point[i];
    grad[i] = (up - down) / (2.0 * epsilon);
  }
  return grad;
}

}  // namespace bayesun
