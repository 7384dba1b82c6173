#include <vector>

#include "kernels_common.hpp"

namespace bayesun::kernels::serial {

LoglikGrad loglik_and_grad(const MlpArchitecture& arch, std::span<const double> theta,
                           const Dataset& data) {
  arch.check(theta);
  data.require_positive_sigma();
  const auto p = arch.param_count();
  const detail::NoiseConsts c(data.sigma);
  LoglikGrad acc{0.0, Vector::Zero(p)};
  std::vector<double> jac(static_cast<std::size_t>(p));
  for (std::size_t n = 0; n < data.size(); ++n) {
    const double f = detail::point_jacobian(arch.hidden_units, theta.data(), data.x[n], jac.data());
    detail::add_loglik_point(acc, c, data.y[n], f, jac.data());
  }
  return acc;
}

Vector ggn_diagonal(const MlpArchitecture& arch, std::span<const double> theta, const Dataset& data) {
  arch.check(theta);
  data.require_positive_sigma();
  const auto p = arch.param_count();
  Vector acc = Vector::Zero(p);
  std::vector<double> jac(static_cast<std::size_t>(p));
  for (std::size_t n = 0; n < data.size(); ++n) {
    detail::point_jacobian(arch.hidden_units, theta.data(), data.x[n], jac.data());
    detail::add_ggn_point(acc, jac.data());
  }
  return acc / (data.sigma * data.sigma);
}

Matrix jacobian_rows(const MlpArchitecture& arch, std::span<const double> theta,
                     std::span<const double> xs) {
  arch.check(theta);
  const auto p = arch.param_count();
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> out(
      static_cast<Eigen::Index>(xs.size()), p);
  for (std::size_t n = 0; n < xs.size(); ++n) {
    detail::point_jacobian(arch.hidden_units, theta.data(), xs[n],
                           out.data() + static_cast<Eigen::Index>(n) * p);
  }
  return out;
}

Matrix forward_samples(const MlpArchitecture& arch, const Matrix& thetas, std::span<const double> grid) {
  if (thetas.cols() != arch.param_count()) throw DimensionError("forward_samples: parameter width");
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = thetas;
  Matrix out(thetas.rows(), static_cast<Eigen::Index>(grid.size()));
  for (Eigen::Index s = 0; s < rows.rows(); ++s) {
    for (std::size_t g = 0; g < grid.size(); ++g) {
      out(s, static_cast<Eigen::Index>(g)) =
          detail::point_forward(arch.hidden_units, rows.data() + s * rows.cols(), grid[g]);
    }
  }
  return out;
}

}  // namespace bayesun::kernels::serial
