#include <vector>

#include "kernels_common.hpp"

namespace bayesun::kernels::omp {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Per-point outputs and Jacobian rows, filled in parallel.
void fill_points(const MlpArchitecture& arch, std::span<const double> theta,
                 std::span<const double> xs, std::vector<double>& f, RowMatrix& jac) {
  const auto p = arch.param_count();
  const auto n = static_cast<std::ptrdiff_t>(xs.size());
  f.assign(xs.size(), 0.0);
  jac.resize(n, p);
  double* jac_data = jac.data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    f[static_cast<std::size_t>(i)] =
        detail::point_jacobian(arch.hidden_units, theta.data(), xs[static_cast<std::size_t>(i)],
                               jac_data + i * p);
  }
}

}  // namespace

LoglikGrad loglik_and_grad(const MlpArchitecture& arch, std::span<const double> theta,
                           const Dataset& data) {
  arch.check(theta);
  data.require_positive_sigma();
  const auto p = arch.param_count();
  std::vector<double> f;
  RowMatrix jac;
  fill_points(arch, theta, data.x, f, jac);
  const detail::NoiseConsts c(data.sigma);
  LoglikGrad acc{0.0, Vector::Zero(p)};
  for (std::size_t n = 0; n < data.size(); ++n) {
    detail::add_loglik_point(acc, c, data.y[n], f[n], jac.data() + static_cast<Eigen::Index>(n) * p);
  }
  return acc;
}

Vector ggn_diagonal(const MlpArchitecture& arch, std::span<const double> theta, const Dataset& data) {
  arch.check(theta);
  data.require_positive_sigma();
  const auto p = arch.param_count();
  std::vector<double> f;
  RowMatrix jac;
  fill_points(arch, theta, data.x, f, jac);
  Vector acc = Vector::Zero(p);
  for (std::size_t n = 0; n < data.size(); ++n) {
    detail::add_ggn_point(acc, jac.data() + static_cast<Eigen::Index>(n) * p);
  }
  return acc / (data.sigma * data.sigma);
}

Matrix jacobian_rows(const MlpArchitecture& arch, std::span<const double> theta,
                     std::span<const double> xs) {
  arch.check(theta);
  std::vector<double> f;
  RowMatrix jac;
  fill_points(arch, theta, xs, f, jac);
  return jac;
}

Matrix forward_samples(const MlpArchitecture& arch, const Matrix& thetas, std::span<const double> grid) {
  if (thetas.cols() != arch.param_count()) throw DimensionError("forward_samples: parameter width");
  const RowMatrix rows = thetas;
  const auto s_count = static_cast<std::ptrdiff_t>(rows.rows());
  const auto g_count = static_cast<Eigen::Index>(grid.size());
  Matrix out(rows.rows(), g_count);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t s = 0; s < s_count; ++s) {
    for (Eigen::Index g = 0; g < g_count; ++g) {
      out(s, g) = detail::point_forward(arch.hidden_units, rows.data() + s * rows.cols(),
                                        grid[static_cast<std::size_t>(g)]);
    }
  }
  return out;
}

}  // namespace bayesun::kernels::omp
