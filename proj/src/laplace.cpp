#include "bayesun/laplace.hpp"

#include <cmath>

#include "bayesun/kernels.hpp"
#include "bayesun/rng.hpp"

namespace bayesun::laplace {

MapResult train_map(const MlpArchitecture& arch, const Dataset& data, double prior_precision,
                    const OptimizerConfig& cfg, std::optional<Vector> init) {
  cfg.validate();
  if (!(prior_precision > 0.0)) throw std::invalid_argument("train_map: prior_precision must be > 0");
  const auto p = arch.param_count();
  Vector theta0;
  if (init) {
    arch.check(as_span(*init));
    theta0 = *init;
  } else {
    Rng rng(cfg.seed);
    theta0.resize(p);
    for (Eigen::Index i = 0; i < p; ++i) theta0[i] = cfg.init_scale * rng.normal();
  }

  Objective objective = [&](const Vector& theta, Vector& grad, int) {
    double value = -0.5 * prior_precision * theta.squaredNorm();
    grad = -prior_precision * theta;
    if (!data.empty()) {
      auto lg = loglik_and_grad(arch, as_span(theta), data);
      value += lg.loglik;
      grad += lg.grad;
    }
    return value;
  };

  auto first = gradient_ascent(objective, std::move(theta0), cfg);
  MapResult out{first.x, first.final_value, first.final_grad_norm, std::move(first.trace)};
  if (cfg.polish_iterations > 0) {
    Curvature curvature = [&](const Vector& theta) {
      Matrix c = data.empty() ? Matrix::Zero(p, p) : ggn_full(arch, as_span(theta), data);
      c.diagonal().array() += prior_precision;
      return c;
    };
    auto polish = levenberg_marquardt(objective, curvature, out.theta, cfg.polish_iterations);
    out.theta = polish.x;
    out.objective = polish.final_value;
    out.final_grad_norm = polish.final_grad_norm;
    out.trace.insert(out.trace.end(), polish.trace.begin() + 1, polish.trace.end());
  }
  return out;
}

Vector ggn_diagonal(const MlpArchitecture& arch, std::span<const double> theta, const Dataset& data,
                    Exec exec) {
  if (data.empty()) {
    arch.check(theta);
    return Vector::Zero(arch.param_count());
  }
  return kernels::ggn_diagonal(arch, theta, data, exec);
}

Matrix ggn_full(const MlpArchitecture& arch, std::span<const double> theta, const Dataset& data,
                Exec exec) {
  const auto p = arch.param_count();
  if (data.empty()) {
    arch.check(theta);
    return Matrix::Zero(p, p);
  }
  data.require_positive_sigma();
  const Matrix jac = kernels::jacobian_rows(arch, theta, data.x, exec);
  Matrix g = jac.transpose() * jac / (data.sigma * data.sigma);
  return 0.5 * (g + g.transpose());
}

LaplaceFit fit_laplace(const MlpArchitecture& arch, const Dataset& data, double prior_precision,
                       const OptimizerConfig& cfg) {
  auto map = train_map(arch, data, prior_precision, cfg);
  const Vector ggn = ggn_diagonal(arch, as_span(map.theta), data);
  Vector prec = ggn.array() + prior_precision;
  DiagGaussian post(map.theta, prec.cwiseInverse());
  return {map.theta, std::move(post), std::move(map)};
}

PredictiveTable predict(const MlpArchitecture& arch, const DiagGaussian& posterior,
                        const std::vector<double>& x_grid, double sigma, const PredictMode& mode,
                        Exec exec) {
  if (posterior.dim() != arch.param_count()) throw DimensionError("predict: posterior dimension");
  PredictiveTable t;
  t.x = x_grid;
  const auto g = x_grid.size();
  t.mean.resize(g);
  t.std_epistemic.resize(g);
  t.std_total.resize(g);
  const double noise_var = sigma * sigma;

  if (const auto* mc = std::get_if<McMode>(&mode)) {
    if (mc->samples < 2) throw std::invalid_argument("predict: mc mode needs at least 2 samples");
    const Matrix thetas = sample(posterior, mc->seed, mc->samples);
    const Matrix f = kernels::forward_samples(arch, thetas, x_grid, exec);
    const double s = static_cast<double>(mc->samples);
    for (std::size_t j = 0; j < g; ++j) {
      const auto col = static_cast<Eigen::Index>(j);
      double sum = 0.0;
      for (Eigen::Index r = 0; r < f.rows(); ++r) sum += f(r, col);
      const double mean = sum / s;
      double ss = 0.0;
      for (Eigen::Index r = 0; r < f.rows(); ++r) ss += (f(r, col) - mean) * (f(r, col) - mean);
      const double var = ss / (s - 1.0);
      t.mean[j] = mean;
      t.std_epistemic[j] = std::sqrt(var);
      t.std_total[j] = std::sqrt(var + noise_var);
    }
  } else {
    const auto& lin = std::get<LinearizedMode>(mode);
    arch.check(as_span(lin.theta_map));
    const Matrix jac = kernels::jacobian_rows(arch, as_span(lin.theta_map), x_grid, exec);
    for (std::size_t j = 0; j < g; ++j) {
      const auto row = static_cast<Eigen::Index>(j);
      const double var = jac.row(row).cwiseAbs2().dot(posterior.var());
      t.mean[j] = forward(arch, as_span(lin.theta_map), x_grid[j]);
      t.std_epistemic[j] = std::sqrt(var);
      t.std_total[j] = std::sqrt(var + noise_var);
    }
  }
  return t;
}

}  // namespace bayesun::laplace
