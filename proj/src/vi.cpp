#include "bayesun/vi.hpp"

#include <cmath>

#include "bayesun/rng.hpp"

namespace bayesun::vi {

VariationalParams VariationalParams::from_gaussian(const DiagGaussian& g) {
  return {g.mean(), Vector(0.5 * g.var().array().log())};
}

DiagGaussian VariationalParams::to_gaussian() const {
  return DiagGaussian(mean, Vector((2.0 * log_std.array()).exp()));
}

void kl_gradient(const VariationalParams& q, const DiagGaussian& p, Vector& grad_mean,
                 Vector& grad_log_std) {
  grad_mean = (q.mean - p.mean()).cwiseQuotient(p.var());
  grad_log_std = (2.0 * q.log_std.array()).exp().matrix().cwiseQuotient(p.var()).array() - 1.0;
}

ObjectiveEstimate elbo_with_noise(const MlpArchitecture& arch, const VariationalParams& psi,
                                  const Dataset& data, const DiagGaussian& prior, const Matrix& noise,
                                  Exec exec) {
  const auto p = arch.param_count();
  if (psi.dim() != p || prior.dim() != p || noise.cols() != p) {
    throw DimensionError("elbo: dimension mismatch with architecture");
  }
  const auto s_count = noise.rows();
  if (s_count < 1) throw std::invalid_argument("elbo: need at least one sample");
  const Vector scale = psi.log_std.array().exp();

  ObjectiveEstimate est;
  est.grad_mean = Vector::Zero(p);
  est.grad_log_std = Vector::Zero(p);
  std::vector<double> per_sample(static_cast<std::size_t>(s_count), 0.0);
  if (!data.empty()) {
    Vector theta(p);
    for (Eigen::Index s = 0; s < s_count; ++s) {
      const Vector eps = noise.row(s).transpose();
      theta = psi.mean + scale.cwiseProduct(eps);
      const auto lg = loglik_and_grad(arch, as_span(theta), data, exec);
      per_sample[static_cast<std::size_t>(s)] = lg.loglik;
      est.grad_mean += lg.grad;
      est.grad_log_std += lg.grad.cwiseProduct(eps).cwiseProduct(scale);
    }
  }
  const double inv_s = 1.0 / static_cast<double>(s_count);
  double sum = 0.0;
  for (double v : per_sample) sum += v;
  est.expected = sum * inv_s;
  if (s_count > 1) {
    double ss = 0.0;
    for (double v : per_sample) ss += (v - est.expected) * (v - est.expected);
    est.std_error = std::sqrt(ss / static_cast<double>(s_count - 1) * inv_s);
  }
  est.grad_mean *= inv_s;
  est.grad_log_std *= inv_s;

  est.kl = kl_divergence(psi.to_gaussian(), prior);
  Vector kl_m, kl_ls;
  kl_gradient(psi, prior, kl_m, kl_ls);
  est.value = est.expected - est.kl;
  est.grad_mean -= kl_m;
  est.grad_log_std -= kl_ls;
  return est;
}

namespace {

Matrix draw_noise(std::uint64_t seed, Eigen::Index samples, Eigen::Index p) {
  Rng rng(seed);
  Matrix noise(samples, p);
  for (Eigen::Index s = 0; s < samples; ++s) {
    for (Eigen::Index i = 0; i < p; ++i) noise(s, i) = rng.normal();
  }
  return noise;
}

}  // namespace

ObjectiveEstimate elbo_and_grad(const MlpArchitecture& arch, const VariationalParams& psi,
                                const Dataset& data, const DiagGaussian& prior, int samples,
                                std::uint64_t seed, Exec exec) {
  if (samples < 1) throw std::invalid_argument("elbo_and_grad: S must be >= 1");
  return elbo_with_noise(arch, psi, data, prior, draw_noise(seed, samples, arch.param_count()), exec);
}

ViResult train_vi(const MlpArchitecture& arch, const Dataset& data, const DiagGaussian& prior,
                  const OptimizerConfig& cfg, const ViOptions& opts) {
  cfg.validate();
  const auto p = arch.param_count();
  if (prior.dim() != p) throw DimensionError("train_vi: prior dimension");

  // MAP warm start under the (diagonal) prior.
  Vector mean0(p);
  {
    Rng rng(cfg.seed);
    for (Eigen::Index i = 0; i < p; ++i) mean0[i] = cfg.init_scale * rng.normal();
  }
  if (opts.warm_start_iterations > 0) {
    OptimizerConfig warm = cfg;
    warm.iterations = opts.warm_start_iterations;
    warm.step_size = 1e-2;
    warm.final_step_fraction = 1.0;
    Objective map_obj = [&](const Vector& theta, Vector& grad, int) {
      const Vector d = theta - prior.mean();
      double value = -0.5 * d.cwiseQuotient(prior.var()).dot(d);
      grad = -d.cwiseQuotient(prior.var());
      if (!data.empty()) {
        const auto lg = loglik_and_grad(arch, as_span(theta), data);
        value += lg.loglik;
        grad += lg.grad;
      }
      return value;
    };
    mean0 = gradient_ascent(map_obj, mean0, warm).x;
  }

  Vector psi0(2 * p);
  psi0.head(p) = mean0;
  psi0.tail(p).setConstant(opts.init_log_std);

  Objective elbo_obj = [&](const Vector& packed, Vector& grad, int iteration) {
    const VariationalParams psi{packed.head(p), packed.tail(p)};
    const Matrix noise = draw_noise(derive_seed(cfg.seed, static_cast<std::uint64_t>(iteration) + 1),
                                    opts.train_samples, p);
    const auto est = elbo_with_noise(arch, psi, data, prior, noise);
    grad.resize(2 * p);
    grad.head(p) = est.grad_mean;
    grad.tail(p) = est.grad_log_std;
    return est.value;
  };

  auto run = gradient_ascent(elbo_obj, psi0, cfg);
  const VariationalParams fitted{run.x.head(p), run.x.tail(p)};
  auto final_est = elbo_and_grad(arch, fitted, data, prior, opts.report_samples,
                                 derive_seed(cfg.seed, 0xE1B0ULL));
  return {fitted.to_gaussian(), std::move(run.trace), std::move(final_est)};
}

}  // namespace bayesun::vi
