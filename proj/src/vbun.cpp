#include "bayesun/vbun.hpp"

#include <algorithm>
#include <cmath>

#include "bayesun/rng.hpp"

namespace bayesun::vbun {

std::string to_string(GateDirection g) {
  return g == GateDirection::suppress_low_density ? "suppress_low_density" : "suppress_high_density";
}

GateDirection parse_gate_direction(const std::string& s) {
  if (s == "suppress_low_density") return GateDirection::suppress_low_density;
  if (s == "suppress_high_density") return GateDirection::suppress_high_density;
  throw std::invalid_argument("unknown gate direction '" + s + "'");
}

void VbunConfig::validate() const {
  if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument("VbunConfig: lambda_V must lie in (0, 1)");
  if (samples < 1) throw std::invalid_argument("VbunConfig: samples must be >= 1");
  if (report_samples < 1) throw std::invalid_argument("VbunConfig: report_samples must be >= 1");
  optimizer.validate();
}

double log_density_ratio(const DiagGaussian& q_all, const Vector& theta) {
  if (theta.size() != q_all.dim()) throw DimensionError("log_density_ratio: dimension");
  const Vector d = theta - q_all.mean();
  return -0.5 * d.cwiseQuotient(q_all.var()).dot(d);
}

namespace {

bool gate_active(double log_ratio, double log_lambda, GateDirection dir) {
  return dir == GateDirection::suppress_low_density ? !(log_ratio < log_lambda)
                                                    : !(log_ratio > log_lambda);
}

}  // namespace

GateResult gated_loglik(const MlpArchitecture& arch, const Vector& theta, const Dataset& del_data,
                        const DiagGaussian& q_all, const VbunConfig& cfg) {
  cfg.validate();
  GateResult r;
  r.log_ratio = log_density_ratio(q_all, theta);
  r.active = gate_active(r.log_ratio, std::log(cfg.lambda), cfg.gate);
  if (!del_data.empty()) r.value = loglik_and_grad(arch, as_span(theta), del_data).loglik;
  return r;
}

EuboEstimate eubo_with_noise(const MlpArchitecture& arch, const vi::VariationalParams& psi,
                             const Dataset& del_data, const DiagGaussian& q_all,
                             const VbunConfig& cfg, const Matrix& noise, Exec exec) {
  const auto p = arch.param_count();
  if (psi.dim() != p || q_all.dim() != p || noise.cols() != p) {
    throw DimensionError("eubo: dimension mismatch with architecture");
  }
  const auto s_count = noise.rows();
  if (s_count < 1) throw std::invalid_argument("eubo: need at least one sample");
  const Vector scale = psi.log_std.array().exp();
  const double log_lambda = std::log(cfg.lambda);

  EuboEstimate est;
  est.grad_mean = Vector::Zero(p);
  est.grad_log_std = Vector::Zero(p);
  est.gate_pattern.assign(static_cast<std::size_t>(s_count), true);
  std::vector<double> per_sample(static_cast<std::size_t>(s_count), 0.0);
  double active_sum = 0.0;
  Vector theta(p);
  for (Eigen::Index s = 0; s < s_count; ++s) {
    const Vector eps = noise.row(s).transpose();
    theta = psi.mean + scale.cwiseProduct(eps);
    const bool active = gate_active(log_density_ratio(q_all, theta), log_lambda, cfg.gate);
    est.gate_pattern[static_cast<std::size_t>(s)] = active;
    if (del_data.empty()) continue;
    const auto lg = loglik_and_grad(arch, as_span(theta), del_data, exec);
    per_sample[static_cast<std::size_t>(s)] = lg.loglik;
    if (active) {
      ++est.active_samples;
      active_sum += lg.loglik;
      est.grad_mean += lg.grad;
      est.grad_log_std += lg.grad.cwiseProduct(eps).cwiseProduct(scale);
    }
  }
  if (del_data.empty()) {
    est.active_samples = static_cast<int>(std::count(est.gate_pattern.begin(), est.gate_pattern.end(), true));
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

  est.kl = kl_divergence(psi.to_gaussian(), q_all);
  Vector kl_m, kl_ls;
  vi::kl_gradient(psi, q_all, kl_m, kl_ls);
  est.value = est.expected + est.kl;
  est.surrogate = active_sum * inv_s + est.kl;
  est.grad_mean += kl_m;
  est.grad_log_std += kl_ls;
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

EuboEstimate eubo_and_grad(const MlpArchitecture& arch, const vi::VariationalParams& psi,
                           const Dataset& del_data, const DiagGaussian& q_all,
                           const VbunConfig& cfg, std::uint64_t seed, Exec exec) {
  cfg.validate();
  return eubo_with_noise(arch, psi, del_data, q_all, cfg, draw_noise(seed, cfg.samples, arch.param_count()),
                         exec);
}

VbunResult train_vbun(const MlpArchitecture& arch, const DiagGaussian& q_all, const Dataset& del_data,
                      const VbunConfig& cfg) {
  cfg.validate();
  const auto p = arch.param_count();
  if (q_all.dim() != p) throw DimensionError("train_vbun: q_all dimension");
  const auto psi0 = vi::VariationalParams::from_gaussian(q_all);
  Vector packed(2 * p);
  packed.head(p) = psi0.mean;
  packed.tail(p) = psi0.log_std;

  // Minimize the EUBO by ascending its negation.
  Objective neg_eubo = [&](const Vector& x, Vector& grad, int iteration) {
    const vi::VariationalParams psi{x.head(p), x.tail(p)};
    const Matrix noise = draw_noise(
        derive_seed(cfg.optimizer.seed, static_cast<std::uint64_t>(iteration) + 1), cfg.samples, p);
    const auto est = eubo_with_noise(arch, psi, del_data, q_all, cfg, noise);
    grad.resize(2 * p);
    grad.head(p) = -est.grad_mean;
    grad.tail(p) = -est.grad_log_std;
    return -est.value;
  };
  auto run = gradient_ascent(neg_eubo, packed, cfg.optimizer);
  for (auto& v : run.trace) v = -v;
  const vi::VariationalParams fitted{run.x.head(p), run.x.tail(p)};
  VbunConfig report = cfg;
  report.samples = cfg.report_samples;
  auto final_est = eubo_and_grad(arch, fitted, del_data, q_all, report,
                                 derive_seed(cfg.optimizer.seed, 0xEB0ULL));
  return {fitted.to_gaussian(), std::move(run.trace), std::move(final_est)};
}

}  // namespace bayesun::vbun
