#include "bayesun/blr.hpp"

#include <cmath>

namespace bayesun::blr {

FeatureMap FeatureMap::polynomial(int degree) {
  if (degree < 1) throw std::invalid_argument("FeatureMap: polynomial degree must be >= 1");
  return FeatureMap(Kind::polynomial, degree);
}

FeatureMap FeatureMap::parse(const std::string& text) {
  if (text == "bias_linear") return bias_linear();
  if (text.rfind("poly:", 0) == 0) return polynomial(std::stoi(text.substr(5)));
  throw std::invalid_argument("FeatureMap: unknown feature spec '" + text + "'");
}

Eigen::Index FeatureMap::output_dim() const { return kind_ == Kind::bias_linear ? 2 : degree_; }

std::string FeatureMap::to_string() const {
  return kind_ == Kind::bias_linear ? "bias_linear" : "poly:" + std::to_string(degree_);
}

Vector FeatureMap::features(double x) const {
  Vector phi(output_dim());
  if (kind_ == Kind::bias_linear) {
    phi << x, 1.0;
  } else {
    double p = x;
    for (int k = 0; k < degree_; ++k, p *= x) phi[k] = p;
  }
  return phi;
}

Matrix FeatureMap::design(const std::vector<double>& xs) const {
  Matrix phi(static_cast<Eigen::Index>(xs.size()), output_dim());
  for (std::size_t n = 0; n < xs.size(); ++n) phi.row(static_cast<Eigen::Index>(n)) = features(xs[n]);
  return phi;
}

namespace {

void check_dims(const FullGaussian& g, const FeatureMap& f) {
  if (g.dim() != f.output_dim()) {
    throw DimensionError("blr: Gaussian dimension " + std::to_string(g.dim()) +
                         " does not match feature dimension " + std::to_string(f.output_dim()));
  }
}

/// Likelihood factor in natural form: (phi^T phi / sigma^2, phi^T y / sigma^2).
NaturalGaussian likelihood_factor(const Dataset& data, const FeatureMap& features) {
  data.require_positive_sigma();
  const Matrix phi = features.design(data.x);
  const Eigen::Map<const Vector> y(data.y.data(), static_cast<Eigen::Index>(data.y.size()));
  const double noise_prec = 1.0 / (data.sigma * data.sigma);
  Matrix prec = noise_prec * (phi.transpose() * phi);
  prec = 0.5 * (prec + prec.transpose());
  return {std::move(prec), Vector(noise_prec * (phi.transpose() * y))};
}

}  // namespace

FullGaussian fit(const FullGaussian& prior, const Dataset& data, const FeatureMap& features) {
  check_dims(prior, features);
  if (data.empty()) return prior;
  return to_full_gaussian(multiply_natural(to_natural(prior), likelihood_factor(data, features)));
}

UnlearnResult unlearn(const FullGaussian& posterior, const Dataset& del_data,
                      const FeatureMap& features) {
  check_dims(posterior, features);
  const NaturalGaussian post = to_natural(posterior);
  if (del_data.empty()) return {post, classify_precision(post), posterior};
  auto q = divide_natural(post, likelihood_factor(del_data, features));
  std::optional<FullGaussian> moment;
  if (q.definiteness.is_pd()) moment = to_full_gaussian(q.natural);
  return {std::move(q.natural), q.definiteness, std::move(moment)};
}

PredictiveTable predict(const FullGaussian& posterior, const std::vector<double>& x_grid,
                        const FeatureMap& features, double sigma) {
  check_dims(posterior, features);
  PredictiveTable t;
  t.x = x_grid;
  for (double x : x_grid) {
    const Vector phi = features.features(x);
    const double var = std::max(phi.dot(posterior.cov() * phi), 0.0);
    t.mean.push_back(phi.dot(posterior.mean()));
    t.std_epistemic.push_back(std::sqrt(var));
    t.std_total.push_back(std::sqrt(var + sigma * sigma));
  }
  return t;
}

double log_evidence(const FullGaussian& prior, const Dataset& data, const FeatureMap& features) {
  check_dims(prior, features);
  if (data.empty()) return 0.0;
  data.require_positive_sigma();
  const Matrix phi = features.design(data.x);
  const auto n = phi.rows();
  const Eigen::Map<const Vector> y(data.y.data(), n);
  Matrix cov = phi * prior.cov() * phi.transpose();
  cov.diagonal().array() += data.sigma * data.sigma;
  cov = 0.5 * (cov + cov.transpose());
  return log_pdf(FullGaussian(phi * prior.mean(), std::move(cov)), Vector(y));
}

}  // namespace bayesun::blr
