#include "bayesun/gaussian.hpp"

#include <cmath>
#include <numbers>

#include "bayesun/rng.hpp"

namespace bayesun {
namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

void require_same_dim(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                         " vs " + std::to_string(b) + ")");
  }
}

bool is_symmetric(const Matrix& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

}  // namespace

std::string to_string(Definiteness d) {
  switch (d) {
    case Definiteness::positive_definite:
      return "POSITIVE_DEFINITE";
    case Definiteness::singular:
      return "SINGULAR";
    case Definiteness::indefinite:
      return "INDEFINITE";
  }
  return "UNKNOWN";
}

DiagGaussian::DiagGaussian(Vector mean, Vector var) : mean_(std::move(mean)), var_(std::move(var)) {
  require_same_dim(mean_.size(), var_.size(), "DiagGaussian");
  for (Eigen::Index i = 0; i < var_.size(); ++i) {
    if (!(var_[i] > 0.0) || !std::isfinite(var_[i])) {
      throw std::invalid_argument("DiagGaussian: variance " + std::to_string(i) +
                                  " is not a finite positive value");
    }
  }
  if (!mean_.allFinite()) throw std::invalid_argument("DiagGaussian: non-finite mean");
}

FullGaussian::FullGaussian(Vector mean, Matrix cov) : mean_(std::move(mean)), cov_(std::move(cov)) {
  require_same_dim(mean_.size(), cov_.rows(), "FullGaussian");
  require_same_dim(cov_.rows(), cov_.cols(), "FullGaussian covariance");
  if (!is_symmetric(cov_, 1e-12)) throw std::invalid_argument("FullGaussian: covariance not symmetric");
  Eigen::LLT<Matrix> llt(cov_);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("FullGaussian: covariance not positive definite");
  }
}

Matrix NaturalGaussian::precision_matrix() const {
  if (is_diagonal()) return precision_diag().asDiagonal();
  return precision_full();
}

double log_pdf(const DiagGaussian& g, const Vector& x) {
  require_same_dim(g.dim(), x.size(), "log_pdf");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double d = x[i] - g.mean()[i];
    acc += -0.5 * (kLog2Pi + std::log(g.var()[i]) + d * d / g.var()[i]);
  }
  return acc;
}

double log_pdf(const FullGaussian& g, const Vector& x) {
  require_same_dim(g.dim(), x.size(), "log_pdf");
  Eigen::LLT<Matrix> llt(g.cov());
  const Vector z = llt.matrixL().solve(x - g.mean());
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return -0.5 * (static_cast<double>(x.size()) * kLog2Pi + log_det + z.squaredNorm());
}

Matrix sample(const DiagGaussian& g, std::uint64_t seed, Eigen::Index n) {
  if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
  Rng rng(seed);
  Matrix out(n, g.dim());
  const Vector sd = g.var().cwiseSqrt();
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < g.dim(); ++c) out(r, c) = g.mean()[c] + sd[c] * rng.normal();
  }
  return out;
}

NaturalGaussian to_natural(const DiagGaussian& g) {
  Vector prec = g.var().cwiseInverse();
  Vector shift = prec.cwiseProduct(g.mean());
  return {std::move(prec), std::move(shift)};
}

NaturalGaussian to_natural(const FullGaussian& g) {
  Eigen::LLT<Matrix> llt(g.cov());
  Matrix prec = llt.solve(Matrix::Identity(g.dim(), g.dim()));
  prec = 0.5 * (prec + prec.transpose());
  Vector shift = llt.solve(g.mean());
  return {std::move(prec), std::move(shift)};
}

DiagGaussian to_diag_gaussian(const NaturalGaussian& n) {
  const auto cls = classify_precision(n);
  if (!cls.is_pd()) {
    throw NotPositiveDefinite("to_diag_gaussian: precision is " + to_string(cls.kind) +
                              " (min eigenvalue " + std::to_string(cls.min_eigenvalue) + ")");
  }
  if (!n.is_diagonal()) throw std::invalid_argument("to_diag_gaussian: dense precision");
  const Vector& prec = n.precision_diag();
  return DiagGaussian(n.shift.cwiseQuotient(prec), prec.cwiseInverse());
}

FullGaussian to_full_gaussian(const NaturalGaussian& n) {
  const auto cls = classify_precision(n);
  if (!cls.is_pd()) {
    throw NotPositiveDefinite("to_full_gaussian: precision is " + to_string(cls.kind) +
                              " (min eigenvalue " + std::to_string(cls.min_eigenvalue) + ")");
  }
  const Matrix prec = n.precision_matrix();
  Eigen::LLT<Matrix> llt(prec);
  Matrix cov = llt.solve(Matrix::Identity(prec.rows(), prec.cols()));
  cov = 0.5 * (cov + cov.transpose());
  return FullGaussian(llt.solve(n.shift), std::move(cov));
}

namespace {

NaturalGaussian combine(const NaturalGaussian& a, const NaturalGaussian& b, double sign,
                        const char* what) {
  require_same_dim(a.dim(), b.dim(), what);
  Vector shift = a.shift + sign * b.shift;
  if (a.is_diagonal() && b.is_diagonal()) {
    return {Vector(a.precision_diag() + sign * b.precision_diag()), std::move(shift)};
  }
  return {Matrix(a.precision_matrix() + sign * b.precision_matrix()), std::move(shift)};
}

}  // namespace

NaturalGaussian multiply_natural(const NaturalGaussian& a, const NaturalGaussian& b) {
  return combine(a, b, 1.0, "multiply_natural");
}

QuotientResult divide_natural(const NaturalGaussian& num, const NaturalGaussian& den) {
  NaturalGaussian out = combine(num, den, -1.0, "divide_natural");
  auto cls = classify_precision(out);
  return {std::move(out), cls};
}

namespace {

DefinitenessClass classify_min(double min_eig) {
  if (min_eig > kDefinitenessTol) return {Definiteness::positive_definite, min_eig};
  if (std::abs(min_eig) <= kDefinitenessTol) return {Definiteness::singular, min_eig};
  return {Definiteness::indefinite, min_eig};
}

}  // namespace

DefinitenessClass classify_precision(const Matrix& m) {
  if (!is_symmetric(m, 1e-12)) throw std::invalid_argument("classify_precision: asymmetric input");
  if (m.size() == 0) return {Definiteness::positive_definite, 0.0};
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return classify_min(es.eigenvalues().minCoeff());
}

DefinitenessClass classify_precision(const Vector& diag) {
  if (diag.size() == 0) return {Definiteness::positive_definite, 0.0};
  return classify_min(diag.minCoeff());
}

DefinitenessClass classify_precision(const NaturalGaussian& n) {
  if (n.is_diagonal()) return classify_precision(n.precision_diag());
  return classify_precision(n.precision_full());
}

double kl_divergence(const DiagGaussian& q, const DiagGaussian& p) {
  require_same_dim(q.dim(), p.dim(), "kl_divergence");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < q.dim(); ++i) {
    const double ratio = q.var()[i] / p.var()[i];
    const double d = q.mean()[i] - p.mean()[i];
    acc += 0.5 * (ratio + d * d / p.var()[i] - 1.0 - std::log(ratio));
  }
  return std::max(acc, 0.0);
}

double kl_divergence(const FullGaussian& q, const FullGaussian& p) {
  require_same_dim(q.dim(), p.dim(), "kl_divergence");
  Eigen::LLT<Matrix> lp(p.cov());
  Eigen::LLT<Matrix> lq(q.cov());
  const Matrix lp_l = lp.matrixL();
  const Matrix lq_l = lq.matrixL();
  const double logdet_p = 2.0 * lp_l.diagonal().array().log().sum();
  const double logdet_q = 2.0 * lq_l.diagonal().array().log().sum();
  const double trace = lp.solve(q.cov()).trace();
  const Vector d = p.mean() - q.mean();
  const double quad = d.dot(lp.solve(d));
  const double k = static_cast<double>(q.dim());
  return std::max(0.5 * (trace + quad - k + logdet_p - logdet_q), 0.0);
}

}  // namespace bayesun
