#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>

namespace bayesun {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a moment-form Gaussian is requested from a precision that is not PD.
class NotPositiveDefinite : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Mean-field Gaussian: independent coordinates with strictly positive variances.
class DiagGaussian {
 public:
  DiagGaussian(Vector mean, Vector var);

  [[nodiscard]] const Vector& mean() const { return mean_; }
  [[nodiscard]] const Vector& var() const { return var_; }
  [[nodiscard]] Eigen::Index dim() const { return mean_.size(); }

 private:
  Vector mean_;
  Vector var_;
};

/// Gaussian with a dense covariance; symmetry and positive definiteness are checked on construction.
class FullGaussian {
 public:
  FullGaussian(Vector mean, Matrix cov);

  [[nodiscard]] const Vector& mean() const { return mean_; }
  [[nodiscard]] const Matrix& cov() const { return cov_; }
  [[nodiscard]] Eigen::Index dim() const { return mean_.size(); }

 private:
  Vector mean_;
  Matrix cov_;
};

enum class Definiteness { positive_definite, singular, indefinite };

std::string to_string(Definiteness d);

struct DefinitenessClass {
  Definiteness kind = Definiteness::positive_definite;
  double min_eigenvalue = 0.0;

  [[nodiscard]] bool is_pd() const { return kind == Definiteness::positive_definite; }
};

/// Eigenvalue threshold separating PD / singular / indefinite.
inline constexpr double kDefinitenessTol = 1e-10;

/// Precision-and-shift parameterization; may hold invalid (non-PD) states.
///
/// The precision is either a diagonal vector or a dense symmetric matrix. shift = precision * mean.
struct NaturalGaussian {
  std::variant<Vector, Matrix> precision;
  Vector shift;

  [[nodiscard]] bool is_diagonal() const { return std::holds_alternative<Vector>(precision); }
  [[nodiscard]] Eigen::Index dim() const { return shift.size(); }
  [[nodiscard]] const Vector& precision_diag() const { return std::get<Vector>(precision); }
  [[nodiscard]] const Matrix& precision_full() const { return std::get<Matrix>(precision); }
  /// Dense view of the precision regardless of storage.
  [[nodiscard]] Matrix precision_matrix() const;
};

struct QuotientResult {
  NaturalGaussian natural;
  DefinitenessClass definiteness;
};

double log_pdf(const DiagGaussian& g, const Vector& x);
double log_pdf(const FullGaussian& g, const Vector& x);

/// n x P matrix of draws, deterministic in (g, seed, n).
Matrix sample(const DiagGaussian& g, std::uint64_t seed, Eigen::Index n);

NaturalGaussian to_natural(const DiagGaussian& g);
NaturalGaussian to_natural(const FullGaussian& g);

/// Throws NotPositiveDefinite unless the precision classifies as PD.
DiagGaussian to_diag_gaussian(const NaturalGaussian& n);
FullGaussian to_full_gaussian(const NaturalGaussian& n);

NaturalGaussian multiply_natural(const NaturalGaussian& a, const NaturalGaussian& b);
QuotientResult divide_natural(const NaturalGaussian& num, const NaturalGaussian& den);

/// Throws std::invalid_argument for asymmetric input.
DefinitenessClass classify_precision(const Matrix& m);
DefinitenessClass classify_precision(const Vector& diag);
DefinitenessClass classify_precision(const NaturalGaussian& n);

/// KL(q || p), closed form.
double kl_divergence(const DiagGaussian& q, const DiagGaussian& p);
double kl_divergence(const FullGaussian& q, const FullGaussian& p);

}  // namespace bayesun
