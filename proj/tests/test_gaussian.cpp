#include <doctest.h>

#include <random>

#include "bayesun/gaussian.hpp"
#include "oracles.hpp"

using namespace bayesun;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

DiagGaussian d1(double m, double v) { return DiagGaussian(vec({m}), vec({v})); }

DiagGaussian random_diag(std::mt19937_64& rng, int p) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  Vector m(p);
  Vector v(p);
  for (int i = 0; i < p; ++i) {
    m[i] = n(rng);
    v[i] = u(rng);
  }
  return DiagGaussian(m, v);
}

}  // namespace

TEST_CASE("log_pdf of the standard normal") {
  CHECK(log_pdf(d1(0, 1), vec({0})) == doctest::Approx(-0.5 * std::log(2 * M_PI)).epsilon(1e-15));
  CHECK(log_pdf(d1(0, 1), vec({1})) == doctest::Approx(-0.5 * std::log(2 * M_PI) - 0.5).epsilon(1e-15));
}

TEST_CASE("log_pdf matches a quadrature-normalized density") {
  auto unnorm = [](double t) { return -0.5 * (t - 2.0) * (t - 2.0) / 4.0; };
  const double log_z = oracle::log_integral(unnorm, -20.0, 20.0, 40000);
  CHECK(std::abs(log_pdf(d1(2, 4), vec({0})) - (unnorm(0.0) - log_z)) < 1e-6);
}

TEST_CASE("full and diagonal log_pdf agree for diagonal covariance") {
  const Vector m = vec({0.3, -1.0, 2.0});
  const Vector v = vec({0.5, 2.0, 1.5});
  const Vector x = vec({1.0, 0.0, -1.0});
  CHECK(log_pdf(FullGaussian(m, v.asDiagonal().toDenseMatrix()), x) ==
        doctest::Approx(log_pdf(DiagGaussian(m, v), x)).epsilon(1e-13));
}

TEST_CASE("log_pdf rejects dimension mismatch") {
  CHECK_THROWS_AS(log_pdf(d1(0, 1), vec({0, 1})), DimensionError);
}

TEST_CASE("type invariants are enforced on construction") {
  CHECK_THROWS(DiagGaussian(vec({0}), vec({0})));
  CHECK_THROWS(DiagGaussian(vec({0, 1}), vec({1})));
  Matrix asym(2, 2);
  asym << 1, 0.5, 0.4, 1;
  CHECK_THROWS(FullGaussian(vec({0, 0}), asym));
  Matrix indef(2, 2);
  indef << 1, 2, 2, 1;
  CHECK_THROWS_AS(FullGaussian(vec({0, 0}), indef), NotPositiveDefinite);
}

TEST_CASE("sampling moments, determinism and collapse") {
  const auto s = sample(d1(0, 1), 7, 1000000);
  const double mean = s.mean();
  const double var = (s.array() - mean).square().sum() / static_cast<double>(s.rows() - 1);
  CHECK(std::abs(mean) < 0.005);
  CHECK(std::abs(var - 1.0) < 0.01);

  const DiagGaussian g(vec({1, -2, 3}), vec({0.5, 1, 2}));
  CHECK(sample(g, 11, 50) == sample(g, 11, 50));
  CHECK(sample(g, 11, 50) != sample(g, 12, 50));

  const auto tight = sample(d1(5, 1e-12), 3, 1000);
  CHECK((tight.array() - 5.0).abs().maxCoeff() < 1e-5);
}

TEST_CASE("multiply_natural examples") {
  auto r = multiply_natural(to_natural(d1(0, 1)), to_natural(d1(0, 1)));
  CHECK(r.precision_diag()[0] == 2.0);
  CHECK(r.shift[0] == 0.0);
  auto g = to_diag_gaussian(r);
  CHECK(g.var()[0] == doctest::Approx(0.5));

  r = multiply_natural(to_natural(d1(1, 1)), to_natural(d1(-1, 1)));
  CHECK(r.precision_diag()[0] == 2.0);
  CHECK(r.shift[0] == 0.0);
}

TEST_CASE("product density matches pointwise sum minus quadrature normalizer") {
  const auto a = d1(0.7, 1.3);
  const auto b = d1(-0.4, 0.6);
  const auto prod = to_diag_gaussian(multiply_natural(to_natural(a), to_natural(b)));
  auto f = [&](double t) { return log_pdf(a, vec({t})) + log_pdf(b, vec({t})); };
  const double log_z = oracle::log_integral(f, -15.0, 15.0, 60000);
  for (double t : {-2.0, -0.5, 0.0, 0.3, 1.7}) {
    CHECK(std::abs(log_pdf(prod, vec({t})) - (f(t) - log_z)) < 1e-8);
  }
}

TEST_CASE("divide_natural examples and classification") {
  auto q = divide_natural(to_natural(d1(0, 1)), to_natural(d1(0, 2)));
  CHECK(q.definiteness.kind == Definiteness::positive_definite);
  CHECK(q.natural.precision_diag()[0] == doctest::Approx(0.5));
  CHECK(to_diag_gaussian(q.natural).var()[0] == doctest::Approx(2.0));

  q = divide_natural(to_natural(d1(0, 1)), to_natural(d1(0, 0.5)));
  CHECK(q.definiteness.kind == Definiteness::indefinite);
  CHECK(q.definiteness.min_eigenvalue == doctest::Approx(-1.0));
  CHECK_THROWS_AS(to_diag_gaussian(q.natural), NotPositiveDefinite);
}

TEST_CASE("(q * l) / l round trip over random diagonal Gaussians") {
  std::mt19937_64 rng(100);
  for (int c = 0; c < 100; ++c) {
    const auto q = random_diag(rng, 3);
    const auto l = random_diag(rng, 3);
    const auto back = divide_natural(multiply_natural(to_natural(q), to_natural(l)), to_natural(l));
    REQUIRE(back.definiteness.is_pd());
    const auto g = to_diag_gaussian(back.natural);
    CHECK((g.mean() - q.mean()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((g.var() - q.var()).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("divide(multiply(a, b), b) reproduces a's natural parameters") {
  std::mt19937_64 rng(5);
  for (int c = 0; c < 50; ++c) {
    const auto a = to_natural(random_diag(rng, 4));
    const auto b = to_natural(random_diag(rng, 4));
    const auto r = divide_natural(multiply_natural(a, b), b);
    CHECK((r.natural.precision_diag() - a.precision_diag()).cwiseAbs().maxCoeff() <= 1e-14 * 10);
    CHECK((r.natural.shift - a.shift).cwiseAbs().maxCoeff() <= 1e-13);
  }
}

TEST_CASE("removing a heavier diagonal factor is always indefinite") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> pick(0, 4);
  for (int c = 0; c < 50; ++c) {
    const auto q = random_diag(rng, 5);
    Vector den_prec = 0.5 * q.var().cwiseInverse();
    const int k = pick(rng);
    den_prec[k] = 1.5 / q.var()[k];
    const NaturalGaussian den{den_prec, Vector::Zero(5)};
    CHECK(divide_natural(to_natural(q), den).definiteness.kind == Definiteness::indefinite);
  }
}

TEST_CASE("natural parameter round trip") {
  std::mt19937_64 rng(3);
  for (int c = 0; c < 20; ++c) {
    const auto g = random_diag(rng, 6);
    const auto back = to_diag_gaussian(to_natural(g));
    CHECK((back.mean() - g.mean()).cwiseAbs().maxCoeff() <= 1e-12 * (1 + g.mean().cwiseAbs().maxCoeff()));
    CHECK(((back.var() - g.var()).array() / g.var().array()).abs().maxCoeff() <= 1e-12);
  }
  Matrix cov(2, 2);
  cov << 2.0, 0.3, 0.3, 0.5;
  const FullGaussian f(vec({1, -1}), cov);
  const auto fb = to_full_gaussian(to_natural(f));
  CHECK((fb.cov() - cov).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((fb.mean() - f.mean()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("classify_precision examples") {
  auto c = classify_precision(Matrix::Identity(3, 3).eval());
  CHECK(c.kind == Definiteness::positive_definite);
  CHECK(c.min_eigenvalue == doctest::Approx(1.0));
  CHECK(classify_precision(vec({1, 0, 2})).kind == Definiteness::singular);
  c = classify_precision(vec({1, -0.3}));
  CHECK(c.kind == Definiteness::indefinite);
  CHECK(c.min_eigenvalue == doctest::Approx(-0.3));
  CHECK(to_string(c.kind) == "INDEFINITE");

  Matrix near(2, 2);
  near << 1, 1, 1, 1;
  CHECK(classify_precision(near).kind == Definiteness::singular);
  Matrix asym(2, 2);
  asym << 1, 0.2, 0.0, 1;
  CHECK_THROWS_AS(classify_precision(asym), std::invalid_argument);
}

TEST_CASE("kl_divergence closed-form examples") {
  CHECK(kl_divergence(d1(0, 1), d1(0, 1)) == 0.0);
  CHECK(kl_divergence(d1(1, 1), d1(0, 1)) == doctest::Approx(0.5));
  CHECK_THROWS_AS(kl_divergence(d1(0, 1), DiagGaussian(vec({0, 0}), vec({1, 1}))), DimensionError);
}

TEST_CASE("kl_divergence matches a Monte Carlo estimate") {
  std::mt19937_64 rng(21);
  const auto q = random_diag(rng, 5);
  const auto p = random_diag(rng, 5);
  const auto s = sample(q, 99, 1000000);
  double sum = 0.0;
  double sq = 0.0;
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    const Vector x = s.row(i).transpose();
    const double v = log_pdf(q, x) - log_pdf(p, x);
    sum += v;
    sq += v * v;
  }
  const double n = static_cast<double>(s.rows());
  const double mean = sum / n;
  const double se = std::sqrt((sq / n - mean * mean) / n);
  CHECK(std::abs(mean - kl_divergence(q, p)) < 3 * se);
}

TEST_CASE("kl_divergence is nonnegative and zero only at equality") {
  std::mt19937_64 rng(8);
  for (int c = 0; c < 200; ++c) {
    const auto q = random_diag(rng, 3);
    const auto p = random_diag(rng, 3);
    CHECK(kl_divergence(q, p) > 0.0);
    CHECK(kl_divergence(q, q) == doctest::Approx(0.0).epsilon(1e-14));
  }
}

TEST_CASE("full-covariance KL agrees with the diagonal formula") {
  std::mt19937_64 rng(4);
  const auto q = random_diag(rng, 3);
  const auto p = random_diag(rng, 3);
  const FullGaussian fq(q.mean(), q.var().asDiagonal().toDenseMatrix());
  const FullGaussian fp(p.mean(), p.var().asDiagonal().toDenseMatrix());
  CHECK(kl_divergence(fq, fp) == doctest::Approx(kl_divergence(q, p)).epsilon(1e-12));
}
