#include <doctest.h>

#include <cmath>

#include "bayesun/optim.hpp"

using namespace bayesun;

namespace {

// Concave quadratic -0.5 (x - c)' A (x - c).
struct Quadratic {
  Matrix a;
  Vector c;
  double operator()(const Vector& x, Vector& g, int) const {
    const Vector d = x - c;
    g = -a * d;
    return -0.5 * d.dot(a * d);
  }
};

Quadratic make_quadratic() {
  Matrix a(3, 3);
  a << 3.0, 0.5, 0.0, 0.5, 2.0, 0.2, 0.0, 0.2, 1.0;
  Vector c(3);
  c << 1.0, -2.0, 0.5;
  return {a, c};
}

}  // namespace

TEST_CASE("optimizer kind names round-trip") {
  CHECK(parse_optimizer_kind(to_string(OptimizerKind::adam)) == OptimizerKind::adam);
  CHECK(parse_optimizer_kind(to_string(OptimizerKind::momentum)) == OptimizerKind::momentum);
  CHECK_THROWS(parse_optimizer_kind("sgd2"));
}

TEST_CASE("config validation") {
  OptimizerConfig c;
  CHECK_NOTHROW(c.validate());
  c.step_size = 0.0;
  CHECK_THROWS(c.validate());
  c = {};
  c.momentum = 1.0;
  CHECK_THROWS(c.validate());
  c = {};
  c.final_step_fraction = 0.0;
  CHECK_THROWS(c.validate());
}

TEST_CASE("first-order ascent finds the maximum of a concave quadratic") {
  const auto q = make_quadratic();
  for (auto kind : {OptimizerKind::adam, OptimizerKind::momentum}) {
    OptimizerConfig c;
    c.kind = kind;
    c.step_size = kind == OptimizerKind::adam ? 1e-2 : 5e-2;
    c.iterations = 5000;
    const auto r = gradient_ascent(q, Vector::Zero(3), c);
    CHECK(r.status == AscentStatus::completed);
    CHECK((r.x - q.c).norm() < 1e-3);
    CHECK(r.final_value <= 0.0);
  }
}

TEST_CASE("Levenberg-Marquardt converges in one step on a quadratic and never decreases") {
  const auto q = make_quadratic();
  const auto r = levenberg_marquardt(q, [&](const Vector&) { return q.a; }, Vector::Zero(3), 20);
  CHECK((r.x - q.c).norm() < 1e-8);
  for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] >= r.trace[i - 1]);
}

TEST_CASE("ascent stops when the objective exceeds the bound") {
  auto linear = [](const Vector& x, Vector& g, int) {
    g = Vector::Ones(x.size());
    return x.sum();
  };
  OptimizerConfig c;
  c.iterations = 100000;
  c.step_size = 0.1;
  const auto r = gradient_ascent(linear, Vector::Zero(2), c, 10.0);
  CHECK(r.status == AscentStatus::bound_exceeded);
  CHECK(r.final_value > 10.0);
  CHECK(r.iterations_run < 100000);
}

TEST_CASE("non-finite objective raises") {
  auto bad = [](const Vector& x, Vector& g, int it) {
    g = Vector::Zero(x.size());
    return it > 3 ? std::nan("") : 0.0;
  };
  OptimizerConfig c;
  c.iterations = 10;
  CHECK_THROWS_AS(gradient_ascent(bad, Vector::Zero(1), c), OptimizationError);
}
