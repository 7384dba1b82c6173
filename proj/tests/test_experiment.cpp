#include <doctest.h>

#include <cmath>

#include "bayesun/experiment.hpp"

using namespace bayesun;
using namespace bayesun::experiment;

namespace {

Scenario small_scenario() {
  Scenario s;
  s.n_total = 60;
  s.n_delete = 40;
  s.hidden_units = 6;
  s.grid = linspace(-5, 5, 21);
  s.predictive_samples = 50;
  s.laplace_optimizer.iterations = 300;
  s.laplace_optimizer.polish_iterations = 20;
  s.vi_optimizer.iterations = 200;
  s.vi_options.warm_start_iterations = 50;
  s.vi_options.report_samples = 50;
  return s;
}

}  // namespace

TEST_CASE("linspace endpoints and spacing") {
  const auto g = linspace(-5, 5, 200);
  CHECK(g.size() == 200);
  CHECK(g.front() == -5.0);
  CHECK(g.back() == 5.0);
  CHECK(g[1] - g[0] == doctest::Approx(10.0 / 199));
  CHECK(linspace(0, 1, 1) == std::vector<double>{0.0});
  CHECK_THROWS(linspace(0, 1, 0));
}

TEST_CASE("default scenario split has exact counts in the right regions") {
  const Scenario s;
  const auto d = gen_sine_data(s);
  CHECK(d.ret.size() == 100);
  CHECK(d.del.size() == 200);
  CHECK(d.all.size() == 300);
  int left = 0;
  for (double x : d.ret.x) {
    CHECK(s.in_retain_region(x));
    left += x < 0;
  }
  CHECK(left == 50);
  for (double x : d.del.x) CHECK(s.delete_region.contains(x));
  for (std::size_t i = 0; i < d.ret.size(); ++i) CHECK(d.all.x[i] == d.ret.x[i]);
  for (std::size_t i = 0; i < d.del.size(); ++i) CHECK(d.all.y[d.ret.size() + i] == d.del.y[i]);
}

TEST_CASE("noiseless data lies on the sine") {
  Scenario s;
  s.sigma = 0.0;
  const auto d = gen_sine_data(s);
  for (std::size_t i = 0; i < d.all.size(); ++i) CHECK(d.all.y[i] == std::sin(d.all.x[i]));
}

TEST_CASE("data generation is deterministic by seed") {
  Scenario s;
  const auto a = gen_sine_data(s);
  const auto b = gen_sine_data(s);
  CHECK(a.all.x == b.all.x);
  CHECK(a.all.y == b.all.y);
  s.seed = 2;
  CHECK(gen_sine_data(s).all.x != a.all.x);
}

TEST_CASE("scenario validation") {
  Scenario s;
  CHECK_NOTHROW(s.validate());
  s.n_delete = 300;
  CHECK_THROWS(s.validate());
  s = {};
  s.sigma = -1;
  CHECK_THROWS(s.validate());
  s = {};
  s.retain_regions[0] = {-1.0, 1.0, true};
  CHECK_THROWS(s.validate());
}

TEST_CASE("posterior_predictive delegates to the Laplace engine") {
  const auto s = small_scenario();
  const auto arch = s.architecture();
  const DiagGaussian q(Vector::LinSpaced(arch.param_count(), -1, 1), Vector::Constant(arch.param_count(), 0.01));
  const laplace::PredictMode mode = laplace::McMode{30, 4};
  const auto a = posterior_predictive(arch, q, s.grid, s.sigma, mode);
  const auto b = laplace::predict(arch, q, s.grid, s.sigma, mode);
  CHECK(a.mean == b.mean);
  CHECK(a.std_total == b.std_total);
}

TEST_CASE("self-comparison is zero and kl is directed") {
  const auto s = small_scenario();
  const auto arch = s.architecture();
  const auto p = arch.param_count();
  const DiagGaussian a(Vector::LinSpaced(p, -1, 1), Vector::Constant(p, 0.01));
  const DiagGaussian b(Vector::LinSpaced(p, -1.1, 1), Vector::Constant(p, 0.02));
  for (auto kind : {PredictiveKind::mc, PredictiveKind::linearized}) {
    const ComparisonOptions o{kind, 50, 1};
    const auto self = compare_posteriors(arch, a, a, s, o);
    CHECK(self.kl_to_baseline == 0.0);
    CHECK(self.mean_shift_on_grid == 0.0);
    CHECK(self.rmse_retained == 0.0);
    CHECK(self.avg_std_deleted_region == self.reference_avg_std_deleted_region);
    CHECK(self.all_finite());

    const auto ab = compare_posteriors(arch, a, b, s, o);
    const auto ba = compare_posteriors(arch, b, a, s, o);
    CHECK(ab.kl_to_baseline != doctest::Approx(ba.kl_to_baseline));
    CHECK(ab.mean_shift_on_grid == ba.mean_shift_on_grid);
    CHECK(ab.rmse_retained == ba.rmse_retained);
    CHECK(ab.avg_std_deleted_region == ba.reference_avg_std_deleted_region);
  }
  const DiagGaussian other(Vector::Zero(p + 1), Vector::Ones(p + 1));
  CHECK_THROWS(compare_posteriors(arch, a, other, s));
}

TEST_CASE("names round-trip") {
  CHECK(parse_method(to_string(Method::vi)) == Method::vi);
  CHECK(parse_unlearner(to_string(UnlearnerKind::vbun)) == UnlearnerKind::vbun);
  CHECK(parse_predictive_kind(to_string(PredictiveKind::linearized)) == PredictiveKind::linearized);
  CHECK_THROWS(parse_method("mcmc"));
}

TEST_CASE("small pipeline runs are deterministic and retrain compares to zero") {
  const auto s = small_scenario();
  UnlearnerConfig lb;
  lb.kind = UnlearnerKind::lbun;
  lb.lambdas = {1.0, 1e3};
  const auto r1 = run_scenario(Method::laplace, lb, s);
  const auto r2 = run_scenario(Method::laplace, lb, s);
  REQUIRE(r1.cells.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(r1.cells[i].report.kind == r2.cells[i].report.kind);
    CHECK(r1.cells[i].param_shift == r2.cells[i].param_shift);
    if (r1.cells[i].posterior) CHECK(r1.cells[i].posterior->mean() == r2.cells[i].posterior->mean());
    if (r1.cells[i].report.is_valid()) {
      REQUIRE(r1.cells[i].vs_baseline);
      CHECK(r1.cells[i].vs_baseline->all_finite());
    }
  }
  CHECK(r1.original.posterior.mean() == r2.original.posterior.mean());
  CHECK(r1.baseline_predictive.mean == r2.baseline_predictive.mean);

  UnlearnerConfig rt;
  rt.kind = UnlearnerKind::retrain;
  rt.lambdas = {0.0};
  const auto r3 = run_scenario(Method::vi, rt, s);
  REQUIRE(r3.cells.size() == 1);
  REQUIRE(r3.cells[0].vs_baseline);
  CHECK(r3.cells[0].vs_baseline->kl_to_baseline == 0.0);
  CHECK(r3.cells[0].vs_baseline->mean_shift_on_grid == 0.0);
}

TEST_CASE("V-BUN cells run and report on a small instance") {
  const auto s = small_scenario();
  UnlearnerConfig vb;
  vb.kind = UnlearnerKind::vbun;
  vb.lambdas = {0.1, 0.9};
  vb.vbun.optimizer.iterations = 50;
  vb.vbun.report_samples = 20;
  const auto r = run_scenario(Method::vi, vb, s);
  REQUIRE(r.cells.size() == 2);
  for (const auto& c : r.cells) {
    REQUIRE(c.posterior);
    CHECK(c.report.is_valid());
    CHECK(std::isfinite(c.kl_to_original));
    CHECK(c.dissimilar_to_baseline == (c.vs_baseline->kl_to_baseline > s.dissimilarity_threshold));
  }
}
