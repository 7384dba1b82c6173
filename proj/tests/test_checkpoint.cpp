#include <doctest.h>

#include <filesystem>
#include <random>

#include "bayesun/checkpoint.hpp"
#include "bayesun/config.hpp"
#include "bayesun/output.hpp"

using namespace bayesun;
namespace fs = std::filesystem;

namespace {

Vector random_vector(std::mt19937_64& rng, Eigen::Index n, bool positive) {
  std::normal_distribution<double> d(0.0, 1.0);
  Vector v(n);
  for (auto& x : v) x = positive ? std::exp(3 * d(rng)) : d(rng) * 1e3;
  return v;
}

io::PosteriorCheckpoint sample_checkpoint() {
  std::mt19937_64 rng(9);
  io::PosteriorCheckpoint c;
  c.method = "laplace";
  c.architecture.hidden_units = 50;
  c.gaussian = DiagGaussian(random_vector(rng, 151, false), random_vector(rng, 151, true));
  c.theta_map = c.diag().mean();
  c.prior = DiagGaussian(Vector::Zero(151), Vector::Ones(151));
  c.sigma = 0.1;
  c.seed = 12345678901234ULL;
  c.provenance.data_digest = io::sha256_hex("data");
  c.provenance.command = "train";
  c.provenance.id = io::checkpoint_id(c);
  return c;
}

fs::path temp_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("bayesun_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("format_double round-trips every bit") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double v = std::bit_cast<double>(rng() & 0x7fefffffffffffffULL);
    CHECK(std::strtod(io::format_double(v).c_str(), nullptr) == v);
  }
  CHECK(io::format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("151-parameter checkpoint round-trips bit-equal through a file") {
  const auto c = sample_checkpoint();
  const auto dir = temp_dir("ckpt");
  const auto path = (dir / "c.yaml").string();
  io::save_checkpoint(c, path);
  const auto back = io::load_checkpoint(path);
  CHECK(back.schema_version == 1);
  CHECK(back.method == "laplace");
  CHECK(back.architecture.hidden_units == 50);
  CHECK(back.diag().mean() == c.diag().mean());
  CHECK(back.diag().var() == c.diag().var());
  CHECK(*back.theta_map == *c.theta_map);
  CHECK(back.seed == c.seed);
  CHECK(back.sigma == c.sigma);
  CHECK(back.provenance.id == c.provenance.id);
  CHECK(io::to_text(back) == io::to_text(c));
  CHECK(io::checkpoint_id(back) == c.provenance.id);
}

TEST_CASE("full-covariance checkpoints round-trip") {
  io::PosteriorCheckpoint c;
  c.method = "blr";
  c.architecture = {"blr", 0, "poly:2"};
  Matrix cov(2, 2);
  cov << 0.3, 0.1, 0.1, 0.2;
  c.gaussian = FullGaussian(Vector::LinSpaced(2, 0.1, 0.2), cov);
  c.prior = FullGaussian(Vector::Zero(2), Matrix::Identity(2, 2));
  const auto back = io::from_text(io::to_text(c));
  CHECK(back.full().cov() == cov);
  CHECK(back.architecture.features == "poly:2");
}

TEST_CASE("truncated checkpoint names the missing field") {
  const auto text = io::to_text(sample_checkpoint());
  const auto cut = text.substr(0, text.find("prior:"));
  try {
    io::from_text(cut, "cut.yaml");
    FAIL("expected a parse error");
  } catch (const io::ParseError& e) {
    CHECK(e.where() == "prior");
    CHECK(std::string(e.what()).find("cut.yaml") != std::string::npos);
  }
}

TEST_CASE("unknown schema versions and malformed values are rejected") {
  auto text = io::to_text(sample_checkpoint());
  auto bumped = text;
  bumped.replace(bumped.find("schema_version: 1"), 17, "schema_version: 2");
  CHECK_THROWS_AS(io::from_text(bumped), io::ParseError);
  auto bad = text;
  bad.replace(bad.find("sigma: "), 7, "sigma: abc #");
  CHECK_THROWS_AS(io::from_text(bad), io::ParseError);
  CHECK_THROWS_AS(io::from_text("[1, 2"), io::ParseError);
}

TEST_CASE("pathology records survive a round trip") {
  io::PosteriorCheckpoint c;
  c.method = "lbun";
  c.architecture.hidden_units = 1;
  Vector prec(4);
  prec << 1.0, -2.0, 3.0, 0.0;
  c.natural = NaturalGaussian{prec, Vector::Constant(4, 0.5)};
  c.prior = DiagGaussian(Vector::Zero(4), Vector::Ones(4));
  PathologyReport r;
  r.kind = PathologyKind::indefinite_precision;
  r.detail = "precision is INDEFINITE";
  r.offending_coords = {1, 3};
  r.min_eigenvalue = -2.0;
  c.pathology = r;
  const auto back = io::from_text(io::to_text(c));
  REQUIRE(back.pathology);
  CHECK(back.pathology->kind == PathologyKind::indefinite_precision);
  CHECK(back.pathology->offending_coords == r.offending_coords);
  CHECK(*back.pathology->min_eigenvalue == -2.0);
  CHECK(back.pathology->detail == r.detail);
  CHECK_FALSE(back.gaussian);
  CHECK_FALSE(back.usable_for_prediction());
  CHECK(back.natural->precision_diag() == prec);

  c.pathology.reset();
  CHECK_THROWS_AS(io::from_text(io::to_text(c)), io::ParseError);
}

TEST_CASE("dataset CSV round trip and errors") {
  const Dataset d({-1.5, 0.1, 2.0}, {0.3, -0.7, 1e-300}, 0.1);
  const auto dir = temp_dir("data");
  const auto path = (dir / "d.csv").string();
  io::save_dataset(d, path);
  const auto back = io::load_dataset(path);
  CHECK(back.x == d.x);
  CHECK(back.y == d.y);
  CHECK(back.sigma == d.sigma);
  CHECK(io::dataset_digest(back) == io::dataset_digest(d));
  CHECK(io::dataset_csv(d).rfind("x,y,sigma\n", 0) == 0);

  io::write_file(path, "x,y,sigma\n1,2\n");
  CHECK_THROWS_AS(io::load_dataset(path), io::ParseError);
  io::write_file(path, "x,y\n");
  CHECK_THROWS_AS(io::load_dataset(path), io::ParseError);
}

TEST_CASE("sha256 of a known string") {
  CHECK(io::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("predictive CSV round trip") {
  PredictiveTable t{{-1.0, 0.0, 1.0}, {0.1, 0.2, 0.3}, {0.01, 0.02, 0.03}, {0.1, 0.2, 0.3}};
  const auto text = io::predictive_csv(t);
  CHECK(text.rfind("x,mean,std_epistemic,std_total\n", 0) == 0);
  const auto back = io::parse_predictive_csv(text);
  CHECK(back.x == t.x);
  CHECK(back.mean == t.mean);
  CHECK(back.std_epistemic == t.std_epistemic);
  CHECK(back.std_total == t.std_total);
  CHECK(io::predictive_svg(t, nullptr, "t").find("<svg") != std::string::npos);
}

TEST_CASE("config overrides apply and unknown keys fail") {
  const auto cfg = io::apply_config({}, "seed: 5\nscenario: {n_total: 30, n_delete: 10, grid: {lo: -1, hi: 1, n: 5}}\n"
                                        "vbun: {gate: suppress_high_density, lambdas: [0.2]}\n",
                                    "c.yaml");
  CHECK(cfg.scenario.seed == 5);
  CHECK(cfg.scenario.n_total == 30);
  CHECK(cfg.scenario.grid.size() == 5);
  CHECK(cfg.vbun.gate == vbun::GateDirection::suppress_high_density);
  CHECK(cfg.vbun_lambdas == std::vector<double>{0.2});
  CHECK_THROWS(io::apply_config({}, "scenario: {n_totl: 30}\n", "c.yaml"));
  CHECK_THROWS(io::apply_config({}, "laplace: {optimizer: {step_size: -1}}\n", "c.yaml"));
}
