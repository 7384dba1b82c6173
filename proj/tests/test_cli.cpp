#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <sstream>

#include "bayesun/checkpoint.hpp"
#include "bayesun/cli.hpp"

using namespace bayesun;
namespace fs = std::filesystem;

namespace {

const char* kQuickConfig = R"(scenario:
  n_total: 60
  n_delete: 40
  hidden_units: 6
  predictive_samples: 50
  grid: {lo: -5, hi: 5, n: 21}
laplace:
  optimizer: {iterations: 300, polish_iterations: 20}
vi:
  optimizer: {iterations: 200}
  warm_start_iterations: 50
  report_samples: 50
lbun:
  lambdas: [1, 1000]
vbun:
  optimizer: {iterations: 50}
  report_samples: 50
  lambdas: [0.1, 0.9]
)";

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

struct Workspace {
  fs::path dir;
  std::string config;

  explicit Workspace(const std::string& name) : dir(fs::temp_directory_path() / ("bayesun_cli_" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
    config = (dir / "quick.yaml").string();
    io::write_file(config, kQuickConfig);
  }
  [[nodiscard]] std::string path(const std::string& f) const { return (dir / f).string(); }
  [[nodiscard]] Run cmd(std::vector<std::string> args) const {
    std::vector<std::string> full{"--config", config, "--out-dir", dir.string(), "--seed", "7"};
    full.insert(full.end(), args.begin(), args.end());
    return run(full);
  }
};

/// Name -> bytes of every regular file below `root`.
std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = io::read_file(e.path().string());
  }
  return files;
}

}  // namespace

TEST_CASE("unknown flags and commands exit 1 with usage") {
  auto r = run({"--bogus"});
  CHECK(r.code == cli::kExitError);
  CHECK(r.err.find("Usage") != std::string::npos);
  r = run({"gen-data", "--nope"});
  CHECK(r.code == cli::kExitError);
  r = run({"frobnicate"});
  CHECK(r.code == cli::kExitError);
  r = run({});
  CHECK(r.code == cli::kExitError);
}

TEST_CASE("help exits 0") { CHECK(run({"--help"}).code == cli::kExitOk); }

TEST_CASE("gen-data is byte-deterministic by seed") {
  Workspace a("gen_a"), b("gen_b");
  REQUIRE(a.cmd({"gen-data"}).code == 0);
  REQUIRE(b.cmd({"gen-data"}).code == 0);
  for (const auto* f : {"data_all.csv", "data_ret.csv", "data_del.csv"}) {
    CHECK(io::read_file(a.path(f)) == io::read_file(b.path(f)));
  }
  REQUIRE(run({"--config", a.config, "--out-dir", b.dir.string(), "--seed", "8", "gen-data"}).code == 0);
  CHECK(io::read_file(a.path("data_all.csv")) != io::read_file(b.path("data_all.csv")));
}

TEST_CASE("quartic pathology demo reports unit variance and a non-normalizable verdict") {
  Workspace w("quartic");
  const auto r = w.cmd({"pathology-demo", "quartic"});
  CHECK(r.code == cli::kExitPathology);
  const auto text = io::read_file(w.path("pathology_quartic.txt"));
  CHECK(text.find("variance 1") != std::string::npos);
  CHECK(text.find("NON_NORMALIZABLE") != std::string::npos);
  CHECK(io::read_file(w.path("pathology_quartic.json")).find("\"NON_NORMALIZABLE\"") != std::string::npos);
  CHECK(w.cmd({"pathology-demo", "blr"}).code == cli::kExitPathology);
  CHECK(io::read_file(w.path("pathology_blr.txt")).find("INDEFINITE_PRECISION") != std::string::npos);
  CHECK(w.cmd({"pathology-demo", "cubic"}).code == cli::kExitError);
}

TEST_CASE("train, unlearn, predict and compare; inputs are never modified") {
  Workspace w("flow");
  REQUIRE(w.cmd({"gen-data"}).code == 0);
  REQUIRE(w.cmd({"train", "--method", "laplace", "--data", w.path("data_all.csv")}).code == 0);
  REQUIRE(w.cmd({"retrain", "--method", "laplace", "--data", w.path("data_ret.csv")}).code == 0);
  const auto original = io::read_file(w.path("laplace.yaml"));

  auto r = w.cmd({"unlearn", "--method", "lbun", "--checkpoint", w.path("laplace.yaml"), "--delete",
                  w.path("data_del.csv"), "--lambda", "1000"});
  CHECK(r.code == 0);
  CHECK(io::read_file(w.path("laplace.yaml")) == original);
  const auto un = io::load_checkpoint(w.path("lbun_unlearned.yaml"));
  CHECK(un.method == "lbun");
  CHECK(un.provenance.parent == io::load_checkpoint(w.path("laplace.yaml")).provenance.id);
  CHECK(*un.provenance.lambda == 1000.0);

  r = w.cmd({"predict", "--checkpoint", w.path("lbun_unlearned.yaml"), "--output", w.path("p.csv"), "--plot", w.path("p.svg")});
  CHECK(r.code == 0);
  const auto csv = io::read_file(w.path("p.csv"));
  CHECK(csv.rfind("x,mean,std_epistemic,std_total\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 22);
  CHECK(io::read_file(w.path("p.svg")).find("<svg") != std::string::npos);

  r = w.cmd({"compare", "--a", w.path("lbun_unlearned.yaml"), "--b", w.path("laplace_retrain.yaml")});
  CHECK(r.code == 0);
  CHECK(io::read_file(w.path("compare.json")).find("kl_to_baseline") != std::string::npos);

  r = w.cmd({"unlearn", "--method", "lbun", "--checkpoint", w.path("laplace.yaml"), "--delete",
             w.path("data_del.csv"), "--lambda", "0.01", "--output", w.path("bad.yaml")});
  CHECK(r.code == cli::kExitPathology);
  CHECK(r.out.find("UNBOUNDED_FORGETTING") != std::string::npos);
  CHECK(r.out.find("report ") != std::string::npos);
  CHECK(fs::exists(w.path("bad.report.json")));
  CHECK(io::read_file(w.path("laplace.yaml")) == original);
  CHECK(w.cmd({"predict", "--checkpoint", w.path("bad.yaml")}).code == cli::kExitError);
  CHECK(w.cmd({"predict", "--checkpoint", w.path("bad.yaml"), "--force"}).code == cli::kExitError);
}

TEST_CASE("unlearning a far unobserved point from a linear model is INDEFINITE") {
  Workspace w("blr");
  io::save_dataset(Dataset({-0.5, 0.0, 0.5}, {0.1, 0.2, 0.3}, 1.0), w.path("obs.csv"));
  io::save_dataset(Dataset({40.0}, {0.0}, 1.0), w.path("far.csv"));
  REQUIRE(w.cmd({"train", "--method", "blr", "--data", w.path("obs.csv")}).code == 0);
  const auto r = w.cmd({"unlearn", "--method", "blr", "--checkpoint", w.path("blr.yaml"), "--delete", w.path("far.csv")});
  CHECK(r.code == cli::kExitPathology);
  CHECK(r.out.find("INDEFINITE_PRECISION") != std::string::npos);
  CHECK(r.out.find("report ") != std::string::npos);
  const auto c = io::load_checkpoint(w.path("blr_unlearned.yaml"));
  REQUIRE(c.pathology);
  CHECK(c.pathology->kind == PathologyKind::indefinite_precision);
}

TEST_CASE("clamped checkpoints need --force to be used") {
  Workspace w("clamped");
  io::PosteriorCheckpoint c;
  c.method = "lbun";
  c.architecture.hidden_units = 2;
  c.gaussian = DiagGaussian(Vector::Zero(7), Vector::Constant(7, 0.1));
  c.prior = DiagGaussian(Vector::Zero(7), Vector::Ones(7));
  PathologyReport rep;
  rep.kind = PathologyKind::clamped;
  rep.offending_coords = {0};
  c.pathology = rep;
  io::save_checkpoint(c, w.path("c.yaml"));
  const auto bytes = io::read_file(w.path("c.yaml"));
  const auto r = w.cmd({"predict", "--checkpoint", w.path("c.yaml")});
  CHECK(r.code == cli::kExitError);
  CHECK(r.err.find("--force") != std::string::npos);
  CHECK(w.cmd({"predict", "--checkpoint", w.path("c.yaml"), "--force"}).code == 0);
  CHECK(io::read_file(w.path("c.yaml")) == bytes);
}

TEST_CASE("missing and malformed inputs are operational errors") {
  Workspace w("errors");
  CHECK(w.cmd({"train", "--method", "laplace", "--data", w.path("none.csv")}).code == cli::kExitError);
  io::write_file(w.path("junk.yaml"), "schema_version: 1\nmethod: laplace\n");
  const auto r = w.cmd({"predict", "--checkpoint", w.path("junk.yaml")});
  CHECK(r.code == cli::kExitError);
  CHECK(r.err.find("missing field") != std::string::npos);
}

TEST_CASE("sweeps reproduce byte-identical outputs") {
  Workspace a("sweep_a"), b("sweep_b");
  const std::vector<std::string> args{"sweep", "--method", "laplace", "--unlearner", "lbun"};
  const auto ra = a.cmd(args);
  const auto rb = b.cmd(args);
  CHECK(ra.code == rb.code);
  CHECK(ra.code != cli::kExitError);
  const auto sa = snapshot(a.dir);
  const auto sb = snapshot(b.dir);
  CHECK(sa.size() == sb.size());
  CHECK(sa.count("sweep_laplace_lbun/summary.json") == 1);
  for (const auto& [name, bytes] : sa) {
    if (name == "quick.yaml") continue;
    REQUIRE(sb.count(name) == 1);
    CHECK_MESSAGE(bytes == sb.at(name), name);
  }
}
