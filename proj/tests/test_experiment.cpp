#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "urlab/experiment.hpp"

using namespace urlab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kFunctionalConfig = R"(
boundary.kind = plane
boundary.extent = 4
boundary.spacing = 0.01
operator.beta = 1
domain.side = one_side
grid.lo = -2 0
grid.hi = 2 2
grid.h = 0.03125
solve.mode = analytic_linear
functional.tags = hess_u logratio_grad
carleson.scales = 0.5 0.25
forest.k_min = -2
forest.k_max = 3
seed = 1
)";

}  // namespace

TEST_CASE("config parsing, canonicalization and hashing") {
  const ExperimentConfig a = ExperimentConfig::parse_text("b = 2\na = 1\n# comment\n");
  const ExperimentConfig b = ExperimentConfig::parse_text("a = 1\nb = 2\n");
  CHECK(a.canonical_text() == b.canonical_text());
  CHECK(a.hash() == b.hash());
  CHECK(a.get("a") == "1");
  CHECK(a.get_double_or("missing", 7.5) == 7.5);
  CHECK_THROWS_AS(a.get("missing"), ParameterError);
  const ExperimentConfig c = ExperimentConfig::parse_text("a = 2\nb = 2\n");
  CHECK(a.hash() != c.hash());
}

TEST_CASE("gen-boundary bundle") {
  const ExperimentConfig cfg = ExperimentConfig::parse_text(
      "boundary.kind = four_corner_cantor\nboundary.generation = 3\n");
  const ExperimentResult res = run_experiment(cfg, "gen-boundary", "/tmp/urlab_test_out");
  CHECK(res.exit_code == 0);
  CHECK(fs::exists(res.bundle_dir + "/boundary.txt"));
  CHECK(fs::exists(res.bundle_dir + "/manifest.txt"));
  const std::string manifest = slurp(res.bundle_dir + "/manifest.txt");
  CHECK(manifest.find("achieved.C_sigma") != std::string::npos);
  fs::remove_all("/tmp/urlab_test_out");
}

TEST_CASE("unknown integrand tag is a validation error naming the tag") {
  ExperimentConfig cfg = ExperimentConfig::parse_text(kFunctionalConfig);
  cfg.set("functional.tags", "no_such_tag");
  const ExperimentResult res = run_experiment(cfg, "functional", "/tmp/urlab_test_out2");
  CHECK(res.exit_code == 2);
  CHECK(res.message.find("no_such_tag") != std::string::npos);
  fs::remove_all("/tmp/urlab_test_out2");
}

TEST_CASE("identical configs byte-reproduce the outputs") {
  const ExperimentConfig cfg = ExperimentConfig::parse_text(kFunctionalConfig);
  const ExperimentResult r1 = run_experiment(cfg, "functional", "/tmp/urlab_det_a");
  const ExperimentResult r2 = run_experiment(cfg, "functional", "/tmp/urlab_det_b");
  REQUIRE(r1.exit_code == 0);
  REQUIRE(r2.exit_code == 0);
  for (const std::string tag : {"hess_u", "logratio_grad"}) {
    const std::string a = slurp(r1.bundle_dir + "/" + tag + ".csv");
    const std::string b = slurp(r2.bundle_dir + "/" + tag + ".csv");
    CHECK(a.size() > 0);
    CHECK(a == b);
  }
  fs::remove_all("/tmp/urlab_det_a");
  fs::remove_all("/tmp/urlab_det_b");
}

TEST_CASE("svg slice output") {
  ExperimentConfig cfg = ExperimentConfig::parse_text(kFunctionalConfig);
  cfg.set("out.svg", "1");
  const ExperimentResult res = run_experiment(cfg, "solve", "/tmp/urlab_svg");
  REQUIRE(res.exit_code == 0);
  CHECK(fs::exists(res.bundle_dir + "/field.svg"));
  CHECK(fs::exists(res.bundle_dir + "/field.bin"));
  CHECK(fs::exists(res.bundle_dir + "/field.bin.txt"));
  fs::remove_all("/tmp/urlab_svg");
}

TEST_CASE("field binary round-trip") {
  const ExperimentConfig cfg = ExperimentConfig::parse_text(kFunctionalConfig);
  const BoundarySample sample = boundary_from_config(cfg);
  const DomainBox dom = domain_from_config(cfg, sample);
  const Grid grid(dom, 0.03125);
  const ScalarField u = sample_field(grid, [](const Vector& X) { return X[0] + 2.0 * X[1]; });
  write_field(u, "/tmp/urlab_field_rt.bin", "test sidecar\n");
  const ScalarField v = read_field(grid, "/tmp/urlab_field_rt.bin");
  CHECK((u.values - v.values).cwiseAbs().maxCoeff() == 0.0);
  CHECK(u.valid == v.valid);
  std::remove("/tmp/urlab_field_rt.bin");
  std::remove("/tmp/urlab_field_rt.bin.txt");
}

TEST_CASE("dichotomy verb produces a trend table") {
  ExperimentConfig cfg = ExperimentConfig::parse_text(kFunctionalConfig);
  cfg.set("solve.mode", "green");
  cfg.set("solve.pole", "0 1");
  cfg.set("ladder.h", "0.0625 0.03125");
  cfg.set("functional.tag", "grad_sq_grad_u");
  const ExperimentResult res = run_experiment(cfg, "dichotomy", "/tmp/urlab_dich");
  REQUIRE(res.exit_code == 0);
  const std::string trend = slurp(res.bundle_dir + "/trend.csv");
  CHECK(trend.find("h,sup") != std::string::npos);
  CHECK(trend.find("divergent") != std::string::npos);
  fs::remove_all("/tmp/urlab_dich");
}
