#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <functional>
#include <fstream>
#include <sstream>

#include "rdafront/harness.hpp"

using namespace rdafront;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::InvalidArgument;
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const char* name) {
  const fs::path dir = fs::temp_directory_path() / "rdafront_harness_test" / name;
  fs::remove_all(dir);
  return dir;
}

// a pipeline small enough for a unit test
RunConfig tiny_config() {
  RunConfig cfg = parse_config(
      "[problem]\nname = paper-example\nmu = 0.1\nT = 0.2\n"
      "[grid]\nnx = 8\nny = 8\nnz = 33\nouter_nx = 8\nouter_ny = 8\nouter_nz = 9\nfront_nx = 8\nfront_ny = 8\n"
      "[numerics]\nfan = 8\n"
      "[output]\ntimes = 0.1\n");
  return cfg;
}

}  // namespace

TEST_CASE("config defaults and overrides") {
  const RunConfig d = parse_config("[problem]\nname = paper-example\n");
  CHECK(d.problem.name == "paper-example");
  CHECK(d.problem.mu == 0.01);
  CHECK(d.grid.nx == 64);
  CHECK(d.grid.nz == 257);
  CHECK(d.output_times == std::vector<double>{0.2, 0.6});

  const RunConfig o = parse_config("# comment\n[problem]\nname = paper-example\nmu = 0.02  ; trailing\n");
  CHECK(o.problem.mu == 0.02);

  RunConfig s = default_config();
  set_mu(s, 0.04);
  CHECK(s.problem.mu == 0.04);
  CHECK(kind_of([&] { set_mu(s, -1.0); }) == ErrorKind::Config);

  const RunConfig custom = parse_config(
      "[problem]\nA = 0\nB = 0\nF = 0\nu0 = -2\nua = 1\nh_init = 0.3\nT = 0.4\n[output]\ntimes = 0.1, 0.3\n"
      "formats = fld1, csv\n[numerics]\nscheme = heun\nfastpath = yes\norder = 1\n");
  CHECK(custom.problem.name == "custom");
  CHECK(custom.output_times.size() == 2u);
  CHECK(custom.formats.size() == 2u);
  CHECK(custom.scheme == TimeScheme::Heun);
  CHECK(custom.fastpath);
  CHECK(custom.order == 1);
}

TEST_CASE("the shipped example config matches the built-in problem") {
  const RunConfig c = load_config(fs::path(RDAFRONT_SOURCE_DIR) / "configs" / "paper-example.ini");
  const RunConfig d = default_config("paper-example");
  CHECK(c.problem.x0 == d.problem.x0);
  CHECK(c.problem.L == d.problem.L);
  CHECK(c.problem.T == d.problem.T);
  CHECK(c.problem.mu == d.problem.mu);
  CHECK(c.grid.nz == d.grid.nz);
  CHECK(c.grid.outer_nz == d.grid.outer_nz);
  CHECK(c.output_times == d.output_times);
  CHECK(c.mu_list == std::vector<double>{0.04, 0.02, 0.01});
  for (double x : {-0.9, -0.3, 0.4}) {
    for (double z : {0.1, 0.7}) {
      const auto b = Bindings::xyz(x, 0.5 * x, z);
      CHECK(eval(c.problem.A, b) == doctest::Approx(eval(d.problem.A, b)).epsilon(1e-14));
      CHECK(eval(c.problem.B, b) == doctest::Approx(eval(d.problem.B, b)).epsilon(1e-14));
      CHECK(eval(c.problem.F, b) == doctest::Approx(eval(d.problem.F, b)).epsilon(1e-14));
    }
  }
}

TEST_CASE("config errors name the section, key and line") {
  CHECK(kind_of([] { parse_config("[grid]\nnx = 16\n"); }) == ErrorKind::Config);
  CHECK(message_of([] { parse_config("[grid]\nnx = 16\n"); }).find("[problem]") != std::string::npos);

  const std::string bad_key = message_of([] { parse_config("[problem]\nname = paper-example\nfoo = 1\n", "c.ini"); });
  CHECK(bad_key.find("c.ini:3") != std::string::npos);
  CHECK(bad_key.find("foo") != std::string::npos);

  CHECK(kind_of([] { parse_config("[problem]\nname = paper-example\nmu = abc\n"); }) == ErrorKind::Config);
  CHECK(kind_of([] { parse_config("[problem]\nA = sin(\nB = 0\nF = 0\nu0 = -1\nua = 1\nh_init = 0\n"); }) ==
        ErrorKind::Config);
  CHECK(kind_of([] { parse_config("[problem]\nname = nope\n"); }) == ErrorKind::Config);
  CHECK(kind_of([] { parse_config("[bogus]\n"); }) == ErrorKind::Config);
  CHECK(kind_of([] { parse_config("[problem]\nname = paper-example\n[grid]\nnx = 4\n"); }) == ErrorKind::Config);
  CHECK(kind_of([] { parse_config("[problem]\nname = paper-example\n[output]\ntimes = 0.5, 0.2\n"); }) ==
        ErrorKind::Config);
  CHECK(kind_of([] { parse_config("[problem]\nname = paper-example\n[output]\ntimes = 2\n"); }) ==
        ErrorKind::Config);
  CHECK(kind_of([] { parse_config("[problem]\nname = paper-example\n[output]\nformats = png\n"); }) ==
        ErrorKind::Config);
  CHECK(kind_of([] { load_config("/nonexistent/rdafront.ini"); }) == ErrorKind::Config);
}

TEST_CASE("a constant problem violates the sign invariant") {
  CHECK(kind_of([] { parse_config("[problem]\nA = 0\nB = 0\nF = 0\nu0 = 2\nua = 2\nh_init = 0.5\n"); }) ==
        ErrorKind::Config);
}

TEST_CASE("sweep helpers") {
  CHECK(sweep_nz(0.01, 1.0) == 257);
  CHECK(sweep_nz(0.02, 1.0) == 129);
  CHECK(sweep_nz(0.04, 1.0) == 65);
  CHECK(loglog_slope({0.04, 0.02, 0.01}, {0.4, 0.2, 0.1}) == doctest::Approx(1.0));
  CHECK(loglog_slope({0.04, 0.01}, {0.2, 0.1}) == doctest::Approx(0.5));
  CHECK_THROWS_AS(loglog_slope({0.1}, {0.1}), Error);

  const RunConfig cfg = tiny_config();
  CHECK(exit_code_for(Error(kind_of([&] { run_mu_sweep(cfg, {0.02, 0.04}); }), "harness.run_mu_sweep", "")) == 2);
  CHECK(kind_of([&] { run_mu_sweep(cfg, {}); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([&] { run_mu_sweep(cfg, {0.1, 0.1}); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("a single-mu sweep reports the slope as n/a") {
  RunConfig cfg = tiny_config();
  const SweepReport r = run_mu_sweep(cfg, {0.2});
  REQUIRE(r.rows.size() == 1u);
  CHECK(r.rows[0].nz == sweep_nz(0.2, 1.0));
  CHECK(std::isfinite(r.rows[0].error));
  CHECK_FALSE(r.slope.has_value());
  const fs::path dir = scratch("sweep");
  write_sweep_report(r, dir);
  CHECK(slurp(dir / "sweep.txt").find("log-log slope n/a") != std::string::npos);
  CHECK(slurp(dir / "sweep.csv").rfind("mu,nz,err_u0\n", 0) == 0);
}

TEST_CASE("exit codes follow the stage") {
  CHECK(exit_code_for(Error(ErrorKind::Config, "harness.load_config", "x")) == 2);
  CHECK(exit_code_for(Error(ErrorKind::InvalidArgument, "harness.cli", "x")) == 2);
  CHECK(exit_code_for(Error(ErrorKind::Syntax, "expr.parse", "x")) == 10);
  CHECK(exit_code_for(Error(ErrorKind::InvalidArgument, "core.Grid3D", "x")) == 11);
  CHECK(exit_code_for(Error(ErrorKind::BlowUp, "characteristics.integrate", "x")) == 12);
  CHECK(exit_code_for(Error(ErrorKind::DivisionHazard, "outer.compute_u1", "x")) == 13);
  CHECK(exit_code_for(Error(ErrorKind::FrontEscape, "front.solve_h0", "x")) == 14);
  CHECK(exit_code_for(Error(ErrorKind::Existence, "inner.q0", "x")) == 15);
  CHECK(exit_code_for(Error(ErrorKind::LayerAssembly, "assembler.assemble_U1", "x")) == 16);
  CHECK(exit_code_for(Error(ErrorKind::Divergence, "reference", "x")) == 17);
  CHECK(exit_code_for(Error(ErrorKind::Io, "harness.write_report", "x")) == 18);
}

TEST_CASE("level set heights") {
  const Grid3D g(8, 8, 11, 0, 1, 0, 1, 1);
  const auto f = ScalarField3D::generate(g, [](const Point3& p) { return p.z - 0.35; });
  const auto h = level_set_heights(f, std::vector<double>(64, 0.0));
  for (double v : h) CHECK(v == doctest::Approx(0.35));
  const auto none = level_set_heights(f, std::vector<double>(64, 5.0));
  for (double v : none) CHECK(std::isnan(v));
}

TEST_CASE("compare reports are deterministic") {
  RunConfig cfg = tiny_config();
  const fs::path a_dir = scratch("a"), b_dir = scratch("b");
  cfg.out_dir = a_dir;
  const ComparisonReport a = run_compare(cfg, true);
  write_report(a, a_dir);
  cfg.out_dir = b_dir;
  const ComparisonReport b = run_compare(cfg, true);
  write_report(b, b_dir);
  REQUIRE(a.times.size() == 1u);
  CHECK(a.times[0].t == 0.1);
  CHECK(std::isfinite(a.times[0].err_u0));
  CHECK_FALSE(a.times[0].err_u1.has_value());
  for (const char* name : {"report.txt", "report.csv"}) {
    const std::string ta = slurp(a_dir / name);
    CHECK_FALSE(ta.empty());
    CHECK(ta == slurp(b_dir / name));
  }
  CHECK(fs::exists(a_dir / "timings.txt"));
}
