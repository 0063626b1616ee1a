#include <doctest.h>

#include <cmath>

#include "rdafront/assembler.hpp"
#include "rdafront/error.hpp"
#include "rdafront/front.hpp"

using namespace rdafront;

namespace {

ProblemSpec flat_spec() {
  ProblemSpec s;
  s.name = "flat";
  s.A = parse("0");
  s.B = parse("0");
  s.F = parse("0");
  s.u0 = parse("-6");
  s.ua = parse("4");
  s.h_init = parse("0.5");
  s.x0 = s.y0 = 0.0;
  s.L = s.M = 1.0;
  s.a = 1.0;
  s.mu = 0.01;
  return s;
}

OuterBranch constant_branch(const Grid3D& g, Branch b, double c) {
  OuterBranch o;
  o.branch = b;
  o.phi = ScalarField3D::constant(g, c);
  o.phi_x = o.phi_y = o.phi_z = o.W = o.f1bar = o.u1 = ScalarField3D::constant(g, 0.0);
  return o;
}

// flat front at z = 0.5 moving with the speed that makes H0 vanish
struct FlatSetup {
  ProblemSpec spec = flat_spec();
  Grid3D outer{8, 8, 9, 0, 1, 0, 1, 1};
  OuterBranch minus = constant_branch(outer, Branch::Minus, -6.0);
  OuterBranch plus = constant_branch(outer, Branch::Plus, 4.0);
  FrontSurface front{8, 8, 0, 1, 0, 1, 0.0, std::vector<double>(64, 0.5), std::vector<double>(64, 1.0)};
};

struct ExampleSetup {
  ProblemSpec spec = registry_problem("paper-example");
  Grid3D grid{16, 16, 17, -1.0, 2.0, -1.0, 2.0, 1.0};
  OuterBranch minus = build_outer(spec, Branch::Minus, grid);
  OuterBranch plus = build_outer(spec, Branch::Plus, grid);
  FrontSurface front;
  ExampleSetup() {
    FrontOptions opt;
    opt.nx = opt.ny = 16;
    front = solve_h0(spec, minus.phi, plus.phi, {0.2}, opt).at(0.2);
  }
};

const ExampleSetup& example_setup() {
  static const ExampleSetup s;
  return s;
}

}  // namespace

TEST_CASE("U0 takes the matching value on the front") {
  const FlatSetup F;
  const double star = LayerParams::make(1.0, -6.0, 4.0, 1.0).phiStar;
  const Grid3D g(4, 4, 101, 0, 1, 0, 1, 1);
  const auto U = assemble_U0(F.spec, F.minus, F.plus, F.front, g);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      CHECK(U.field.at(i, j, 50) == doctest::Approx(star).epsilon(1e-12));
      CHECK(U.field.at(i, j, 0) == doctest::Approx(-6.0).epsilon(1e-12));
      CHECK(U.field.at(i, j, 100) == doctest::Approx(4.0).epsilon(1e-12));
    }
  CHECK(U.order == 0);
  CHECK(U.mu == 0.01);
  CHECK(U.outer_only_nodes > 0u);
}

TEST_CASE("U0 slopes match across the front") {
  const FlatSetup F;
  const Grid3D g(4, 4, 2001, 0, 1, 0, 1, 1);
  const auto U = assemble_U0(F.spec, F.minus, F.plus, F.front, g);
  const double hz = g.hz();
  const double below = (U.field.at(1, 1, 1000) - U.field.at(1, 1, 999)) / hz;
  const double above = (U.field.at(1, 1, 1001) - U.field.at(1, 1, 1000)) / hz;
  CHECK(below > 0.0);
  CHECK(std::fabs(below - above) <= F.spec.mu * std::fabs(below));
  // monotone through the layer
  for (int k = 1; k < g.nz(); ++k) CHECK(U.field.at(2, 3, k) >= U.field.at(2, 3, k - 1) - 1e-12);
}

TEST_CASE("U1 reduces to U0 without first-order ingredients") {
  const FlatSetup F;
  const Grid3D g(4, 4, 41, 0, 1, 0, 1, 1);
  const FrontSurface h1(8, 8, 0, 1, 0, 1, 0.0, std::vector<double>(64, 0.0), std::vector<double>(64, 0.0));
  const auto U0 = assemble_U0(F.spec, F.minus, F.plus, F.front, g);
  const auto U1 = assemble_U1(F.spec, F.minus, F.plus, F.front, h1, g);
  CHECK(U1.order == 1);
  for (std::size_t n = 0; n < g.size(); ++n) CHECK(std::fabs(U1.field[n] - U0.field[n]) <= 1e-10);
}

TEST_CASE("corrected_front combines heights and speeds") {
  const FrontSurface h0(4, 4, 0, 1, 0, 1, 0.3, std::vector<double>(16, 0.5), std::vector<double>(16, 1.0));
  const FrontSurface h1(4, 4, 0, 1, 0, 1, 0.3, std::vector<double>(16, 2.0), std::vector<double>(16, -1.0));
  const FrontSurface c = corrected_front(h0, h1, 0.01);
  for (double v : c.h()) CHECK(v == doctest::Approx(0.52));
  for (double v : c.h_t()) CHECK(v == doctest::Approx(0.99));
  CHECK(c.t() == 0.3);
  const FrontSurface bad(8, 8, 0, 1, 0, 1, 0.3, std::vector<double>(64, 0.0));
  CHECK_THROWS_AS(corrected_front(h0, bad, 0.01), Error);
}

TEST_CASE("assembler rejects a front on other periods") {
  const FlatSetup F;
  const FrontSurface other(8, 8, 0, 2, 0, 1, 0.0, std::vector<double>(64, 0.5));
  try {
    assemble_U0(F.spec, F.minus, F.plus, other, Grid3D(4, 4, 5, 0, 1, 0, 1, 1));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidArgument);
  }
}

TEST_CASE("example U0 bottom face and branch ranges") {
  const auto& P = example_setup();
  const Grid3D g(8, 8, 33, P.spec.x0, P.spec.L, P.spec.y0, P.spec.M, P.spec.a);
  const auto U = assemble_U0(P.spec, P.minus, P.plus, P.front, g);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      CHECK(std::fabs(U.field.at(i, j, 0) + 6.0) <= 1e-6);
      CHECK(std::fabs(U.field.at(i, j, g.nz() - 1) - 4.0) <= 1e-6);
    }
  for (double v : U.field.values()) {
    CHECK(std::isfinite(v));
    CHECK(v >= -6.5);
    CHECK(v <= 4.5);
  }
}

TEST_CASE("example fastpath agrees with the general assembly") {
  const auto& P = example_setup();
  const Grid3D g(16, 16, 65, P.spec.x0, P.spec.L, P.spec.y0, P.spec.M, P.spec.a);
  const auto G = assemble_U0(P.spec, P.minus, P.plus, P.front, g);
  const auto Fp = assemble_U0(P.spec, P.minus, P.plus, P.front, g, AssemblyMode::ExampleFastpath);
  double num = 0.0, den = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n) {
    num += (G.field[n] - Fp.field[n]) * (G.field[n] - Fp.field[n]);
    den += G.field[n] * G.field[n];
  }
  const double rel = std::sqrt(num / den);
  MESSAGE("fastpath relative L2 gap: " << rel);
  CHECK(rel <= 0.05);
}
