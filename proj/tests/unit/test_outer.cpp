#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rdafront/error.hpp"
#include "rdafront/outer.hpp"

using namespace rdafront;

namespace {

ProblemSpec flat_spec(const char* F) {
  ProblemSpec s;
  s.name = "flat";
  s.A = parse("0");
  s.B = parse("0");
  s.F = parse(F);
  s.u0 = parse("-6");
  s.ua = parse("4");
  s.h_init = parse("0.2");
  s.x0 = s.y0 = 0.0;
  s.L = s.M = 1.0;
  s.a = 1.0;
  return s;
}

OuterBranch constant_branch(const Grid3D& g, Branch b, double c) {
  OuterBranch o;
  o.branch = b;
  o.phi = ScalarField3D::constant(g, c);
  auto d = fd_partials(o.phi);
  o.phi_x = d.dx;
  o.phi_y = d.dy;
  o.phi_z = d.dz;
  o.f1bar = fd_laplacian(o.phi);
  return o;
}

// degenerate residual A phi_x + B phi_y - phi phi_z + F away from the z faces
double residual(const ProblemSpec& spec, const ScalarField3D& phi) {
  const Grid3D& g = phi.grid();
  const auto d = fd_partials(phi);
  const CompiledExpr A(spec.A), B(spec.B), F(spec.F);
  double r = 0.0;
  for (int k = 1; k + 1 < g.nz(); ++k)
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) {
        const double x = g.x(i), y = g.y(j), z = g.z(k), p = phi.at(i, j, k);
        const std::size_t n = g.index(i, j, k);
        r = std::max(r, std::fabs(A(x, y, z) * d.dx[n] + B(x, y, z) * d.dy[n] - p * d.dz[n] + F(p, x, y, z)));
      }
  return r;
}

}  // namespace

TEST_CASE("compute_phi examples") {
  const ProblemSpec example = registry_problem("paper-example");
  const Grid3D g(8, 8, 9, example.x0, example.L, example.y0, example.M, example.a);
  const auto phi = compute_phi(example, Branch::Minus, g);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) CHECK(phi.at(i, j, 0) == -6.0);
  const auto phiP = compute_phi(example, Branch::Plus, g);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) CHECK(phiP.at(i, j, g.nz() - 1) == 4.0);
}

TEST_CASE("branch signs hold for every registry problem") {
  for (const auto& name : registry_names()) {
    const ProblemSpec p = registry_problem(name);
    const Grid3D g(8, 8, 9, p.x0, p.L, p.y0, p.M, p.a);
    const auto m = compute_phi(p, Branch::Minus, g);
    const auto q = compute_phi(p, Branch::Plus, g);
    CHECK(*std::max_element(m.values().begin(), m.values().end()) < 0.0);
    CHECK(*std::min_element(q.values().begin(), q.values().end()) > 0.0);
  }
}

TEST_CASE("degenerate residual converges at second order") {
  // smooth periodic data; cos(pi x/4) in the built-in example has a kink at the seam
  ProblemSpec s = registry_problem("paper-example");
  s.B = parse("0.5*cos(pi*x)");
  s.F = parse("-cos(pi*x)*cos(pi*y)*cos(pi*z/4)");
  const Grid3D g1(16, 16, 17, s.x0, s.L, s.y0, s.M, s.a);
  const Grid3D g2(32, 32, 33, s.x0, s.L, s.y0, s.M, s.a);
  const double r1 = residual(s, compute_phi(s, Branch::Minus, g1));
  const double r2 = residual(s, compute_phi(s, Branch::Minus, g2));
  CHECK(std::log2(r1 / r2) >= 1.8);
}

TEST_CASE("coefficients are evaluated on the periodic extension") {
  const ProblemSpec example = registry_problem("paper-example");
  const auto prob = degenerate_problem(example, Branch::Minus);
  const CharState a = prob.rhs({0.3, 1.2, 0.5, -6.0});
  const CharState b = prob.rhs({0.3, -0.8, 0.5, -6.0});
  CHECK(a.u == b.u);
  const CharState c = prob.rhs({2.3, 0.1, 0.5, -6.0});
  const CharState d = prob.rhs({0.3, 0.1, 0.5, -6.0});
  CHECK(c.x == doctest::Approx(d.x).epsilon(1e-14));
  CHECK(c.y == doctest::Approx(d.y).epsilon(1e-14));
}

TEST_CASE("compute_W examples") {
  const Grid3D g(8, 8, 65, 0, 1, 0, 1, 1);
  ProblemSpec s = flat_spec("1");
  auto o = constant_branch(g, Branch::Minus, -6.0);
  const auto W0 = compute_W(s, o);
  for (double v : W0.values()) CHECK(v == 0.0);

  s.F = parse("u*cos(x)");
  const auto W = compute_W(s, o);
  for (int i = 0; i < g.nx(); ++i) CHECK(W.at(i, 3, 7) == doctest::Approx(std::cos(g.x(i))).epsilon(1e-14));

  s.F = parse("1");
  o.phi = ScalarField3D::generate(g, [](const Point3& p) { return -std::sqrt(36.0 + 2.0 * p.z); });
  o.phi_z = fd_partials(o.phi).dz;
  CHECK(compute_W(s, o).at(2, 2, 0) == doctest::Approx(1.0 / 6.0).epsilon(1e-6));
}

TEST_CASE("compute_u1 vanishes for constant phi") {
  const Grid3D g(8, 8, 17, 0, 1, 0, 1, 1);
  ProblemSpec s = flat_spec("0");
  auto o = constant_branch(g, Branch::Plus, 4.0);
  o.W = compute_W(s, o);
  const auto u1 = compute_u1(s, o);
  for (double v : u1.values()) CHECK(v == 0.0);
}

TEST_CASE("compute_u1 matches a one-dimensional quadrature oracle") {
  const double c = 1.5;
  const Grid3D g(4, 4, 129, 0, 1, 0, 1, 1);
  ProblemSpec s = flat_spec("1.5");
  OuterBranch o;
  o.branch = Branch::Minus;
  auto q = [c](double z) { return 36.0 + 2.0 * c * z; };
  o.phi = ScalarField3D::generate(g, [&](const Point3& p) { return -std::sqrt(q(p.z)); });
  o.W = ScalarField3D::generate(g, [&](const Point3& p) { return c / std::sqrt(q(p.z)); });
  o.f1bar = ScalarField3D::generate(g, [&](const Point3& p) { return c * c * std::pow(q(p.z), -1.5); });
  const auto u1 = compute_u1(s, o, 1);

  // du1/dz = w u1 + g with w = W/phi, g = -f1bar/phi, u1(0) = 0; Simpson on a fine mesh
  auto gsrc = [&](double z) { return c * c / (q(z) * q(z)); };
  auto Wint = [&](double z0, double z1) { return -0.5 * (std::log(q(z1)) - std::log(q(z0))); };
  const int n = 20000;
  double oracle = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double z = static_cast<double>(i) / n;
    const double wt = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    oracle += wt * gsrc(z) * std::exp(Wint(z, 1.0));
  }
  oracle /= 3.0 * n;
  CHECK(std::fabs(u1.at(1, 1, g.nz() - 1) - oracle) <= 1e-6);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) CHECK(u1.at(i, j, 0) == 0.0);
}

TEST_CASE("example u1 is stable under quadrature refinement") {
  const ProblemSpec example = registry_problem("paper-example");
  const Grid3D g(16, 16, 17, example.x0, example.L, example.y0, example.M, example.a);
  OuterBranch o = build_outer(example, Branch::Minus, g);
  const auto fine = compute_u1(example, o, 4);
  CHECK(std::fabs(o.u1.at(8, 8, 8) - fine.at(8, 8, 8)) <= 1e-4);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) CHECK(std::fabs(o.u1.at(i, j, 0)) <= 1e-8);

  OuterBranch p = build_outer(example, Branch::Plus, g);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) CHECK(std::fabs(p.u1.at(i, j, g.nz() - 1)) <= 1e-8);
}

TEST_CASE("compute_u1 reports a vanishing phi") {
  const Grid3D g(4, 4, 9, 0, 1, 0, 1, 1);
  ProblemSpec s = flat_spec("0");
  auto o = constant_branch(g, Branch::Minus, -6.0);
  o.phi = ScalarField3D::generate(g, [](const Point3& p) { return p.z > 0.5 ? 0.0 : -6.0; });
  o.W = ScalarField3D::constant(g, 0.0);
  try {
    compute_u1(s, o);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DivisionHazard);
  }
}

TEST_CASE("Lipschitz sampling") {
  const Grid3D g(16, 16, 17, -1, 2, -1, 2, 1);
  ProblemSpec s = flat_spec("0");
  s.x0 = s.y0 = -1.0;
  s.L = s.M = 2.0;
  s.A = parse("2");
  auto o = constant_branch(g, Branch::Minus, -6.0);
  const auto k0 = check_lipschitz_sampling(s, o, 200);
  CHECK(k0.K_A <= 1e-12);
  CHECK(k0.K_B <= 1e-12);

  s.A = parse("sin(pi*x)");
  const auto k1 = check_lipschitz_sampling(s, o, 500);
  CHECK(k1.K_A <= std::numbers::pi / 6.0 + 1e-9);
  CHECK(k1.K_A > 0.3);
  CHECK_FALSE(k1.flagged);

  const ProblemSpec example = registry_problem("paper-example");
  const Grid3D gp(16, 16, 17, example.x0, example.L, example.y0, example.M, example.a);
  OuterBranch op;
  op.phi = compute_phi(example, Branch::Minus, gp);
  const auto kp = check_lipschitz_sampling(example, op, 500);
  CHECK(std::isfinite(kp.K_A));
  CHECK(std::isfinite(kp.K_B));
  CHECK_FALSE(kp.flagged);

  o.phi = ScalarField3D::constant(g, 0.0);
  CHECK_THROWS_AS(check_lipschitz_sampling(s, o, 10), Error);
}
