#include <doctest.h>

#include <cmath>
#include <random>

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
  s.h_init = parse("0.2");
  s.x0 = s.y0 = 0.0;
  s.L = s.M = 1.0;
  s.a = 1.0;
  s.T = 0.5;
  return s;
}

struct ExampleSetup {
  ProblemSpec spec = registry_problem("paper-example");
  Grid3D grid{16, 16, 17, -1.0, 2.0, -1.0, 2.0, 1.0};
  OuterBranch minus = build_outer(spec, Branch::Minus, grid);
  OuterBranch plus = build_outer(spec, Branch::Plus, grid);
};

const ExampleSetup& example_setup() {
  static const ExampleSetup s;
  return s;
}

}  // namespace

TEST_CASE("solve_h0 with a constant right side moves at unit speed") {
  const ProblemSpec s = flat_spec();
  const Grid3D g(8, 8, 9, 0, 1, 0, 1, 1);
  const auto pm = ScalarField3D::constant(g, -6.0), pp = ScalarField3D::constant(g, 4.0);
  FrontOptions opt;
  opt.nx = opt.ny = 8;
  const auto evo = solve_h0(s, pm, pp, {0.0, 0.1, 0.3}, opt);
  REQUIRE(evo.snapshots.size() == 3u);
  for (const auto& f : evo.snapshots) {
    for (double h : f.h()) CHECK(h == doctest::Approx(0.2 + f.t()).epsilon(1e-12));
    for (double ht : f.h_t()) CHECK(ht == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(evo.at(0.1).t() == 0.1);
  CHECK_THROWS_AS(evo.at(0.2), Error);
}

TEST_CASE("solve_h0 reports a front leaving the domain") {
  ProblemSpec s = flat_spec();
  const Grid3D g(8, 8, 9, 0, 1, 0, 1, 1);
  const auto pm = ScalarField3D::constant(g, -6.0), pp = ScalarField3D::constant(g, 4.0);
  FrontOptions opt;
  opt.nx = opt.ny = 8;
  try {
    solve_h0(s, pm, pp, {0.9}, opt);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::FrontEscape);
  }
}

TEST_CASE("example front stays inside the domain and rises") {
  const auto& P = example_setup();
  FrontOptions opt;
  opt.nx = opt.ny = 32;
  std::vector<double> times;
  for (int k = 0; k <= 17; ++k) times.push_back(0.05 * k);
  const auto evo = solve_h0(P.spec, P.minus.phi, P.plus.phi, times, opt);
  REQUIRE(evo.snapshots.size() == times.size());
  for (std::size_t s = 0; s < evo.snapshots.size(); ++s) {
    const auto& f = evo.snapshots[s];
    CHECK(f.min_h() >= 0.0);
    CHECK(f.max_h() < 1.0);
    if (s > 0) {
      for (std::size_t n = 0; n < f.h().size(); ++n) CHECK(f.h()[n] > evo.snapshots[s - 1].h()[n]);
    }
    // the stored grid is one period; interpolation across the seam is continuous
    for (double y : {-1.0, -0.3, 0.55}) {
      CHECK(std::fabs(f.height(-1.0, y) - f.height(1.0, y)) <= 1e-8);
      CHECK(std::fabs(f.height(y, -1.0) - f.height(y, 1.0)) <= 1e-8);
    }
  }
}

TEST_CASE("example front value is stable under step halving") {
  const auto& P = example_setup();
  FrontOptions a, b;
  a.nx = a.ny = b.nx = b.ny = 16;
  b.step = a.step / 2;
  const auto ea = solve_h0(P.spec, P.minus.phi, P.plus.phi, {0.2}, a);
  const auto eb = solve_h0(P.spec, P.minus.phi, P.plus.phi, {0.2}, b);
  CHECK(std::fabs(ea.at(0.2).height(0.0, 0.0) - eb.at(0.2).height(0.0, 0.0)) <= 1e-5);
}

TEST_CASE("eval_H0 examples and identities") {
  CHECK(eval_H0(1.0, -6.0, 4.0, 1.0) == doctest::Approx(0.0));
  CHECK(eval_H0(0.0, -6.0, 4.0, 1.0) == doctest::Approx(10.0));
  CHECK(eval_H0(0.3, 2.0, 2.0, 0.7) == 0.0);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dm(-8, -0.5), dp(0.5, 8), da(1e-3, 1.0), dv(-10, 10);
  for (int s = 0; s < 1000; ++s) {
    const double m = dm(rng), p = dp(rng), a = da(rng), V = dv(rng);
    CHECK(std::fabs(eval_H0(-0.5 * (m + p), m, p, a)) <= 1e-12);
    const double closed = eval_H0_closed(V, m, p, a);
    CHECK(std::fabs(eval_H0(V, m, p, a) - closed) <= 1e-12 * std::max(1.0, std::fabs(closed)));
    // the phase trajectories at the matching point differ by H0
    const LayerParams lp = LayerParams::make(V, m, p, a);
    const double d = phase_trajectory(lp.phiStar, Branch::Minus, lp) - phase_trajectory(lp.phiStar, Branch::Plus, lp);
    CHECK(std::fabs(d - closed) <= 1e-8 * std::max(1.0, std::fabs(closed)));
  }
}

TEST_CASE("H0Function partials match the closed form") {
  const ProblemSpec s = flat_spec();
  const Grid3D g(8, 8, 9, 0, 1, 0, 1, 1);
  const auto pm = ScalarField3D::constant(g, -6.0), pp = ScalarField3D::constant(g, 4.0);
  const H0Function H(s, pm, pp);
  const H0Slots slots{0.4, 0.0, 0.0, 0.5};
  CHECK(H(0.3, 0.3, slots) == doctest::Approx(eval_H0_closed(0.5, -6, 4, 1)));
  const H0Partials d = H.partials(0.3, 0.3, slots);
  CHECK(d.dh == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(d.dht == doctest::Approx(-10.0).epsilon(1e-8));
  // A = B = 0 and a flat front: alpha_z is even in h_x
  CHECK(std::fabs(d.dhx) <= 1e-6);
}

TEST_CASE("linear transport: zero forcing and the scalar ODE") {
  const auto zero = solve_linear_transport([](double, double, double) { return TransportCoefficients{}; }, 8, 8,
                                           0, 1, 0, 1, {0.0, 0.5});
  for (const auto& f : zero.snapshots)
    for (double v : f.h()) CHECK(v == 0.0);

  const double c = 0.8, k = 0.3;
  for (double at : {1.0, 0.5}) {
    const auto evo = solve_linear_transport(
        [=](double, double, double) { return TransportCoefficients{at, 0.0, 0.0, c, k}; }, 8, 8, 0, 1, 0, 1,
        {0.0, 0.25, 0.5});
    for (const auto& f : evo.snapshots) {
      const double expect = (k / c) * (std::exp(-c * f.t() / at) - 1.0);
      for (double v : f.h()) CHECK(v == doctest::Approx(expect).epsilon(1e-8));
      for (double v : f.h_t()) CHECK(v == doctest::Approx(-(c * expect + k) / at).epsilon(1e-8));
    }
  }
}

TEST_CASE("linear transport follows advection") {
  // w_t + w_x + sin(2 pi x) = 0 with zero initial data
  const double pi = 3.14159265358979323846;
  const auto evo = solve_linear_transport(
      [=](double x, double, double) { return TransportCoefficients{1.0, 1.0, 0.0, 0.0, std::sin(2 * pi * x)}; }, 16,
      4, 0, 1, 0, 1, {0.3}, 0.005);
  const auto& f = evo.at(0.3);
  for (int i = 0; i < 16; ++i) {
    const double x = f.x(i);
    // w(x, t) = -int_0^t sin(2 pi (x - t + s)) ds
    const double expect = -(std::cos(2 * pi * (x - 0.3)) - std::cos(2 * pi * x)) / (2 * pi);
    CHECK(f.h()[f.index(i, 1)] == doctest::Approx(expect).epsilon(1e-6));
  }
}

TEST_CASE("H1 vanishes for symmetric constant data") {
  const ProblemSpec s = flat_spec();
  const Grid3D g(8, 8, 9, 0, 1, 0, 1, 1);
  auto make = [&](Branch b, double c) {
    OuterBranch o;
    o.branch = b;
    o.phi = ScalarField3D::constant(g, c);
    o.phi_x = o.phi_y = o.phi_z = o.W = o.f1bar = o.u1 = ScalarField3D::constant(g, 0.0);
    return o;
  };
  const OuterBranch m = make(Branch::Minus, -6.0), p = make(Branch::Plus, 4.0);
  const FrontSurface surf(8, 8, 0, 1, 0, 1, 0.1, std::vector<double>(64, 0.3), std::vector<double>(64, 1.0));
  const LayerModel model(s, m, p, surf);
  CHECK(std::fabs(eval_H1(model, 0.25, 0.5)) <= 1e-12);
}

TEST_CASE("example H1 and h1") {
  const auto& P = example_setup();
  FrontOptions opt;
  opt.nx = opt.ny = 16;
  const auto evo = solve_h0(P.spec, P.minus.phi, P.plus.phi, {0.0, 0.1, 0.2}, opt);
  const LayerModel model(P.spec, P.minus, P.plus, evo.at(0.2));
  const double a = eval_H1(model, 0.1, -0.2, {128, 1e-12, 4});
  const double b = eval_H1(model, 0.1, -0.2, {512, 1e-12, 4});
  CHECK(std::isfinite(a));
  CHECK(std::fabs(a - b) <= 1e-3);

  H1Options h1opt;
  h1opt.quadrature = {64, 1e-12, 4};
  const auto h1 = solve_h1(P.spec, P.minus, P.plus, evo, {0.0, 0.2}, h1opt);
  for (double v : h1.at(0.0).h()) CHECK(v == 0.0);
  double mx = 0.0;
  for (double v : h1.at(0.2).h()) mx = std::max(mx, std::fabs(v));
  CHECK(std::isfinite(mx));
  CHECK(mx <= 10.0);
  MESSAGE("example max |h1| at t = 0.2: " << mx);
}
