#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "rdafront/error.hpp"
#include "rdafront/expr.hpp"
#include "rdafront/problem.hpp"

using namespace rdafront;

namespace {

double at(const char* text, double x, double y = 0.0, double z = 0.0, double u = 0.0) {
  return eval(parse(text), Bindings::uxyz(u, x, y, z));
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::InvalidArgument;
}

Bindings all_vars(double x, double y, double z, double u, double t) {
  return Bindings::uxyz(u, x, y, z).set(Var::T, t);
}

}  // namespace

TEST_CASE("parse and eval examples") {
  CHECK(at("cos(pi*x/4)", 0.0) == doctest::Approx(1.0));
  CHECK(at("sin(pi*x)", 0.5) == doctest::Approx(1.0));
  CHECK(at("-u", 0.0, 0.0, 0.0, -6.0) == 6.0);
  const char* f = "cos(pi*x/4)*cos(pi*y/4)*cos(pi*z/4)";
  CHECK(at(f, 0, 0, 0) == doctest::Approx(1.0));
  CHECK(at(f, 2, 0, 0) == doctest::Approx(0.0));
  CHECK(std::fabs(at("sin(pi*x)", 1.0)) < 1e-15);
}

TEST_CASE("precedence and associativity") {
  CHECK(at("2+3*4", 0) == 14.0);
  CHECK(at("2^3^2", 0) == 64.0);
  CHECK(at("-2^2", 0) == -4.0);
  CHECK(at("8/4/2", 0) == 1.0);
  CHECK(at("10-4-3", 0) == 3.0);
  CHECK(at("(2+3)*4", 0) == 20.0);
  CHECK(at("2*-x", 3.0) == -6.0);
  CHECK(at("1.5e2 + .5", 0) == 150.5);
  CHECK(at("neg(x) + abs(-2)", 1.0) == 1.0);
}

TEST_CASE("parse errors") {
  CHECK(kind_of([] { parse(""); }) == ErrorKind::Syntax);
  CHECK(kind_of([] { parse("1 +"); }) == ErrorKind::Syntax);
  CHECK(kind_of([] { parse("(x"); }) == ErrorKind::Syntax);
  CHECK(kind_of([] { parse("x y"); }) == ErrorKind::Syntax);
  CHECK(kind_of([] { parse("w + 1"); }) == ErrorKind::UnknownIdentifier);
  CHECK(kind_of([] { parse("sinh(x)"); }) == ErrorKind::UnknownIdentifier);
  try {
    parse("x + * 2");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("offset 4") != std::string::npos);
  }
}

TEST_CASE("eval errors") {
  CHECK(kind_of([] { eval(parse("x + u"), Bindings::xyz(1, 2, 3)); }) == ErrorKind::UnboundVariable);
  CHECK(kind_of([] { eval(parse("log(x)"), Bindings::xyz(-1, 0, 0)); }) == ErrorKind::Domain);
  CHECK(kind_of([] { eval(parse("1/x"), Bindings::xyz(0, 0, 0)); }) == ErrorKind::Domain);
  CHECK(kind_of([] { eval(parse("sqrt(x)"), Bindings::xyz(-4, 0, 0)); }) == ErrorKind::Domain);
  CHECK(eval(parse("x*y"), std::map<std::string, double>{{"x", 2.0}, {"y", 3.5}}) == 7.0);
  CHECK(kind_of([] { eval(parse("x"), std::map<std::string, double>{{"q", 1.0}}); }) ==
        ErrorKind::UnknownIdentifier);
}

TEST_CASE("differentiate examples") {
  const Expr d = differentiate(parse("sin(pi*x)"), Var::X);
  CHECK(eval(d, Bindings::xyz(0, 0, 0)) == doctest::Approx(std::numbers::pi));
  CHECK(differentiate(parse("cos(pi*x/4)"), Var::Y).is_constant(0.0));
  CHECK(eval(differentiate(parse("u^2/2"), Var::U), Bindings::uxyz(-6, 0, 0, 0)) == doctest::Approx(-6.0));
  CHECK(eval(differentiate(parse("t*x"), Var::T), all_vars(3, 0, 0, 0, 1)) == 3.0);
}

TEST_CASE("derivatives match central differences") {
  const char* exprs[] = {"x^3*y - exp(z)*u", "tanh(2*x+y)", "sqrt(x*x+1)*log(2+cos(z))", "abs(x-0.3)*tan(y/3)",
                         "x^y", "(x+2)^(u/3)", "u^2/2 + sin(pi*x)*cos(pi*y/4)"};
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(0.1, 0.9);
  for (const char* text : exprs) {
    const Expr e = parse(text);
    for (Var v : {Var::X, Var::Y, Var::Z, Var::U}) {
      const Expr de = differentiate(e, v);
      for (int s = 0; s < 20; ++s) {
        double p[kVarCount] = {d(rng), d(rng), d(rng), d(rng), 0.0};
        Bindings b;
        for (int i = 0; i < kVarCount; ++i) b.set(static_cast<Var>(i), p[i]);
        const double hstep = 1e-5;
        Bindings bp = b, bm = b;
        bp.value[static_cast<int>(v)] += hstep;
        bm.value[static_cast<int>(v)] -= hstep;
        const double fd = (eval(e, bp) - eval(e, bm)) / (2 * hstep);
        CHECK(std::fabs(eval(de, b) - fd) <= 1e-6 * (1.0 + std::fabs(fd)));
      }
    }
  }
}

TEST_CASE("registry coefficients differentiate consistently") {
  std::mt19937_64 rng(17);
  for (const auto& name : registry_names()) {
    const ProblemSpec p = registry_problem(name);
    std::uniform_real_distribution<double> dx(p.x0, p.x0 + p.L), dy(p.y0, p.y0 + p.M), dz(0.0, p.a),
        du(-6.0, 4.0);
    for (const Expr* e : {&p.A, &p.B, &p.F}) {
      for (Var v : {Var::X, Var::Y, Var::Z, Var::U}) {
        const Expr de = differentiate(*e, v);
        for (int s = 0; s < 25; ++s) {
          Bindings b = Bindings::uxyz(du(rng), dx(rng), dy(rng), dz(rng)).set(Var::T, 0.0);
          const double hstep = 1e-5;
          Bindings bp = b, bm = b;
          bp.value[static_cast<int>(v)] += hstep;
          bm.value[static_cast<int>(v)] -= hstep;
          const double fd = (eval(*e, bp) - eval(*e, bm)) / (2 * hstep);
          CHECK(std::fabs(eval(de, b) - fd) <= 1e-6 * (1.0 + std::fabs(fd)));
        }
      }
    }
  }
}

TEST_CASE("printing round trips") {
  const char* exprs[] = {"-2^2", "2^3^2", "x - (y - z)", "a", "cos(pi*x/4)*cos(pi*y/4)*cos(pi*z/4)",
                         "-u*-x/(1+t)", "exp(-x^2)/sqrt(2*pi)", "1e-300*x + 3.0000000000000004"};
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  for (const char* text : exprs) {
    if (std::string(text) == "a") {
      CHECK_THROWS_AS(parse(text), Error);
      continue;
    }
    const Expr e = parse(text);
    const Expr back = parse(to_string(e));
    for (int s = 0; s < 100; ++s) {
      const Bindings b = all_vars(d(rng), d(rng), d(rng), d(rng), std::fabs(d(rng)));
      CHECK(eval(back, b) == eval(e, b));
    }
  }
}

TEST_CASE("compiled form agrees with the tree") {
  const Expr e = parse("sin(pi*x)*u - cos(y)^2 + z/(2+t) - abs(x-y)");
  const CompiledExpr c(e);
  CHECK(c.uses() == 0b11111u);
  CHECK_FALSE(c.is_constant());
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int s = 0; s < 200; ++s) {
    const Bindings b = all_vars(d(rng), d(rng), d(rng), d(rng), std::fabs(d(rng)));
    CHECK(c(b) == doctest::Approx(eval(e, b)).epsilon(1e-15));
  }
  CHECK(CompiledExpr(parse("2*3+1")).is_constant());
  CHECK(CompiledExpr(parse("x + z")).uses() == ((1u << 0) | (1u << 2)));
  CHECK_THROWS_AS(CompiledExpr(parse("log(x)"))(-1.0, 0.0, 0.0), Error);
}

TEST_CASE("depends_on and constant folding") {
  const Expr e = parse("x*0 + 2*3");
  CHECK_FALSE(e.depends_on(Var::X));
  CHECK(parse("sin(y)").depends_on(Var::Y));
  CHECK(differentiate(parse("7*x"), Var::X).is_constant(7.0));
}
