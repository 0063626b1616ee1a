#include "rdafront/problem.hpp"

#include <cmath>

#include "rdafront/error.hpp"

namespace rdafront {

namespace {

constexpr const char* kStage = "core.ProblemSpec";

ProblemSpec make(std::string name, const char* A, const char* B, const char* F, const char* u0, const char* ua,
                 const char* h_init) {
  ProblemSpec p;
  p.name = std::move(name);
  p.A = parse(A);
  p.B = parse(B);
  p.F = parse(F);
  p.u0 = parse(u0);
  p.ua = parse(ua);
  p.h_init = parse(h_init);
  return p;
}

}  // namespace

void ProblemSpec::validate() const {
  if (!(mu > 0.0) || !(a > 0.0) || !(L > 0.0) || !(M > 0.0) || !(T > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, kStage, "mu, a, L, M and T must all be positive");
  }
  constexpr int n = 16;
  double max_u0 = -INFINITY, min_ua = INFINITY;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const auto b = Bindings::xyz(x0 + L * i / n, y0 + M * j / n, 0.0);
      max_u0 = std::max(max_u0, eval(u0, b));
      min_ua = std::min(min_ua, eval(ua, b));
    }
  }
  if (!(max_u0 < 0.0 && min_ua > 0.0)) {
    throw Error(ErrorKind::ConditionViolated, kStage,
                "boundary data must satisfy u0 < 0 < ua (max u0 = " + std::to_string(max_u0) +
                    ", min ua = " + std::to_string(min_ua) + ")");
  }
}

std::vector<std::string> registry_names() {
  return {"paper-example", "flat-constant", "separable-source", "sine-advection"};
}

ProblemSpec registry_problem(const std::string& name) {
  if (name == "paper-example") {
    ProblemSpec p = make(name, "sin(pi*x)", "cos(pi*x/4)", "-cos(pi*x/4)*cos(pi*y/4)*cos(pi*z/4)", "-6", "4", "0");
    p.x0 = p.y0 = -1.0;
    p.L = p.M = 2.0;
    p.a = 1.0;
    p.T = 0.85;
    p.mu = 0.01;
    return p;
  }
  if (name == "flat-constant") {
    ProblemSpec p = make(name, "0", "0", "0", "-6", "4", "0.2");
    p.x0 = p.y0 = 0.0;
    p.L = p.M = 1.0;
    p.a = 1.0;
    p.T = 0.5;
    p.mu = 0.01;
    return p;
  }
  if (name == "separable-source") {
    ProblemSpec p = make(name, "0", "0", "1", "-6", "4", "0.2");
    p.x0 = p.y0 = 0.0;
    p.L = p.M = 1.0;
    p.a = 1.0;
    p.T = 0.5;
    p.mu = 0.01;
    return p;
  }
  if (name == "sine-advection") {
    ProblemSpec p = make(name, "0.5*sin(pi*x)", "0.25*cos(pi*y)", "0", "-6", "4", "0.2+0.05*cos(pi*x)");
    p.x0 = p.y0 = -1.0;
    p.L = p.M = 2.0;
    p.a = 1.0;
    p.T = 0.5;
    p.mu = 0.01;
    return p;
  }
  throw Error(ErrorKind::InvalidArgument, "harness.registry", "unknown problem '" + name + "'");
}

}  // namespace rdafront
