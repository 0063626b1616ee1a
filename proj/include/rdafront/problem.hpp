#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rdafront/expr.hpp"

namespace rdafront {

/// Coefficients and data of the periodic initial-boundary value problem
///   mu Lap(u) - u_t = A u_x + B u_y - u u_z + F(u, x, y, z)
/// on [x0, x0+L) x [y0, y0+M) x [0, a], t in [0, T].
struct ProblemSpec {
  std::string name;
  Expr A, B;        // (x, y, z)
  Expr F;           // (u, x, y, z), optionally t
  Expr u0, ua;      // (x, y): Dirichlet data at z = 0 and z = a
  Expr h_init;      // (x, y): initial front position
  /// Replaces the default tanh initial profile when set; (x, y, z).
  std::optional<Expr> u_init;
  double x0 = 0.0, y0 = 0.0;
  double L = 1.0, M = 1.0, a = 1.0, T = 1.0;
  double mu = 0.01;

  /// Checks positivity of the scalars and that u0 < 0 < ua over one period
  /// cell. Throws InvalidArgument / ConditionViolated with stage core.ProblemSpec.
  void validate() const;
};

/// Built-in problems, looked up by name.
std::vector<std::string> registry_names();
/// Throws InvalidArgument for an unknown name.
ProblemSpec registry_problem(const std::string& name);

}  // namespace rdafront
