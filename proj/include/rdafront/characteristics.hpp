#pragma once

#include <array>
#include <functional>
#include <vector>

#include "rdafront/expr.hpp"
#include "rdafront/grid.hpp"

namespace rdafront {

/// State along a characteristic of a1 u_x + a2 u_y + a3 u_z = f.
struct CharState {
  double x = 0.0, y = 0.0, z = 0.0, u = 0.0;
};

struct QuasiLinearProblem {
  /// Returns (a1, a2, a3, f) at a state.
  std::function<CharState(const CharState&)> rhs;
  /// Initial manifold (x0, y0, z0, u0)(s1, s2).
  std::function<CharState(double, double)> manifold;
  double s1_min = 0.0, s1_max = 1.0;
  double s2_min = 0.0, s2_max = 1.0;
  /// Periodic flags apply both to x, y and to the matching manifold parameter.
  bool periodic_x = false, periodic_y = false;
  double x0 = 0.0, L = 1.0, y0 = 0.0, M = 1.0;
};

/// Coefficients given as expressions in (x, y, z, u); manifold left to the caller.
QuasiLinearProblem make_quasilinear(const Expr& a1, const Expr& a2, const Expr& a3, const Expr& f);

struct CharacteristicPath {
  std::vector<double> tau;
  std::vector<CharState> states;
};

/// Signed stop function; integration ends where it first becomes >= 0.
using StopFunction = std::function<double(const CharState&)>;

CharState rk4_step(const QuasiLinearProblem& prob, const CharState& s, double h);

/// Uniform RK4 over parameter span tau using ceil(|tau| / step) sub-steps.
CharState propagate(const QuasiLinearProblem& prob, const CharState& start, double tau, double step);
/// Same with an explicit sub-step count.
CharState propagate_n(const QuasiLinearProblem& prob, const CharState& start, double tau, int n);

/// RK4 from the manifold point until stop >= 0; the last step is shortened by
/// bisection so that |stop| <= 1e-10 there. Throws Escape or BlowUp.
CharacteristicPath integrate_characteristic(const QuasiLinearProblem& prob, double s1, double s2,
                                            const StopFunction& stop, double step, double max_span = 1e3);

/// det[(a1, a2, a3); d(x0, y0, z0)/ds1; d(x0, y0, z0)/ds2] by forward differences.
double transversality_jacobian(const QuasiLinearProblem& prob, double s1, double s2, double ds = 1e-6);

struct FanDensity {
  int n1 = 32, n2 = 32;
};

struct SolveOptions {
  double step = 0.01;
  double newton_tol = 1e-8;
  int max_newton = 25;
  double max_failure_fraction = 1e-3;
  double max_span = 1e3;
};

struct SolveDiagnostics {
  std::size_t newton_failures = 0;
  std::vector<std::size_t> failed_nodes;
  /// Fan samples where the map (s1, s2, tau) -> (x, y, z) changes orientation.
  std::size_t fold_samples = 0;
  double max_residual = 0.0;
  int max_iterations = 0;
};

/// Fan of characteristics from the manifold, nearest-exit search per z slice,
/// then Newton on X(s1, s2, tau) = node. `stop` ends each fan path.
/// Throws Transversality, Coverage, Escape or BlowUp.
ScalarField3D solve_on_grid(const QuasiLinearProblem& prob, const Grid3D& targets, const StopFunction& stop,
                            FanDensity density, const SolveOptions& options = {}, SolveDiagnostics* diag = nullptr);

/// Newton inversion from a starting guess: finds (s1, s2, tau) with
/// X(s1, s2, tau) = target. Returns false if not converged.
bool invert_characteristic(const QuasiLinearProblem& prob, const Point3& target, std::array<double, 3>& s,
                           const SolveOptions& options, double* residual = nullptr, int* iterations = nullptr,
                           CharState* end_state = nullptr);

}  // namespace rdafront
