#pragma once

#include <span>
#include <vector>

#include "rdafront/expr.hpp"
#include "rdafront/grid.hpp"
#include "rdafront/problem.hpp"

namespace rdafront {

/// Initial profile before the Dirichlet faces are pinned:
/// (ua/2)(1 + Theta) + (u0/2)(1 - Theta), Theta = tanh(x + y + (z - h_init)/(0.1 mu)),
/// or the problem's explicit u_init expression when present.
double u_init_value(const ProblemSpec& spec, double x, double y, double z);

/// Initial field with the z = 0 and z = a faces set to u0 and ua exactly.
ScalarField3D make_u_init(const ProblemSpec& spec, const Grid3D& grid);

enum class TimeScheme { Midpoint, Heun };

struct ReferenceOptions {
  double safety = 0.4;
  TimeScheme scheme = TimeScheme::Midpoint;
};

struct SolverState {
  ScalarField3D field;
  double time = 0.0;
  long step_index = 0;
};

struct SolveLog {
  long steps = 0;
  double dt_min = 0.0, dt_max = 0.0;
  /// z spacing exceeds mu / 2.
  bool under_resolved = false;
};

/// Explicit finite-difference solver for u_t = mu Lap(u) - A u_x - B u_y + u u_z - F.
/// Centred diffusion, first-order upwind transport in x and y, Engquist-Osher
/// flux for the u u_z term, Dirichlet faces re-pinned after every step.
class ReferenceSolver {
 public:
  ReferenceSolver(const ProblemSpec& spec, const Grid3D& grid, const ReferenceOptions& options = {});

  const Grid3D& grid() const { return grid_; }

  /// safety * min(diffusive bound, advective CFL bound) for the given state.
  double stable_dt(std::span<const double> u) const;

  /// Semi-discrete right-hand side at interior nodes; face entries are zero.
  void rhs(std::span<const double> u, double t, std::vector<double>& out) const;

  /// One RK2 step. Throws Divergence on a non-finite value.
  SolverState step(const SolverState& state, double dt) const;

  /// Advances from `init` to max(output_times), landing exactly on each output time.
  std::vector<ScalarField3D> solve(const ScalarField3D& init, const std::vector<double>& output_times,
                                   SolveLog* log = nullptr) const;

 private:
  void pin_faces(std::vector<double>& u) const;

  ProblemSpec spec_;
  Grid3D grid_;
  ReferenceOptions options_;
  std::vector<double> A_, B_;
  std::vector<double> F_static_;
  bool F_static_valid_ = false;
  CompiledExpr F_;
  std::vector<double> face0_, facea_;
  double max_abs_A_ = 0.0, max_abs_B_ = 0.0;
};

/// make_u_init followed by ReferenceSolver::solve.
std::vector<ScalarField3D> solve_reference(const ProblemSpec& spec, const Grid3D& grid,
                                           const std::vector<double>& output_times,
                                           const ReferenceOptions& options = {}, SolveLog* log = nullptr);

}  // namespace rdafront
