#pragma once

#include <array>
#include <cstdint>

#include "rdafront/characteristics.hpp"
#include "rdafront/grid.hpp"
#include "rdafront/problem.hpp"

namespace rdafront {

/// minus: the branch launched from z = 0 with u0; plus: from z = a with ua.
enum class Branch { Minus, Plus };

const char* to_string(Branch b);

struct OuterBranch {
  Branch branch = Branch::Minus;
  ScalarField3D phi;
  ScalarField3D phi_x, phi_y, phi_z;
  ScalarField3D W;
  ScalarField3D f1bar;
  ScalarField3D u1;
};

struct OuterOptions {
  FanDensity fan{32, 32};
  SolveOptions solve{};
  /// Quadrature sub-steps per z cell when tracing first-order characteristics.
  int u1_substeps = 2;
};

/// Zero-order outer solution by characteristics. Throws ConditionViolated if
/// the branch sign (phi- < 0 < phi+) fails anywhere on the grid.
ScalarField3D compute_phi(const ProblemSpec& spec, Branch branch, const Grid3D& grid, const OuterOptions& options = {},
                          SolveDiagnostics* diag = nullptr);

/// The degenerate problem as fed to the characteristics engine.
QuasiLinearProblem degenerate_problem(const ProblemSpec& spec, Branch branch);

struct FieldPartials {
  ScalarField3D dx, dy, dz;
};

/// Central differences, periodic in x and y, second-order one-sided at the z faces.
FieldPartials fd_partials(const ScalarField3D& f);
/// Periodic seven-point Laplacian with second-order one-sided z-face rows (needs nz >= 4).
ScalarField3D fd_laplacian(const ScalarField3D& f);

/// W = -phi_z + dF/du(phi, x, y, z).
ScalarField3D compute_W(const ProblemSpec& spec, const OuterBranch& outer);

/// First-order outer term along dx/dz = -A/phi, dy/dz = -B/phi back to the
/// launch face. Needs phi, W and f1bar. Throws DivisionHazard if |phi| < 1e-6.
ScalarField3D compute_u1(const ProblemSpec& spec, const OuterBranch& outer, int substeps = 2);

/// phi, its partials, W, f1bar and u1 in one call.
OuterBranch build_outer(const ProblemSpec& spec, Branch branch, const Grid3D& grid, const OuterOptions& options = {});

struct LipschitzEstimate {
  double K_A = 0.0, K_B = 0.0;
  /// Estimates using n, 2n and 4n pairs.
  std::array<double, 3> K_A_seq{}, K_B_seq{};
  bool flagged = false;
};

/// Empirical Lipschitz constants of A/phi and B/phi from random point pairs.
/// Throws ConditionViolated if |phi| < 1e-6 at a sample.
LipschitzEstimate check_lipschitz_sampling(const ProblemSpec& spec, const OuterBranch& outer, int n_samples,
                                           std::uint64_t seed = 7);

}  // namespace rdafront
