#pragma once

#include <string>

#include "rdafront/grid.hpp"
#include "rdafront/inner.hpp"
#include "rdafront/outer.hpp"
#include "rdafront/problem.hpp"
#include "rdafront/surface.hpp"

namespace rdafront {

enum class AssemblyMode { General, ExampleFastpath };

struct AsymptoticSolution {
  int order = 0;
  ScalarField3D field;
  double mu = 0.0;
  double t = 0.0;
  std::string problem;
  /// Nodes that fell back to the outer solution because of the xi cutoff.
  std::size_t outer_only_nodes = 0;
};

/// Leading-order uniform approximation on `grid` at the front's time.
AsymptoticSolution assemble_U0(const ProblemSpec& spec, const OuterBranch& minus, const OuterBranch& plus,
                               const FrontSurface& front, const Grid3D& grid, AssemblyMode mode = AssemblyMode::General);

/// First-order approximation with xi measured from h0 + mu h1.
AsymptoticSolution assemble_U1(const ProblemSpec& spec, const OuterBranch& minus, const OuterBranch& plus,
                               const FrontSurface& h0, const FrontSurface& h1, const Grid3D& grid,
                               const Q1Quadrature& q = {64, 1e-12, 4});

/// h0 + mu h1 with h_t combined the same way.
FrontSurface corrected_front(const FrontSurface& h0, const FrontSurface& h1, double mu);

}  // namespace rdafront
