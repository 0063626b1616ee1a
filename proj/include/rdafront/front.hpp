#pragma once

#include <functional>
#include <vector>

#include "rdafront/characteristics.hpp"
#include "rdafront/inner.hpp"
#include "rdafront/outer.hpp"
#include "rdafront/problem.hpp"
#include "rdafront/surface.hpp"

namespace rdafront {

struct FrontEvolution {
  std::vector<FrontSurface> snapshots;

  /// Snapshot whose time equals t to 1e-12; throws InvalidArgument otherwise.
  const FrontSurface& at(double t) const;
};

struct FrontOptions {
  int nx = 64, ny = 64;
  double step = 0.01;
  /// Fan seeds per grid node along each axis.
  int fan_factor = 1;
  double newton_tol = 1e-10;
  int max_newton = 25;
};

/// Characteristics of h_t + A h_x + B h_y = -(phi- + phi+)/2 in (x, y, t, h),
/// stored in CharState as (x, y, z = t, u = h).
QuasiLinearProblem front_problem(const ProblemSpec& spec, const ScalarField3D& phiM, const ScalarField3D& phiP);

/// Leading-order front at the requested times (sorted ascending, >= 0).
/// Throws FrontEscape when h leaves (0, a) and MultivaluedFront when the fan folds.
FrontEvolution solve_h0(const ProblemSpec& spec, const ScalarField3D& phiM, const ScalarField3D& phiP,
                        const std::vector<double>& times, const FrontOptions& options = {});

/// Phi-(phi*) - Phi+(phi*) through the phase trajectories.
double eval_H0(double V, double phiM, double phiP, double alpha_z);
/// alpha_z (phi- - phi+) (V + (phi- + phi+) / 2).
double eval_H0_closed(double V, double phiM, double phiP, double alpha_z);

struct H0Slots {
  double h = 0.0, hx = 0.0, hy = 0.0, ht = 0.0;
};

struct H0Partials {
  double dh = 0.0, dhx = 0.0, dhy = 0.0, dht = 0.0;
};

/// H0 at (x, y) as a function of independent slots (h, h_x, h_y, h_t).
class H0Function {
 public:
  H0Function(const ProblemSpec& spec, const ScalarField3D& phiM, const ScalarField3D& phiP);
  double operator()(double x, double y, const H0Slots& s) const;
  /// Central differences with step rel_step * max(1, |slot|).
  H0Partials partials(double x, double y, const H0Slots& s, double rel_step = 1e-6) const;

 private:
  const ScalarField3D* phiM_;
  const ScalarField3D* phiP_;
  CompiledExpr A_, B_;
  double a_;
};

/// First-order matching function at (l, m) of one snapshot.
double eval_H1(const LayerModel& model, double l, double m, const Q1Quadrature& q = {});

/// a_t w_t + b_x w_x + b_y w_y + c w + g = 0.
struct TransportCoefficients {
  double a_t = 1.0, b_x = 0.0, b_y = 0.0, c = 0.0, g = 0.0;
};
using CoefficientFunction = std::function<TransportCoefficients(double x, double y, double t)>;

/// Coefficients sampled on periodic grids at increasing time levels;
/// bilinear in space, linear in time, held constant outside the level range.
class TransportTable {
 public:
  TransportTable(int nx, int ny, double x0, double L, double y0, double M);
  void add_level(double t, std::vector<TransportCoefficients> nodes);
  TransportCoefficients operator()(double x, double y, double t) const;
  bool empty() const { return times_.empty(); }

 private:
  TransportCoefficients spatial(std::size_t level, double x, double y) const;
  int nx_, ny_;
  double x0_, L_, y0_, M_;
  std::vector<double> times_;
  std::vector<std::vector<TransportCoefficients>> levels_;
};

/// Zero initial data, periodic; solved along characteristics traced backward
/// from every node. Stored h_t comes from the equation itself.
FrontEvolution solve_linear_transport(const CoefficientFunction& coef, int nx, int ny, double x0, double L, double y0,
                                      double M, const std::vector<double>& times, double step = 0.01);

struct H1Options {
  double step = 0.01;
  Q1Quadrature quadrature{128, 1e-12, 4};
};

/// First-order front correction. Coefficient levels are the snapshots of evolution0;
/// output times must lie within their range.
FrontEvolution solve_h1(const ProblemSpec& spec, const OuterBranch& minus, const OuterBranch& plus,
                        const FrontEvolution& evolution0, const std::vector<double>& times, const H1Options& options = {});

}  // namespace rdafront
