#pragma once

#include <functional>

#include "rdafront/grid.hpp"
#include "rdafront/outer.hpp"
#include "rdafront/problem.hpp"
#include "rdafront/surface.hpp"

namespace rdafront {

struct NormalAngles {
  double ax = 0.0, ay = 0.0, az = 1.0;
};

/// (h_x, h_y, 1) / sqrt(1 + h_x^2 + h_y^2).
NormalAngles normal_angles(double hx, double hy);

/// Surface point (l, m), signed normal distance r (r > 0 above the front)
/// and xi = r / mu. The point is S(l, m) + r (-ax, -ay, az).
struct LocalFrame {
  double l = 0.0, m = 0.0, r = 0.0, xi = 0.0;
  double alpha_x = 0.0, alpha_y = 0.0, alpha_z = 1.0;
};

/// Closest-point Newton iteration from (l, m) = (x, y). Throws Projection.
LocalFrame project_to_front(const Point3& p, const FrontSurface& surface, double mu = 1.0);

struct LayerParams {
  double V = 0.0;
  double phiM = 0.0, phiP = 0.0, phiStar = 0.0;
  double PM = 0.0, PP = 0.0;
  double alpha_z = 1.0;

  static LayerParams make(double V, double phiM, double phiP, double alpha_z);
  double phi(Branch b) const { return b == Branch::Minus ? phiM : phiP; }
  double P(Branch b) const { return b == Branch::Minus ? PM : PP; }
};

/// alpha_z [V (phi - u) + (phi^2 - u^2) / 2] for the branch's phi.
double phase_trajectory(double u_tilde, Branch branch, const LayerParams& p);

/// True when a decaying profile exists on the branch's half line:
/// minus needs P- < 0 and phi* < -2V - phi-, plus needs P+ > 0 and phi* > -2V - phi+.
bool layer_exists(Branch branch, const LayerParams& p);

/// Q0 on its half line (xi <= 0 minus, xi >= 0 plus). Throws Existence.
double q0_profile(double xi, Branch branch, const LayerParams& p);
/// dQ0/dxi, equal to the phase trajectory evaluated on the profile.
double q0_derivative(double xi, Branch branch, const LayerParams& p);
/// The closed form as printed in the source material, kept for comparison only.
double q0_printed_form(double xi, Branch branch, const LayerParams& p);

struct Q1Context {
  LayerParams params;
  double u1bar = 0.0;
  std::function<double(double)> f1;
};

struct Q1Quadrature {
  int nodes = 256;
  double tail_rel = 1e-12;
  int max_doublings = 4;
};

/// Integral of f1 from the branch's far end (-inf minus, +inf plus) to xi.
double forcing_integral(double xi, Branch branch, const Q1Context& ctx, const Q1Quadrature& q = {});
/// Q1(xi); Q1(0) = -u1bar exactly. Throws LayerAssembly if f1 does not decay.
double q1_profile(double xi, Branch branch, const Q1Context& ctx, const Q1Quadrature& q = {});
/// dQ1/dxi at 0: alpha_z (V + phi*) u1bar + forcing_integral(0).
double q1_slope_at_zero(Branch branch, const Q1Context& ctx, const Q1Quadrature& q = {});

/// Everything the inner expansion needs at surface points of one front snapshot.
class LayerModel {
 public:
  LayerModel(const ProblemSpec& spec, const OuterBranch& minus, const OuterBranch& plus, const FrontSurface& surface);

  const FrontSurface& surface() const { return *surface_; }
  const OuterBranch& outer(Branch b) const { return b == Branch::Minus ? *minus_ : *plus_; }

  /// Layer parameters for a given jet at (l, m).
  LayerParams params(double l, double m, const SurfaceJet& jet) const;
  LayerParams params(double l, double m) const { return params(l, m, surface_->jet(l, m)); }

  /// Second time derivative of h from the front equation.
  double h_tt(double l, double m, const SurfaceJet& jet) const;

  /// f1 for branch b at (l, m) as a function of xi.
  Q1Context q1_context(double l, double m, Branch b) const;

  /// First-order matching function at (l, m).
  double H1(double l, double m, const Q1Quadrature& q = {}) const;

 private:
  const ProblemSpec* spec_;
  const OuterBranch* minus_;
  const OuterBranch* plus_;
  const FrontSurface* surface_;
  CompiledExpr A_, B_, F_;
  CompiledExpr Ax_, Ay_, Az_, Bx_, By_, Bz_;
};

}  // namespace rdafront
