#include "rdafront/inner.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "rdafront/error.hpp"

namespace rdafront {

NormalAngles normal_angles(double hx, double hy) {
  const double s = 1.0 / std::sqrt(1.0 + hx * hx + hy * hy);
  return {hx * s, hy * s, s};
}

LocalFrame project_to_front(const Point3& p, const FrontSurface& surface, double mu) {
  constexpr const char* kStage = "inner.project_to_front";
  const double L = surface.L(), M = surface.M();
  const double scale = std::max(1.0, std::max(L, M));
  const double max_step = 0.25 * std::min(L, M);
  // minimise half the squared distance D(l, m) = |p - S(l, m)|^2 / 2
  auto distance2 = [&](double l, double m, const SurfaceJet& J) {
    const double dx = wrap_difference(p.x - l, L), dy = wrap_difference(p.y - m, M), dz = p.z - J.h;
    return 0.5 * (dx * dx + dy * dy + dz * dz);
  };
  double l = p.x, m = p.y;
  SurfaceJet J = surface.jet(l, m);
  double D = distance2(l, m, J);
  bool converged = false;
  for (int it = 0; it < 25 && !converged; ++it) {
    const double dx = wrap_difference(p.x - l, L), dy = wrap_difference(p.y - m, M), dz = p.z - J.h;
    // stationarity residual (minus the gradient of D)
    const double F1 = dx + dz * J.hx, F2 = dy + dz * J.hy;
    if (std::hypot(F1, F2) <= 1e-14 * scale) {
      converged = true;
      break;
    }
    // Hessian of D by differencing the gradient, which keeps it consistent with the
    // interpolated h_x, h_y; beyond the focal distance it is indefinite, so fall back to Gauss-Newton
    const double e = 1e-7 * scale;
    auto grad = [&](double ll, double mm) {
      const SurfaceJet G = surface.jet(ll, mm);
      const double gz = p.z - G.h;
      return std::array<double, 2>{-(wrap_difference(p.x - ll, L) + gz * G.hx),
                                   -(wrap_difference(p.y - mm, M) + gz * G.hy)};
    };
    const auto gxp = grad(l + e, m), gxm = grad(l - e, m), gyp = grad(l, m + e), gym = grad(l, m - e);
    double a11 = (gxp[0] - gxm[0]) / (2 * e);
    double a22 = (gyp[1] - gym[1]) / (2 * e);
    double a12 = 0.25 * (gxp[1] - gxm[1] + gyp[0] - gym[0]) / e;
    if (!(a11 > 0.0 && a11 * a22 - a12 * a12 > 1e-3 * a11 * a22)) {
      a11 = 1.0 + J.hx * J.hx;
      a12 = J.hx * J.hy;
      a22 = 1.0 + J.hy * J.hy;
    }
    const double det = a11 * a22 - a12 * a12;
    double sl = (F1 * a22 - F2 * a12) / det;
    double sm = (a11 * F2 - a12 * F1) / det;
    const double len = std::hypot(sl, sm);
    if (len > max_step) {
      sl *= max_step / len;
      sm *= max_step / len;
    }
    // backtrack until the distance does not grow
    double lam = 1.0;
    SurfaceJet Jn;
    double Dn = D;
    for (int k = 0; k < 30; ++k) {
      Jn = surface.jet(l + lam * sl, m + lam * sm);
      Dn = distance2(l + lam * sl, m + lam * sm, Jn);
      if (Dn <= D + 1e-15 * scale * scale) break;
      lam *= 0.5;
    }
    l += lam * sl;
    m += lam * sm;
    J = Jn;
    D = Dn;
    if (lam * len <= 1e-12 * scale) converged = true;
  }
  if (!converged) {
    const double dz = p.z - J.h;
    const double res =
        std::hypot(wrap_difference(p.x - l, L) + dz * J.hx, wrap_difference(p.y - m, M) + dz * J.hy);
    // linear Gauss-Newton convergence near the focal distance can stall just short of the tolerance
    if (res <= 1e-9 * scale) converged = true;
  }
  if (!converged) {
    throw Error(ErrorKind::Projection, kStage,
                "Newton did not converge for point (" + std::to_string(p.x) + ", " + std::to_string(p.y) + ", " +
                    std::to_string(p.z) + ")");
  }
  const NormalAngles n = normal_angles(J.hx, J.hy);
  LocalFrame f;
  f.l = wrap_periodic(l, surface.x0(), L);
  f.m = wrap_periodic(m, surface.y0(), M);
  f.r = (p.z - J.h) / n.az;
  f.xi = f.r / mu;
  f.alpha_x = n.ax;
  f.alpha_y = n.ay;
  f.alpha_z = n.az;
  return f;
}

LayerParams LayerParams::make(double V, double phiM, double phiP, double alpha_z) {
  LayerParams p;
  p.V = V;
  p.phiM = phiM;
  p.phiP = phiP;
  p.phiStar = 0.5 * (phiM + phiP);
  p.PM = V + phiM;
  p.PP = V + phiP;
  p.alpha_z = alpha_z;
  return p;
}

double phase_trajectory(double u, Branch branch, const LayerParams& p) {
  const double phi = p.phi(branch);
  return p.alpha_z * (p.V * (phi - u) + 0.5 * (phi * phi - u * u));
}

bool layer_exists(Branch branch, const LayerParams& p) {
  if (branch == Branch::Minus) return p.PM < 0.0 && p.phiStar < -2.0 * p.V - p.phiM;
  return p.PP > 0.0 && p.phiStar > -2.0 * p.V - p.phiP;
}

namespace {

// Separable solution of Q' = -alpha_z (P Q + Q^2 / 2) with Q(0) = q0.
double q0_unchecked(double xi, Branch branch, const LayerParams& p) {
  const double P = p.P(branch);
  const double q0 = p.phiStar - p.phi(branch);
  if (xi == 0.0) return q0;
  const double Phat = q0 / (2.0 * P + q0);
  const double E = std::exp(-p.alpha_z * P * xi);
  return 2.0 * P * Phat * E / (1.0 - Phat * E);
}

void require_layer(Branch branch, const LayerParams& p, const char* stage) {
  if (!layer_exists(branch, p)) {
    throw Error(ErrorKind::Existence, stage,
                std::string("no decaying ") + to_string(branch) + " profile: V = " + std::to_string(p.V) +
                    ", phi- = " + std::to_string(p.phiM) + ", phi+ = " + std::to_string(p.phiP));
  }
}

}  // namespace

double q0_profile(double xi, Branch branch, const LayerParams& p) {
  require_layer(branch, p, "inner.q0_profile");
  return q0_unchecked(xi, branch, p);
}

double q0_derivative(double xi, Branch branch, const LayerParams& p) {
  const double Q = q0_profile(xi, branch, p);
  return -p.alpha_z * (p.P(branch) * Q + 0.5 * Q * Q);
}

double q0_printed_form(double xi, Branch branch, const LayerParams& p) {
  const double P = p.P(branch);
  const double q0 = p.phiStar - p.phi(branch);
  const double Pt = q0 / (2.0 * P - q0);
  return 2.0 * Pt * P / (std::exp(p.alpha_z * P * xi) - Pt);
}

// ---------------------------------------------------------------- Q1

namespace {

double profile_slope(double xi, Branch branch, const LayerParams& p) {
  const double Q = q0_unchecked(xi, branch, p);
  return -p.alpha_z * (p.P(branch) * Q + 0.5 * Q * Q);
}

// Integral of f over [xi, xi + side * Xi] on the graded mesh t = xi + side Xi s^2.
double graded_trapezoid(const std::function<double(double)>& f, double xi, double side, double Xi, int n) {
  double sum = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double s = static_cast<double>(k) / n;
    const double w = (k == 0 || k == n) ? 0.5 : 1.0;
    sum += w * f(xi + side * Xi * s * s) * 2.0 * Xi * s;
  }
  return sum / n;
}

}  // namespace

double forcing_integral(double xi, Branch branch, const Q1Context& ctx, const Q1Quadrature& q) {
  constexpr const char* kStage = "inner.forcing_integral";
  if (!ctx.f1) return 0.0;
  const double k = ctx.params.alpha_z * std::fabs(ctx.params.P(branch));
  if (!(k > 1e-12)) throw Error(ErrorKind::DegenerateLayer, kStage, "layer decay rate vanishes");
  const double side = branch == Branch::Minus ? -1.0 : 1.0;
  double Xi = 30.0 / k;
  for (int d = 0;; ++d) {
    double peak = 0.0;
    for (int j = 0; j <= q.nodes; ++j) {
      const double s = static_cast<double>(j) / q.nodes;
      peak = std::max(peak, std::fabs(ctx.f1(xi + side * Xi * s * s)));
    }
    const double tail = std::fabs(ctx.f1(xi + side * Xi));
    if (peak == 0.0) return 0.0;
    if (tail <= q.tail_rel * peak) break;
    if (d >= q.max_doublings) {
      throw Error(ErrorKind::LayerAssembly, kStage,
                  "forcing does not decay: |f1| at the cut is " + std::to_string(tail / peak) + " of its peak");
    }
    Xi *= 2.0;
  }
  const double t1 = graded_trapezoid(ctx.f1, xi, side, Xi, q.nodes);
  const double t2 = graded_trapezoid(ctx.f1, xi, side, Xi, 2 * q.nodes);
  const double I = (4.0 * t2 - t1) / 3.0;
  // minus: integral from -inf up to xi; plus: from +inf down to xi
  return branch == Branch::Minus ? I : -I;
}

double q1_profile(double xi, Branch branch, const Q1Context& ctx, const Q1Quadrature& q) {
  constexpr const char* kStage = "inner.q1_profile";
  require_layer(branch, ctx.params, kStage);
  const double phi0 = profile_slope(0.0, branch, ctx.params);
  if (phi0 == 0.0) throw Error(ErrorKind::DegenerateLayer, kStage, "phase trajectory vanishes at xi = 0");
  if (xi == 0.0) return -ctx.u1bar;
  const double G0 = forcing_integral(0.0, branch, ctx, q);
  auto inner = [&](int n) {
    const double h = xi / n;
    double cum = 0.0, acc = 0.0;
    double fprev = ctx.f1 ? ctx.f1(0.0) : 0.0;
    double rprev = G0 / phi0;
    for (int j = 1; j <= n; ++j) {
      const double s = j == n ? xi : j * h;
      const double fj = ctx.f1 ? ctx.f1(s) : 0.0;
      cum += 0.5 * (fprev + fj) * h;
      const double rj = (G0 + cum) / profile_slope(s, branch, ctx.params);
      acc += 0.5 * (rprev + rj) * h;
      fprev = fj;
      rprev = rj;
    }
    return acc;
  };
  const int n = std::max(q.nodes, static_cast<int>(std::ceil(std::fabs(xi) * ctx.params.alpha_z *
                                                              std::fabs(ctx.params.P(branch)) * 32.0)));
  const double I = (4.0 * inner(2 * n) - inner(n)) / 3.0;
  const double Phi = profile_slope(xi, branch, ctx.params);
  return Phi * (-ctx.u1bar / phi0 + I);
}

double q1_slope_at_zero(Branch branch, const Q1Context& ctx, const Q1Quadrature& q) {
  constexpr const char* kStage = "inner.q1_slope_at_zero";
  require_layer(branch, ctx.params, kStage);
  if (profile_slope(0.0, branch, ctx.params) == 0.0) {
    throw Error(ErrorKind::DegenerateLayer, kStage, "phase trajectory vanishes at xi = 0");
  }
  const auto& p = ctx.params;
  return p.alpha_z * (p.V + p.phiStar) * ctx.u1bar + forcing_integral(0.0, branch, ctx, q);
}

// ---------------------------------------------------------------- LayerModel

LayerModel::LayerModel(const ProblemSpec& spec, const OuterBranch& minus, const OuterBranch& plus,
                       const FrontSurface& surface)
    : spec_(&spec),
      minus_(&minus),
      plus_(&plus),
      surface_(&surface),
      A_(spec.A),
      B_(spec.B),
      F_(spec.F),
      Ax_(differentiate(spec.A, Var::X)),
      Ay_(differentiate(spec.A, Var::Y)),
      Az_(differentiate(spec.A, Var::Z)),
      Bx_(differentiate(spec.B, Var::X)),
      By_(differentiate(spec.B, Var::Y)),
      Bz_(differentiate(spec.B, Var::Z)) {}

namespace {

double clamp_z(double h, double a) { return std::clamp(h, 0.0, a); }

}  // namespace

LayerParams LayerModel::params(double l, double m, const SurfaceJet& jet) const {
  l = wrap_periodic(l, surface_->x0(), surface_->L());
  m = wrap_periodic(m, surface_->y0(), surface_->M());
  const double z = clamp_z(jet.h, spec_->a);
  const Point3 p{l, m, z};
  const double phiM = trilinear_sample(minus_->phi, p);
  const double phiP = trilinear_sample(plus_->phi, p);
  const double V = jet.ht + A_(l, m, z) * jet.hx + B_(l, m, z) * jet.hy;
  return LayerParams::make(V, phiM, phiP, normal_angles(jet.hx, jet.hy).az);
}

double LayerModel::h_tt(double l, double m, const SurfaceJet& jet) const {
  l = wrap_periodic(l, surface_->x0(), surface_->L());
  m = wrap_periodic(m, surface_->y0(), surface_->M());
  const double z = clamp_z(jet.h, spec_->a);
  const Point3 p{l, m, z};
  const double Gz = -0.5 * (trilinear_sample(minus_->phi_z, p) + trilinear_sample(plus_->phi_z, p));
  return Gz * jet.ht - Az_(l, m, z) * jet.ht * jet.hx - A_(l, m, z) * jet.hxt - Bz_(l, m, z) * jet.ht * jet.hy -
         B_(l, m, z) * jet.hyt;
}

Q1Context LayerModel::q1_context(double l, double m, Branch b) const {
  l = wrap_periodic(l, surface_->x0(), surface_->L());
  m = wrap_periodic(m, surface_->y0(), surface_->M());
  const OuterBranch& ob = outer(b);
  const SurfaceJet J = surface_->jet(l, m);
  const double z = clamp_z(J.h, spec_->a);
  const Point3 p{l, m, z};
  const NormalAngles n = normal_angles(J.hx, J.hy);
  const double az = n.az, az2 = az * az;

  Q1Context ctx;
  ctx.params = params(l, m, J);
  ctx.u1bar = trilinear_sample(ob.u1, p);
  require_layer(b, ctx.params, "inner.q1_context");

  const double A = A_(l, m, z), B = B_(l, m, z);
  const double coef_adv = Ax_(l, m, z) * J.hx * J.hx + J.hx * J.hy * (Ay_(l, m, z) + Bx_(l, m, z)) +
                          J.hy * J.hy * By_(l, m, z) - J.hx * Az_(l, m, z) - J.hy * Bz_(l, m, z);
  const double phi = ob.phi.grid().size() ? trilinear_sample(ob.phi, p) : 0.0;
  const double phx = trilinear_sample(ob.phi_x, p), phy = trilinear_sample(ob.phi_y, p),
               phz = trilinear_sample(ob.phi_z, p);
  const double coef_phi = phx * J.hx + phy * J.hy - phz;
  const double kappa = (J.hx * J.hx + 1) * J.hyy + (J.hy * J.hy + 1) * J.hxx - 2 * J.hx * J.hy * J.hxy;

  const double dl = 1e-5 * surface_->L(), dm = 1e-5 * surface_->M(), dt = 1e-5 * std::max(spec_->T, 1.0);
  const LayerParams pl1 = params(l + dl, m), pl0 = params(l - dl, m);
  const LayerParams pm1 = params(l, m + dm), pm0 = params(l, m - dm);
  const double htt = h_tt(l, m, J);
  auto shifted = [&](double s) {
    SurfaceJet K = J;
    K.h += s * J.ht;
    K.hx += s * J.hxt;
    K.hy += s * J.hyt;
    K.ht += s * htt;
    return params(l, m, K);
  };
  const LayerParams pt1 = shifted(dt), pt0 = shifted(-dt);

  const double t = surface_->t();
  const double F_phi = [&] {
    const double v[kVarCount] = {l, m, z, phi, t};
    return F_(v);
  }();
  const LayerParams p0 = ctx.params;
  const double u1 = ctx.u1bar;
  const double ht = J.ht, hx = J.hx, hy = J.hy;
  const CompiledExpr F = F_;
  ctx.f1 = [=](double xi) {
    const double Q = q0_unchecked(xi, b, p0);
    const double Phi = -az * (p0.P(b) * Q + 0.5 * Q * Q);
    const double u0 = phi + Q;
    const double Ql = (q0_unchecked(xi, b, pl1) - q0_unchecked(xi, b, pl0)) / (2 * dl);
    const double Qm = (q0_unchecked(xi, b, pm1) - q0_unchecked(xi, b, pm0)) / (2 * dm);
    const double Qt = (q0_unchecked(xi, b, pt1) - q0_unchecked(xi, b, pt0)) / (2 * dt);
    const double v[kVarCount] = {l, m, z, u0, t};
    return az2 * az * kappa * Phi + xi * az2 * coef_adv * Phi + xi * az2 * coef_phi * Phi - az * u1 * Phi +
           az2 * ((hy * hy + 1) * A - hx * (ht + hy * B + u0)) * Ql +
           az2 * ((hx * hx + 1) * B - hy * (ht + hx * A + u0)) * Qm + Qt - Q * phz + F(v) - F_phi;
  };
  return ctx;
}

double LayerModel::H1(double l, double m, const Q1Quadrature& q) const {
  const SurfaceJet J = surface_->jet(l, m);
  const Point3 p{l, m, clamp_z(J.h, spec_->a)};
  const NormalAngles n = normal_angles(J.hx, J.hy);
  const double sM = q1_slope_at_zero(Branch::Minus, q1_context(l, m, Branch::Minus), q);
  const double sP = q1_slope_at_zero(Branch::Plus, q1_context(l, m, Branch::Plus), q);
  auto normal = [&](const OuterBranch& o) {
    return -n.ax * trilinear_sample(o.phi_x, p) - n.ay * trilinear_sample(o.phi_y, p) + n.az * trilinear_sample(o.phi_z, p);
  };
  return sM - sP + normal(*minus_) - normal(*plus_);
}

}  // namespace rdafront
