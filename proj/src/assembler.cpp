#include "rdafront/assembler.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "rdafront/error.hpp"

namespace rdafront {

namespace {

constexpr double kXiCutoff = 60.0;

const OuterBranch& pick(Branch b, const OuterBranch& minus, const OuterBranch& plus) {
  return b == Branch::Minus ? minus : plus;
}

void check_grids(const FrontSurface& front, const ProblemSpec& spec, const char* stage) {
  if (std::fabs(front.L() - spec.L) > 1e-12 || std::fabs(front.M() - spec.M) > 1e-12) {
    throw Error(ErrorKind::InvalidArgument, stage, "front periods differ from the problem periods");
  }
}

// Projection can fail beyond the focal distance of a strongly curved front. Such
// nodes are still outside the layer when the vertical estimate clears the cutoff.
bool project_or_outer(const Point3& p, const FrontSurface& front, double mu, double r_est, double k0, LocalFrame& f) {
  try {
    f = project_to_front(p, front, mu);
    return true;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Projection && k0 > 0.0 && std::fabs(r_est) / mu > kXiCutoff / k0) return false;
    throw;
  }
}

// Rethrows the first error raised inside a parallel loop with its original kind.
struct FirstError {
  bool set = false;
  ErrorKind kind = ErrorKind::LayerAssembly;
  std::string stage, message;
  void capture(const Error& e) {
#pragma omp critical(rdafront_assembler_error)
    if (!set) {
      set = true;
      kind = e.kind();
      stage = e.stage();
      message = e.detail();
    }
  }
  void rethrow() const {
    if (set) throw Error(kind, stage, message);
  }
};

}  // namespace

AsymptoticSolution assemble_U0(const ProblemSpec& spec, const OuterBranch& minus, const OuterBranch& plus,
                               const FrontSurface& front, const Grid3D& grid, AssemblyMode mode) {
  check_grids(front, spec, "assembler.assemble_U0");
  const double mu = spec.mu;
  std::vector<double> out(grid.size());
  std::size_t outer_only = 0;
  const int total = static_cast<int>(grid.size());

  if (mode == AssemblyMode::ExampleFastpath) {
    for (int n = 0; n < total; ++n) {
      const int i = n % grid.nx(), j = (n / grid.nx()) % grid.ny(), k = n / (grid.nx() * grid.ny());
      const double x = grid.x(i), y = grid.y(j), z = grid.z(k);
      const SurfaceJet J = front.jet(x, y);
      const double h0 = std::clamp(J.h, 0.0, spec.a);
      const Point3 s{x, y, h0}, p{x, y, z};
      const double delta = trilinear_sample(minus.phi, s) - trilinear_sample(plus.phi, s);
      const double Phi = (J.h - z) * delta * (1.0 - J.hx - J.hy) / (2.0 * mu);
      out[n] = z <= J.h ? trilinear_sample(minus.phi, p) - delta / (std::exp(-Phi) + 1.0)
                        : trilinear_sample(plus.phi, p) + delta / (std::exp(Phi) + 1.0);
    }
  } else {
    const LayerModel model(spec, minus, plus, front);
    FirstError err;
#pragma omp parallel for schedule(dynamic, 256) reduction(+ : outer_only)
    for (int n = 0; n < total; ++n) {
      const int i = n % grid.nx(), j = (n / grid.nx()) % grid.ny(), k = n / (grid.nx() * grid.ny());
      const Point3 p{grid.x(i), grid.y(j), grid.z(k)};
      try {
        // vertical estimate first: nodes far from the front never need the projection
        const SurfaceJet J0 = front.jet(p.x, p.y);
        const double r_est = (p.z - J0.h) * normal_angles(J0.hx, J0.hy).az;
        const LayerParams p0 = model.params(p.x, p.y, J0);
        const Branch b0 = r_est >= 0.0 ? Branch::Plus : Branch::Minus;
        const double k0 = p0.alpha_z * std::fabs(p0.P(b0));
        if (k0 > 0.0 && std::fabs(r_est) / mu > 2.0 * kXiCutoff / k0) {
          out[n] = trilinear_sample(pick(b0, minus, plus).phi, p);
          ++outer_only;
          continue;
        }
        LocalFrame f;
        if (!project_or_outer(p, front, mu, r_est, k0, f)) {
          out[n] = trilinear_sample(pick(b0, minus, plus).phi, p);
          ++outer_only;
          continue;
        }
        const Branch b = f.r >= 0.0 ? Branch::Plus : Branch::Minus;
        const LayerParams lp = model.params(f.l, f.m);
        const double outer = trilinear_sample(pick(b, minus, plus).phi, p);
        if (std::fabs(f.xi) > kXiCutoff / (lp.alpha_z * std::fabs(lp.P(b)))) {
          out[n] = outer;
          ++outer_only;
          continue;
        }
        out[n] = outer + q0_profile(f.xi, b, lp);
      } catch (const Error& e) {
        err.capture(e);
      }
    }
    err.rethrow();
  }
  AsymptoticSolution sol;
  sol.order = 0;
  sol.field = ScalarField3D(grid, std::move(out));
  sol.mu = mu;
  sol.t = front.t();
  sol.problem = spec.name;
  sol.outer_only_nodes = outer_only;
  return sol;
}

FrontSurface corrected_front(const FrontSurface& h0, const FrontSurface& h1, double mu) {
  if (h0.nx() != h1.nx() || h0.ny() != h1.ny()) {
    throw Error(ErrorKind::InvalidArgument, "assembler.corrected_front", "h0 and h1 sample grids differ");
  }
  std::vector<double> h(h0.h().size()), ht(h.size());
  for (std::size_t k = 0; k < h.size(); ++k) {
    h[k] = h0.h()[k] + mu * h1.h()[k];
    ht[k] = h0.h_t()[k] + mu * h1.h_t()[k];
  }
  return FrontSurface(h0.nx(), h0.ny(), h0.x0(), h0.L(), h0.y0(), h0.M(), h0.t(), std::move(h), std::move(ht));
}

AsymptoticSolution assemble_U1(const ProblemSpec& spec, const OuterBranch& minus, const OuterBranch& plus,
                               const FrontSurface& h0, const FrontSurface& h1, const Grid3D& grid,
                               const Q1Quadrature& q) {
  check_grids(h0, spec, "assembler.assemble_U1");
  const double mu = spec.mu;
  const FrontSurface front = corrected_front(h0, h1, mu);
  const LayerModel model(spec, minus, plus, front);
  std::vector<double> out(grid.size());
  std::size_t outer_only = 0;
  const int total = static_cast<int>(grid.size());
  FirstError err;
#pragma omp parallel for schedule(dynamic, 64) reduction(+ : outer_only)
  for (int n = 0; n < total; ++n) {
    const int i = n % grid.nx(), j = (n / grid.nx()) % grid.ny(), k = n / (grid.nx() * grid.ny());
    const Point3 p{grid.x(i), grid.y(j), grid.z(k)};
    try {
      const SurfaceJet J0 = front.jet(p.x, p.y);
      const double r_est = (p.z - J0.h) * normal_angles(J0.hx, J0.hy).az;
      const LayerParams p0 = model.params(p.x, p.y, J0);
      const Branch b0 = r_est >= 0.0 ? Branch::Plus : Branch::Minus;
      const double k0 = p0.alpha_z * std::fabs(p0.P(b0));
      if (k0 > 0.0 && std::fabs(r_est) / mu > 2.0 * kXiCutoff / k0) {
        const OuterBranch& o = pick(b0, minus, plus);
        out[n] = trilinear_sample(o.phi, p) + mu * trilinear_sample(o.u1, p);
        ++outer_only;
        continue;
      }
      LocalFrame f;
      if (!project_or_outer(p, front, mu, r_est, k0, f)) {
        const OuterBranch& o = pick(b0, minus, plus);
        out[n] = trilinear_sample(o.phi, p) + mu * trilinear_sample(o.u1, p);
        ++outer_only;
        continue;
      }
      const Branch b = f.r >= 0.0 ? Branch::Plus : Branch::Minus;
      const OuterBranch& o = pick(b, minus, plus);
      const double outer = trilinear_sample(o.phi, p) + mu * trilinear_sample(o.u1, p);
      const LayerParams lp = model.params(f.l, f.m);
      if (std::fabs(f.xi) > kXiCutoff / (lp.alpha_z * std::fabs(lp.P(b)))) {
        out[n] = outer;
        ++outer_only;
        continue;
      }
      const Q1Context ctx = model.q1_context(f.l, f.m, b);
      out[n] = outer + q0_profile(f.xi, b, ctx.params) + mu * q1_profile(f.xi, b, ctx, q);
    } catch (const Error& e) {
      err.capture(e);
    }
  }
  err.rethrow();
  AsymptoticSolution sol;
  sol.order = 1;
  sol.field = ScalarField3D(grid, std::move(out));
  sol.mu = mu;
  sol.t = h0.t();
  sol.problem = spec.name;
  sol.outer_only_nodes = outer_only;
  return sol;
}

}  // namespace rdafront
