#include "rdafront/outer.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "rdafront/error.hpp"

namespace rdafront {

const char* to_string(Branch b) { return b == Branch::Minus ? "minus" : "plus"; }

QuasiLinearProblem degenerate_problem(const ProblemSpec& spec, Branch branch) {
  QuasiLinearProblem p = make_quasilinear(spec.A, spec.B, -Expr::variable(Var::U), -spec.F);
  const CompiledExpr face(branch == Branch::Minus ? spec.u0 : spec.ua);
  const double z0 = branch == Branch::Minus ? 0.0 : spec.a;
  p.manifold = [face, z0](double s1, double s2) { return CharState{s1, s2, z0, face(s1, s2, z0)}; };
  p.s1_min = spec.x0;
  p.s1_max = spec.x0 + spec.L;
  p.s2_min = spec.y0;
  p.s2_max = spec.y0 + spec.M;
  p.periodic_x = p.periodic_y = true;
  p.x0 = spec.x0;
  p.L = spec.L;
  p.y0 = spec.y0;
  p.M = spec.M;
  // coefficients live on the periodic extension of the base cell
  p.rhs = [base = std::move(p.rhs), x0 = spec.x0, L = spec.L, y0 = spec.y0, M = spec.M](CharState s) {
    s.x = wrap_periodic(s.x, x0, L);
    s.y = wrap_periodic(s.y, y0, M);
    return base(s);
  };
  return p;
}

ScalarField3D compute_phi(const ProblemSpec& spec, Branch branch, const Grid3D& grid, const OuterOptions& options,
                          SolveDiagnostics* diag) {
  const QuasiLinearProblem prob = degenerate_problem(spec, branch);
  const double a = spec.a;
  StopFunction stop;
  if (branch == Branch::Minus) {
    stop = [a](const CharState& s) { return s.z - a; };
  } else {
    stop = [](const CharState& s) { return -s.z; };
  }
  ScalarField3D phi = solve_on_grid(prob, grid, stop, options.fan, options.solve, diag);
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const bool ok = branch == Branch::Minus ? phi[n] < 0.0 : phi[n] > 0.0;
    if (!ok) {
      throw Error(ErrorKind::ConditionViolated, "outer.compute_phi",
                  std::string("branch ") + to_string(branch) + " changes sign at node " + std::to_string(n));
    }
  }
  return phi;
}

FieldPartials fd_partials(const ScalarField3D& f) {
  const Grid3D& g = f.grid();
  const int nx = g.nx(), ny = g.ny(), nz = g.nz();
  std::vector<double> dx(g.size()), dy(g.size()), dz(g.size());
  const double hx = g.hx(), hy = g.hy(), hz = g.hz();
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const std::size_t n = g.index(i, j, k);
        dx[n] = (f.at((i + 1) % nx, j, k) - f.at((i + nx - 1) % nx, j, k)) / (2 * hx);
        dy[n] = (f.at(i, (j + 1) % ny, k) - f.at(i, (j + ny - 1) % ny, k)) / (2 * hy);
        if (nz == 2) {
          dz[n] = (f.at(i, j, 1) - f.at(i, j, 0)) / hz;
        } else if (k == 0) {
          dz[n] = (-3 * f.at(i, j, 0) + 4 * f.at(i, j, 1) - f.at(i, j, 2)) / (2 * hz);
        } else if (k == nz - 1) {
          dz[n] = (3 * f.at(i, j, k) - 4 * f.at(i, j, k - 1) + f.at(i, j, k - 2)) / (2 * hz);
        } else {
          dz[n] = (f.at(i, j, k + 1) - f.at(i, j, k - 1)) / (2 * hz);
        }
      }
    }
  }
  return {ScalarField3D(g, std::move(dx)), ScalarField3D(g, std::move(dy)), ScalarField3D(g, std::move(dz))};
}

ScalarField3D fd_laplacian(const ScalarField3D& f) {
  const Grid3D& g = f.grid();
  const int nx = g.nx(), ny = g.ny(), nz = g.nz();
  if (nz < 4) throw Error(ErrorKind::InvalidArgument, "outer.fd_laplacian", "need nz >= 4");
  const double ix2 = 1.0 / (g.hx() * g.hx()), iy2 = 1.0 / (g.hy() * g.hy()), iz2 = 1.0 / (g.hz() * g.hz());
  std::vector<double> out(g.size());
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const double c = f.at(i, j, k);
        double v = (f.at((i + 1) % nx, j, k) - 2 * c + f.at((i + nx - 1) % nx, j, k)) * ix2 +
                   (f.at(i, (j + 1) % ny, k) - 2 * c + f.at(i, (j + ny - 1) % ny, k)) * iy2;
        if (k == 0) {
          v += (2 * c - 5 * f.at(i, j, 1) + 4 * f.at(i, j, 2) - f.at(i, j, 3)) * iz2;
        } else if (k == nz - 1) {
          v += (2 * c - 5 * f.at(i, j, k - 1) + 4 * f.at(i, j, k - 2) - f.at(i, j, k - 3)) * iz2;
        } else {
          v += (f.at(i, j, k + 1) - 2 * c + f.at(i, j, k - 1)) * iz2;
        }
        out[g.index(i, j, k)] = v;
      }
    }
  }
  return ScalarField3D(g, std::move(out));
}

ScalarField3D compute_W(const ProblemSpec& spec, const OuterBranch& outer) {
  const CompiledExpr Fu(differentiate(spec.F, Var::U));
  const Grid3D& g = outer.phi.grid();
  std::vector<double> w(g.size());
  for (int k = 0; k < g.nz(); ++k)
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) {
        const std::size_t n = g.index(i, j, k);
        w[n] = -outer.phi_z[n] + Fu(outer.phi[n], g.x(i), g.y(j), g.z(k));
      }
  return ScalarField3D(g, std::move(w));
}

ScalarField3D compute_u1(const ProblemSpec& spec, const OuterBranch& outer, int substeps) {
  constexpr const char* kStage = "outer.compute_u1";
  if (substeps < 1) throw Error(ErrorKind::InvalidArgument, kStage, "substeps must be >= 1");
  const Grid3D& g = outer.phi.grid();
  const CompiledExpr A(spec.A), B(spec.B);
  const double z0 = outer.branch == Branch::Minus ? 0.0 : g.a();
  const double dz_max = g.hz() / substeps;

  auto phi_at = [&](double x, double y, double z) {
    const double p = trilinear_sample(outer.phi, {x, y, z});
    if (std::fabs(p) < 1e-6) {
      throw Error(ErrorKind::DivisionHazard, kStage,
                  "|phi| < 1e-6 at (" + std::to_string(x) + ", " + std::to_string(y) + ", " + std::to_string(z) + ")");
    }
    return p;
  };
  auto slope = [&](double x, double y, double z, double& sx, double& sy) {
    const double p = phi_at(x, y, z);
    x = wrap_periodic(x, g.x0(), g.L());
    y = wrap_periodic(y, g.y0(), g.M());
    sx = -A(x, y, z) / p;
    sy = -B(x, y, z) / p;
  };

  std::vector<double> u1(g.size(), 0.0);
  const int total = g.nx() * g.ny() * g.nz();
  std::string failure;
#pragma omp parallel for schedule(dynamic, 64)
  for (int n = 0; n < total; ++n) {
    const int i = n % g.nx(), j = (n / g.nx()) % g.ny(), k = n / (g.nx() * g.ny());
    const double zn = g.z(k);
    if (zn == z0) continue;
    try {
      const int N = std::max(1, static_cast<int>(std::ceil(std::fabs(zn - z0) / dz_max - 1e-9)));
      const double h = (z0 - zn) / N;
      double x = g.x(i), y = g.y(j), z = zn;
      double E = 0.0, acc = 0.0;
      const Point3 p0{x, y, z};
      double ph = phi_at(x, y, z);
      double gprev = -trilinear_sample(outer.f1bar, p0) / ph;
      double wprev = trilinear_sample(outer.W, p0) / ph;
      for (int s = 0; s < N; ++s) {
        double k1x, k1y, k2x, k2y, k3x, k3y, k4x, k4y;
        slope(x, y, z, k1x, k1y);
        slope(x + 0.5 * h * k1x, y + 0.5 * h * k1y, z + 0.5 * h, k2x, k2y);
        slope(x + 0.5 * h * k2x, y + 0.5 * h * k2y, z + 0.5 * h, k3x, k3y);
        const double zn1 = s + 1 == N ? z0 : zn + (s + 1) * h;
        slope(x + h * k3x, y + h * k3y, zn1, k4x, k4y);
        x += h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x);
        y += h / 6 * (k1y + 2 * k2y + 2 * k3y + k4y);
        const Point3 p{x, y, zn1};
        ph = phi_at(x, y, zn1);
        const double gnext = -trilinear_sample(outer.f1bar, p) / ph;
        const double wnext = trilinear_sample(outer.W, p) / ph;
        // E: integral of w from the current sample up to the node
        const double Enext = E + 0.5 * (wprev + wnext) * (z - zn1);
        acc += 0.5 * (gprev * std::exp(E) + gnext * std::exp(Enext)) * (z - zn1);
        E = Enext;
        gprev = gnext;
        wprev = wnext;
        z = zn1;
      }
      u1[n] = acc;
    } catch (const Error& e) {
#pragma omp critical(rdafront_compute_u1)
      if (failure.empty()) failure = e.relay(kStage);
    }
  }
  if (!failure.empty()) throw Error(ErrorKind::DivisionHazard, kStage, failure);
  return ScalarField3D(g, std::move(u1));
}

OuterBranch build_outer(const ProblemSpec& spec, Branch branch, const Grid3D& grid, const OuterOptions& options) {
  OuterBranch o;
  o.branch = branch;
  o.phi = compute_phi(spec, branch, grid, options);
  FieldPartials d = fd_partials(o.phi);
  o.phi_x = std::move(d.dx);
  o.phi_y = std::move(d.dy);
  o.phi_z = std::move(d.dz);
  o.W = compute_W(spec, o);
  o.f1bar = fd_laplacian(o.phi);
  o.u1 = compute_u1(spec, o, options.u1_substeps);
  return o;
}

LipschitzEstimate check_lipschitz_sampling(const ProblemSpec& spec, const OuterBranch& outer, int n_samples,
                                           std::uint64_t seed) {
  constexpr const char* kStage = "outer.check_lipschitz_sampling";
  if (n_samples < 1) throw Error(ErrorKind::InvalidArgument, kStage, "n_samples must be positive");
  const CompiledExpr A(spec.A), B(spec.B);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(spec.x0, spec.x0 + spec.L), uy(spec.y0, spec.y0 + spec.M),
      uz(0.0, spec.a), logd(std::log(1e-3), std::log(1e-1));
  std::normal_distribution<double> nrm(0.0, 1.0);

  auto ratio = [&](double x, double y, double z, double& ga, double& gb) {
    const double p = trilinear_sample(outer.phi, {x, y, z});
    if (std::fabs(p) < 1e-6) throw Error(ErrorKind::ConditionViolated, kStage, "|phi| < 1e-6 at a sample point");
    ga = A(x, y, z) / p;
    gb = B(x, y, z) / p;
  };

  LipschitzEstimate est;
  double ka = 0.0, kb = 0.0;
  const int total = 4 * n_samples;
  for (int s = 0; s < total; ++s) {
    const double x = ux(rng), y = uy(rng), z = uz(rng);
    double dx = nrm(rng), dy = nrm(rng), dz = nrm(rng);
    const double norm = std::sqrt(dx * dx + dy * dy + dz * dz);
    const double d = std::exp(logd(rng));
    dx *= d / norm;
    dy *= d / norm;
    dz *= d / norm;
    if (z + dz < 0.0 || z + dz > spec.a) dz = -dz;
    const double zq = std::clamp(z + dz, 0.0, spec.a);
    const double dist = std::sqrt(dx * dx + dy * dy + (zq - z) * (zq - z));
    double ga0, gb0, ga1, gb1;
    ratio(x, y, z, ga0, gb0);
    ratio(x + dx, y + dy, zq, ga1, gb1);
    if (dist > 0.0) {
      ka = std::max(ka, std::fabs(ga1 - ga0) / dist);
      kb = std::max(kb, std::fabs(gb1 - gb0) / dist);
    }
    if (s + 1 == n_samples || s + 1 == 2 * n_samples || s + 1 == 4 * n_samples) {
      const int slot = s + 1 == n_samples ? 0 : (s + 1 == 2 * n_samples ? 1 : 2);
      est.K_A_seq[slot] = ka;
      est.K_B_seq[slot] = kb;
    }
  }
  est.K_A = ka;
  est.K_B = kb;
  auto grows = [](const std::array<double, 3>& k) { return k[2] > 2.0 * k[0] && k[2] > 1e-12; };
  est.flagged = grows(est.K_A_seq) || grows(est.K_B_seq);
  return est;
}

}  // namespace rdafront
