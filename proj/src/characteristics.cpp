#include "rdafront/characteristics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rdafront/error.hpp"

namespace rdafront {

namespace {

CharState axpy(const CharState& s, double h, const CharState& k) {
  return {s.x + h * k.x, s.y + h * k.y, s.z + h * k.z, s.u + h * k.u};
}

bool finite(const CharState& s) {
  return std::isfinite(s.x) && std::isfinite(s.y) && std::isfinite(s.z) && std::isfinite(s.u);
}

std::string at_param(double s1, double s2) {
  return "(s1, s2) = (" + std::to_string(s1) + ", " + std::to_string(s2) + ")";
}

double det3(const std::array<double, 9>& m) {
  return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
         m[2] * (m[3] * m[7] - m[4] * m[6]);
}

// Solves m x = b by Cramer's rule; returns false when m is numerically singular.
bool solve3(const std::array<double, 9>& m, const std::array<double, 3>& b, std::array<double, 3>& x) {
  const double d = det3(m);
  double scale = 0.0;
  for (double v : m) scale = std::max(scale, std::fabs(v));
  if (!(std::fabs(d) > 1e-14 * scale * scale * scale)) return false;
  for (int c = 0; c < 3; ++c) {
    auto mc = m;
    for (int r = 0; r < 3; ++r) mc[3 * r + c] = b[r];
    x[c] = det3(mc) / d;
  }
  return true;
}

struct Residual {
  std::array<double, 3> r;
  double norm;
};

Residual residual(const QuasiLinearProblem& prob, const CharState& X, const Point3& target) {
  Residual out;
  out.r[0] = prob.periodic_x ? wrap_difference(X.x - target.x, prob.L) : X.x - target.x;
  out.r[1] = prob.periodic_y ? wrap_difference(X.y - target.y, prob.M) : X.y - target.y;
  out.r[2] = X.z - target.z;
  out.norm = std::sqrt(out.r[0] * out.r[0] + out.r[1] * out.r[1] + out.r[2] * out.r[2]);
  return out;
}

}  // namespace

QuasiLinearProblem make_quasilinear(const Expr& a1, const Expr& a2, const Expr& a3, const Expr& f) {
  QuasiLinearProblem p;
  CompiledExpr c1(a1), c2(a2), c3(a3), cf(f);
  p.rhs = [c1, c2, c3, cf](const CharState& s) {
    const double v[kVarCount] = {s.x, s.y, s.z, s.u, 0.0};
    return CharState{c1(v), c2(v), c3(v), cf(v)};
  };
  return p;
}

CharState rk4_step(const QuasiLinearProblem& prob, const CharState& s, double h) {
  const CharState k1 = prob.rhs(s);
  const CharState k2 = prob.rhs(axpy(s, 0.5 * h, k1));
  const CharState k3 = prob.rhs(axpy(s, 0.5 * h, k2));
  const CharState k4 = prob.rhs(axpy(s, h, k3));
  const double w = h / 6.0;
  return {s.x + w * (k1.x + 2 * k2.x + 2 * k3.x + k4.x), s.y + w * (k1.y + 2 * k2.y + 2 * k3.y + k4.y),
          s.z + w * (k1.z + 2 * k2.z + 2 * k3.z + k4.z), s.u + w * (k1.u + 2 * k2.u + 2 * k3.u + k4.u)};
}

CharState propagate_n(const QuasiLinearProblem& prob, const CharState& start, double tau, int n) {
  CharState s = start;
  if (tau == 0.0) return s;
  const double h = tau / n;
  for (int i = 0; i < n; ++i) s = rk4_step(prob, s, h);
  return s;
}

CharState propagate(const QuasiLinearProblem& prob, const CharState& start, double tau, double step) {
  const int n = std::max(1, static_cast<int>(std::ceil(std::fabs(tau) / step - 1e-12)));
  return propagate_n(prob, start, tau, n);
}

CharacteristicPath integrate_characteristic(const QuasiLinearProblem& prob, double s1, double s2,
                                            const StopFunction& stop, double step, double max_span) {
  constexpr const char* kStage = "characteristics.integrate_characteristic";
  if (!(step > 0.0)) throw Error(ErrorKind::InvalidArgument, kStage, "step must be positive");
  CharacteristicPath path;
  CharState s = prob.manifold(s1, s2);
  double tau = 0.0;
  path.tau.push_back(tau);
  path.states.push_back(s);
  double g = stop(s);
  if (g >= 0.0) return path;

  while (tau < max_span) {
    CharState next;
    try {
      next = rk4_step(prob, s, step);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Domain) throw;
      next.u = INFINITY;
    }
    if (!finite(next)) throw Error(ErrorKind::BlowUp, kStage, "non-finite state at tau = " + std::to_string(tau) + ", " + at_param(s1, s2));
    const double gn = stop(next);
    if (gn >= 0.0) {
      // bisection on the sub-step length
      double lo = 0.0, hi = step;
      CharState shi = next;
      double ghi = gn;
      for (int it = 0; it < 200 && ghi > 1e-10; ++it) {
        const double mid = 0.5 * (lo + hi);
        const CharState sm = rk4_step(prob, s, mid);
        const double gm = stop(sm);
        if (gm >= 0.0 || gm >= -1e-10) {
          hi = mid;
          shi = sm;
          ghi = gm;
          if (gm < 0.0) break;
        } else {
          lo = mid;
        }
      }
      path.tau.push_back(tau + hi);
      path.states.push_back(shi);
      return path;
    }
    s = next;
    g = gn;
    tau += step;
    path.tau.push_back(tau);
    path.states.push_back(s);
  }
  throw Error(ErrorKind::Escape, kStage, "stop condition not reached within span " + std::to_string(max_span) + ", " + at_param(s1, s2));
}

double transversality_jacobian(const QuasiLinearProblem& prob, double s1, double s2, double ds) {
  const CharState p = prob.manifold(s1, s2);
  const CharState p1 = prob.manifold(s1 + ds, s2);
  const CharState p2 = prob.manifold(s1, s2 + ds);
  const CharState a = prob.rhs(p);
  const std::array<double, 9> m = {a.x,
                                   a.y,
                                   a.z,
                                   (p1.x - p.x) / ds,
                                   (p1.y - p.y) / ds,
                                   (p1.z - p.z) / ds,
                                   (p2.x - p.x) / ds,
                                   (p2.y - p.y) / ds,
                                   (p2.z - p.z) / ds};
  return det3(m);
}

bool invert_characteristic(const QuasiLinearProblem& prob, const Point3& target, std::array<double, 3>& s,
                           const SolveOptions& options, double* residual_out, int* iterations, CharState* end_state) {
  const int n = std::max(1, static_cast<int>(std::ceil(std::fabs(s[2]) / options.step)));
  auto X = [&](const std::array<double, 3>& q) { return propagate_n(prob, prob.manifold(q[0], q[1]), q[2], n); };
  const double d1 = 1e-6 * std::max(1.0, prob.s1_max - prob.s1_min);
  const double d2 = 1e-6 * std::max(1.0, prob.s2_max - prob.s2_min);

  CharState end = X(s);
  Residual res = residual(prob, end, target);
  std::array<double, 9> J{};
  auto jacobian = [&] {
    const CharState e1 = X({s[0] + d1, s[1], s[2]});
    const CharState e2 = X({s[0], s[1] + d2, s[2]});
    const CharState a = prob.rhs(end);
    const Residual r1 = residual(prob, e1, target), r2 = residual(prob, e2, target);
    for (int r = 0; r < 3; ++r) {
      J[3 * r + 0] = (r1.r[r] - res.r[r]) / d1;
      J[3 * r + 1] = (r2.r[r] - res.r[r]) / d2;
    }
    J[2] = a.x;
    J[5] = a.y;
    J[8] = a.z;
  };
  jacobian();
  int it = 0;
  bool ok = res.norm <= options.newton_tol;
  while (!ok && it < options.max_newton) {
    ++it;
    std::array<double, 3> dx;
    if (!solve3(J, res.r, dx)) break;
    std::array<double, 3> trial = {s[0] - dx[0], s[1] - dx[1], s[2] - dx[2]};
    CharState e = X(trial);
    Residual rt = residual(prob, e, target);
    if (!finite(e) || rt.norm > 0.5 * res.norm) {
      // chord step stalled: refresh the Jacobian at the current point and retry
      jacobian();
      if (!solve3(J, res.r, dx)) break;
      trial = {s[0] - dx[0], s[1] - dx[1], s[2] - dx[2]};
      e = X(trial);
      rt = residual(prob, e, target);
      if (!finite(e)) break;
    }
    s = trial;
    end = e;
    res = rt;
    ok = res.norm <= options.newton_tol;
  }
  if (residual_out) *residual_out = res.norm;
  if (iterations) *iterations = it;
  if (end_state) *end_state = end;
  return ok;
}

ScalarField3D solve_on_grid(const QuasiLinearProblem& prob, const Grid3D& g, const StopFunction& stop,
                            FanDensity density, const SolveOptions& options, SolveDiagnostics* diag) {
  constexpr const char* kStage = "characteristics.solve_on_grid";
  if (density.n1 < 2 || density.n2 < 2) throw Error(ErrorKind::InvalidArgument, kStage, "fan density must be >= 2");
  const int n1 = density.n1, n2 = density.n2;
  auto s1_of = [&](int i) {
    return prob.s1_min + (prob.s1_max - prob.s1_min) * i / (prob.periodic_x ? n1 : n1 - 1);
  };
  auto s2_of = [&](int j) {
    return prob.s2_min + (prob.s2_max - prob.s2_min) * j / (prob.periodic_y ? n2 : n2 - 1);
  };

  // transversality over the fan lattice
  double jref = 0.0;
  for (int j = 0; j < n2; ++j) {
    for (int i = 0; i < n1; ++i) {
      const double J = transversality_jacobian(prob, s1_of(i), s2_of(j));
      if (std::fabs(J) < 1e-8) {
        throw Error(ErrorKind::Transversality, kStage, "|J| = " + std::to_string(std::fabs(J)) + " at " + at_param(s1_of(i), s2_of(j)));
      }
      if (jref == 0.0) jref = J;
    }
  }

  std::vector<CharacteristicPath> fan(static_cast<std::size_t>(n1) * n2);
#pragma omp parallel for schedule(dynamic)
  for (int p = 0; p < n1 * n2; ++p) {
    fan[p] = integrate_characteristic(prob, s1_of(p % n1), s2_of(p / n1), stop, options.step, options.max_span);
  }

  SolveDiagnostics local;
  // fold detection: orientation of d(x,y,z)/d(s1,s2,tau) along the fan
  for (int j = 0; j < n2; ++j) {
    for (int i = 0; i < n1; ++i) {
      const int ip = prob.periodic_x ? (i + 1) % n1 : i + 1, im = prob.periodic_x ? (i + n1 - 1) % n1 : i - 1;
      const int jp = prob.periodic_y ? (j + 1) % n2 : j + 1, jm = prob.periodic_y ? (j + n2 - 1) % n2 : j - 1;
      if (ip >= n1 || im < 0 || jp >= n2 || jm < 0) continue;
      const auto& c = fan[i + n1 * j];
      const auto& a1 = fan[ip + n1 * j];
      const auto& b1 = fan[im + n1 * j];
      const auto& a2 = fan[i + n1 * jp];
      const auto& b2 = fan[i + n1 * jm];
      const std::size_t len = std::min({c.states.size(), a1.states.size(), b1.states.size(), a2.states.size(), b2.states.size()});
      for (std::size_t k = 1; k + 1 < len; ++k) {
        const CharState r = prob.rhs(c.states[k]);
        // through the centre state so spreads beyond half a period still unwrap
        const CharState& mid = c.states[k];
        auto dx = [&](const CharState& p, const CharState& q, double period, bool per) {
          return per ? wrap_difference(p.x - mid.x, period) + wrap_difference(mid.x - q.x, period) : p.x - q.x;
        };
        auto dy = [&](const CharState& p, const CharState& q, double period, bool per) {
          return per ? wrap_difference(p.y - mid.y, period) + wrap_difference(mid.y - q.y, period) : p.y - q.y;
        };
        const std::array<double, 9> m = {r.x,
                                         r.y,
                                         r.z,
                                         dx(a1.states[k], b1.states[k], prob.L, prob.periodic_x),
                                         dy(a1.states[k], b1.states[k], prob.M, prob.periodic_y),
                                         a1.states[k].z - b1.states[k].z,
                                         dx(a2.states[k], b2.states[k], prob.L, prob.periodic_x),
                                         dy(a2.states[k], b2.states[k], prob.M, prob.periodic_y),
                                         a2.states[k].z - b2.states[k].z};
        if (det3(m) * jref <= 0.0) ++local.fold_samples;
      }
    }
  }

  struct Crossing {
    double x, y, tau, u;
    int path;
  };
  const int nx = g.nx(), ny = g.ny(), nz = g.nz();
  std::vector<std::vector<Crossing>> slices(nz);
  const double ztol = 1e-9 * std::max(1.0, g.a());
  for (int p = 0; p < n1 * n2; ++p) {
    const auto& path = fan[p];
    for (std::size_t n = 0; n + 1 < path.states.size(); ++n) {
      const CharState& A = path.states[n];
      const CharState& B = path.states[n + 1];
      const double zlo = std::min(A.z, B.z) - ztol, zhi = std::max(A.z, B.z) + ztol;
      const int klo = std::max(0, static_cast<int>(std::ceil(zlo / g.hz())));
      const int khi = std::min(nz - 1, static_cast<int>(std::floor(zhi / g.hz())));
      for (int k = klo; k <= khi; ++k) {
        const double zk = g.z(k);
        if (zk < zlo || zk > zhi) continue;
        const double dz = B.z - A.z;
        const double w = dz != 0.0 ? std::clamp((zk - A.z) / dz, 0.0, 1.0) : 0.0;
        slices[k].push_back({A.x + w * (B.x - A.x), A.y + w * (B.y - A.y),
                             path.tau[n] + w * (path.tau[n + 1] - path.tau[n]), A.u + w * (B.u - A.u), p});
      }
    }
  }

  std::vector<double> values(g.size());
  std::vector<std::size_t> failed;
  double max_res = 0.0;
  int max_it = 0;

  for (int k = 0; k < nz; ++k) {
    const auto& cross = slices[k];
    if (cross.empty()) {
      throw Error(ErrorKind::Coverage, kStage, "no fan characteristic reaches z = " + std::to_string(g.z(k)));
    }
    // bucket crossings by target cell
    std::vector<std::vector<int>> buckets(static_cast<std::size_t>(nx) * ny);
    for (int c = 0; c < static_cast<int>(cross.size()); ++c) {
      const double wx = prob.periodic_x ? wrap_periodic(cross[c].x, g.x0(), g.L()) : cross[c].x;
      const double wy = prob.periodic_y ? wrap_periodic(cross[c].y, g.y0(), g.M()) : cross[c].y;
      const int bi = std::clamp(static_cast<int>(std::floor((wx - g.x0()) / g.hx())), 0, nx - 1);
      const int bj = std::clamp(static_cast<int>(std::floor((wy - g.y0()) / g.hy())), 0, ny - 1);
      buckets[bi + static_cast<std::size_t>(nx) * bj].push_back(c);
    }
    auto nearest = [&](int i, int j) {
      const double tx = g.x(i), ty = g.y(j);
      int best = -1;
      double bestd = std::numeric_limits<double>::infinity();
      const int rmax = std::max(nx, ny);
      for (int r = 0; r <= rmax; ++r) {
        for (int dj = -r; dj <= r; ++dj) {
          for (int di = -r; di <= r; ++di) {
            if (std::max(std::abs(di), std::abs(dj)) != r) continue;
            int bi = i + di, bj = j + dj;
            if (prob.periodic_x) bi = ((bi % nx) + nx) % nx;
            if (prob.periodic_y) bj = ((bj % ny) + ny) % ny;
            if (bi < 0 || bi >= nx || bj < 0 || bj >= ny) continue;
            for (int c : buckets[bi + static_cast<std::size_t>(nx) * bj]) {
              const double ddx = prob.periodic_x ? wrap_difference(cross[c].x - tx, g.L()) : cross[c].x - tx;
              const double ddy = prob.periodic_y ? wrap_difference(cross[c].y - ty, g.M()) : cross[c].y - ty;
              const double d = ddx * ddx + ddy * ddy;
              if (d < bestd) {
                bestd = d;
                best = c;
              }
            }
          }
        }
        // every unvisited bucket is at least r cells away
        const double reach = r * std::min(g.hx(), g.hy());
        if (best >= 0 && reach * reach >= bestd) break;
      }
      return best;
    };

#pragma omp parallel for schedule(dynamic)
    for (int ij = 0; ij < nx * ny; ++ij) {
      const int i = ij % nx, j = ij / nx;
      const int c = nearest(i, j);
      const Crossing& cr = cross[c];
      std::array<double, 3> s = {s1_of(cr.path % n1), s2_of(cr.path / n1), cr.tau};
      double res = 0.0;
      int its = 0;
      CharState end;
      const Point3 target{g.x(i), g.y(j), g.z(k)};
      const bool ok = invert_characteristic(prob, target, s, options, &res, &its, &end);
      const std::size_t idx = g.index(i, j, k);
      values[idx] = ok ? end.u : cr.u;
#pragma omp critical(rdafront_solve_on_grid)
      {
        if (!ok) failed.push_back(idx);
        max_res = std::max(max_res, ok ? res : 0.0);
        max_it = std::max(max_it, its);
      }
    }
  }

  std::sort(failed.begin(), failed.end());
  local.newton_failures = failed.size();
  local.failed_nodes = failed;
  local.max_residual = max_res;
  local.max_iterations = max_it;
  if (diag) *diag = local;
  if (static_cast<double>(failed.size()) > options.max_failure_fraction * static_cast<double>(g.size())) {
    std::string list;
    for (std::size_t n = 0; n < std::min<std::size_t>(failed.size(), 10); ++n) list += " " + std::to_string(failed[n]);
    throw Error(ErrorKind::Coverage, kStage,
                "Newton failed at " + std::to_string(failed.size()) + " of " + std::to_string(g.size()) + " nodes; first:" + list);
  }
  return ScalarField3D(g, std::move(values));
}

}  // namespace rdafront
