#include "rdafront/front.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rdafront/error.hpp"

namespace rdafront {

const FrontSurface& FrontEvolution::at(double t) const {
  for (const auto& s : snapshots)
    if (std::fabs(s.t() - t) <= 1e-12) return s;
  throw Error(ErrorKind::InvalidArgument, "front.FrontEvolution", "no snapshot at t = " + std::to_string(t));
}

QuasiLinearProblem front_problem(const ProblemSpec& spec, const ScalarField3D& phiM, const ScalarField3D& phiP) {
  QuasiLinearProblem p;
  const CompiledExpr A(spec.A), B(spec.B);
  const double a = spec.a;
  const ScalarField3D* pm = &phiM;
  const ScalarField3D* pp = &phiP;
  const double x0 = spec.x0, L = spec.L, y0 = spec.y0, M = spec.M;
  p.rhs = [A, B, a, pm, pp, x0, L, y0, M](const CharState& s) {
    if (!(s.u > -1e-9 && s.u < a + 1e-9)) {
      throw Error(ErrorKind::FrontEscape, "front.solve_h0",
                  "h = " + std::to_string(s.u) + " left [0, a] at t = " + std::to_string(s.z));
    }
    const double h = std::clamp(s.u, 0.0, a);
    const Point3 q{s.x, s.y, h};
    const double x = wrap_periodic(s.x, x0, L), y = wrap_periodic(s.y, y0, M);
    return CharState{A(x, y, h), B(x, y, h), 1.0,
                     -0.5 * (trilinear_sample(*pm, q) + trilinear_sample(*pp, q))};
  };
  const CompiledExpr h0(spec.h_init);
  p.manifold = [h0](double s1, double s2) { return CharState{s1, s2, 0.0, h0(s1, s2, 0.0)}; };
  p.s1_min = spec.x0;
  p.s1_max = spec.x0 + spec.L;
  p.s2_min = spec.y0;
  p.s2_max = spec.y0 + spec.M;
  p.periodic_x = p.periodic_y = true;
  p.x0 = spec.x0;
  p.L = spec.L;
  p.y0 = spec.y0;
  p.M = spec.M;
  return p;
}

namespace {

void check_interior(const FrontSurface& s, double a) {
  const double lo = s.min_h(), hi = s.max_h();
  const bool closed = s.t() == 0.0;
  const bool ok = closed ? (lo >= 0.0 && hi <= a) : (lo > 0.0 && hi < a);
  if (!ok) {
    throw Error(ErrorKind::FrontEscape, "front.solve_h0",
                "front range [" + std::to_string(lo) + ", " + std::to_string(hi) + "] leaves (0, a) at t = " +
                    std::to_string(s.t()));
  }
}

}  // namespace

FrontEvolution solve_h0(const ProblemSpec& spec, const ScalarField3D& phiM, const ScalarField3D& phiP,
                        const std::vector<double>& times, const FrontOptions& opt) {
  constexpr const char* kStage = "front.solve_h0";
  if (!std::is_sorted(times.begin(), times.end()) || (!times.empty() && times.front() < 0.0)) {
    throw Error(ErrorKind::InvalidArgument, kStage, "times must be ascending and non-negative");
  }
  if (opt.nx < 4 || opt.ny < 4 || opt.fan_factor < 1) throw Error(ErrorKind::InvalidArgument, kStage, "grid too small");
  const QuasiLinearProblem prob = front_problem(spec, phiM, phiP);
  const CompiledExpr A(spec.A), B(spec.B);
  const int nx = opt.nx, ny = opt.ny;
  const int n1 = nx * opt.fan_factor, n2 = ny * opt.fan_factor;
  const double ds1 = spec.L / n1, ds2 = spec.M / n2;
  const double hxg = spec.L / nx, hyg = spec.M / ny;

  std::vector<CharState> fan(static_cast<std::size_t>(n1) * n2);
  for (int j = 0; j < n2; ++j)
    for (int i = 0; i < n1; ++i) fan[i + static_cast<std::size_t>(n1) * j] = prob.manifold(spec.x0 + i * ds1, spec.y0 + j * ds2);

  FrontEvolution evo;
  double t_fan = 0.0;
  for (double t : times) {
    if (t > t_fan) {
      const int n = std::max(1, static_cast<int>(std::ceil((t - t_fan) / opt.step - 1e-9)));
      std::string failure;
#pragma omp parallel for schedule(static)
      for (int p = 0; p < n1 * n2; ++p) {
        try {
          fan[p] = propagate_n(prob, fan[p], t - t_fan, n);
        } catch (const Error& e) {
#pragma omp critical(rdafront_front_fan)
          if (failure.empty()) failure = e.relay(kStage);
        }
      }
      if (!failure.empty()) throw Error(ErrorKind::FrontEscape, kStage, failure);
      t_fan = t;
    }

    auto lattice = [&](int i, int j) -> const CharState& {
      return fan[((i % n1 + n1) % n1) + static_cast<std::size_t>(n1) * ((j % n2 + n2) % n2)];
    };
    // lattice Jacobian d(x, y)/d(s1, s2); a non-positive determinant means the fan folded
    auto lattice_jac = [&](int i, int j, std::array<double, 4>& J) {
      // sum of neighbour gaps so a spread wider than half a period still unwraps
      auto dx = [&](const CharState& a, const CharState& b, const CharState& c) {
        return wrap_difference(a.x - b.x, spec.L) + wrap_difference(b.x - c.x, spec.L);
      };
      auto dy = [&](const CharState& a, const CharState& b, const CharState& c) {
        return wrap_difference(a.y - b.y, spec.M) + wrap_difference(b.y - c.y, spec.M);
      };
      J[0] = dx(lattice(i + 1, j), lattice(i, j), lattice(i - 1, j)) / (2 * ds1);
      J[2] = dy(lattice(i + 1, j), lattice(i, j), lattice(i - 1, j)) / (2 * ds1);
      J[1] = dx(lattice(i, j + 1), lattice(i, j), lattice(i, j - 1)) / (2 * ds2);
      J[3] = dy(lattice(i, j + 1), lattice(i, j), lattice(i, j - 1)) / (2 * ds2);
      return J[0] * J[3] - J[1] * J[2];
    };
    for (int j = 0; j < n2; ++j) {
      for (int i = 0; i < n1; ++i) {
        std::array<double, 4> J;
        if (lattice_jac(i, j, J) <= 0.0) {
          throw Error(ErrorKind::MultivaluedFront, kStage,
                      "characteristic fan folds near seed (" + std::to_string(spec.x0 + i * ds1) + ", " +
                          std::to_string(spec.y0 + j * ds2) + ") at t = " + std::to_string(t));
        }
      }
    }

    std::vector<double> h(static_cast<std::size_t>(nx) * ny);
    if (t == 0.0) {
      for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) h[i + static_cast<std::size_t>(nx) * j] = prob.manifold(spec.x0 + i * hxg, spec.y0 + j * hyg).u;
    } else {
      std::vector<std::vector<int>> buckets(static_cast<std::size_t>(nx) * ny);
      for (int p = 0; p < n1 * n2; ++p) {
        const int bi = std::clamp(static_cast<int>((wrap_periodic(fan[p].x, spec.x0, spec.L) - spec.x0) / hxg), 0, nx - 1);
        const int bj = std::clamp(static_cast<int>((wrap_periodic(fan[p].y, spec.y0, spec.M) - spec.y0) / hyg), 0, ny - 1);
        buckets[bi + static_cast<std::size_t>(nx) * bj].push_back(p);
      }
      const int nsteps = std::max(1, static_cast<int>(std::ceil(t / opt.step - 1e-9)));
      std::string failure;
#pragma omp parallel for schedule(dynamic)
      for (int ij = 0; ij < nx * ny; ++ij) {
        const int i = ij % nx, j = ij / nx;
        const double X = spec.x0 + i * hxg, Y = spec.y0 + j * hyg;
        try {
          int best = -1;
          double bestd = std::numeric_limits<double>::infinity();
          for (int r = 0; r <= std::max(nx, ny); ++r) {
            for (int dj = -r; dj <= r; ++dj)
              for (int di = -r; di <= r; ++di) {
                if (std::max(std::abs(di), std::abs(dj)) != r) continue;
                const int bi = ((i + di) % nx + nx) % nx, bj = ((j + dj) % ny + ny) % ny;
                for (int p : buckets[bi + static_cast<std::size_t>(nx) * bj]) {
                  const double dx = wrap_difference(fan[p].x - X, spec.L), dy = wrap_difference(fan[p].y - Y, spec.M);
                  const double d = dx * dx + dy * dy;
                  if (d < bestd) {
                    bestd = d;
                    best = p;
                  }
                }
              }
            const double reach = r * std::min(hxg, hyg);
            if (best >= 0 && reach * reach >= bestd) break;
          }
          const int pi = best % n1, pj = best / n1;
          double s1 = spec.x0 + pi * ds1, s2 = spec.y0 + pj * ds2;
          std::array<double, 4> J;
          lattice_jac(pi, pj, J);
          auto X_of = [&](double a1, double a2) { return propagate_n(prob, prob.manifold(a1, a2), t, nsteps); };
          CharState e = X_of(s1, s2);
          double r0 = wrap_difference(e.x - X, spec.L), r1 = wrap_difference(e.y - Y, spec.M);
          double norm = std::hypot(r0, r1);
          int it = 0;
          while (norm > opt.newton_tol && it < opt.max_newton) {
            ++it;
            const double det = J[0] * J[3] - J[1] * J[2];
            const double d1 = (J[3] * r0 - J[1] * r1) / det, d2 = (J[0] * r1 - J[2] * r0) / det;
            CharState en = X_of(s1 - d1, s2 - d2);
            const double n0 = wrap_difference(en.x - X, spec.L), nn1 = wrap_difference(en.y - Y, spec.M);
            const double nn = std::hypot(n0, nn1);
            if (nn > 0.5 * norm) {
              // refresh with a true finite-difference Jacobian
              const double eps = 1e-7 * std::max(spec.L, spec.M);
              const CharState ea = X_of(s1 + eps, s2), eb = X_of(s1, s2 + eps);
              J[0] = wrap_difference(ea.x - e.x, spec.L) / eps;
              J[2] = wrap_difference(ea.y - e.y, spec.M) / eps;
              J[1] = wrap_difference(eb.x - e.x, spec.L) / eps;
              J[3] = wrap_difference(eb.y - e.y, spec.M) / eps;
              if (nn > norm) continue;
            }
            s1 -= d1;
            s2 -= d2;
            e = en;
            r0 = n0;
            r1 = nn1;
            norm = nn;
          }
          if (norm > std::max(opt.newton_tol, 1e-8)) {
            throw Error(ErrorKind::MultivaluedFront, kStage,
                        "inversion failed at (" + std::to_string(X) + ", " + std::to_string(Y) + "), t = " + std::to_string(t));
          }
          h[ij] = e.u;
        } catch (const Error& err) {
#pragma omp critical(rdafront_front_regrid)
          if (failure.empty()) failure = err.relay(kStage);
        }
      }
      if (!failure.empty()) {
        const bool escape = failure.find("left [0, a]") != std::string::npos;
        throw Error(escape ? ErrorKind::FrontEscape : ErrorKind::MultivaluedFront, kStage, failure);
      }
    }

    const FrontSurface provisional(nx, ny, spec.x0, spec.L, spec.y0, spec.M, t, h);
    std::vector<double> ht(h.size());
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const std::size_t k = provisional.index(i, j);
        const double x = provisional.x(i), y = provisional.y(j), z = std::clamp(h[k], 0.0, spec.a);
        const Point3 q{x, y, z};
        const double G = -0.5 * (trilinear_sample(phiM, q) + trilinear_sample(phiP, q));
        ht[k] = G - A(x, y, z) * provisional.h_x()[k] - B(x, y, z) * provisional.h_y()[k];
      }
    }
    FrontSurface snap(nx, ny, spec.x0, spec.L, spec.y0, spec.M, t, std::move(h), std::move(ht));
    check_interior(snap, spec.a);
    evo.snapshots.push_back(std::move(snap));
  }
  return evo;
}

double eval_H0(double V, double phiM, double phiP, double alpha_z) {
  const LayerParams p = LayerParams::make(V, phiM, phiP, alpha_z);
  return phase_trajectory(p.phiStar, Branch::Minus, p) - phase_trajectory(p.phiStar, Branch::Plus, p);
}

double eval_H0_closed(double V, double phiM, double phiP, double alpha_z) {
  return alpha_z * (phiM - phiP) * (V + 0.5 * (phiM + phiP));
}

H0Function::H0Function(const ProblemSpec& spec, const ScalarField3D& phiM, const ScalarField3D& phiP)
    : phiM_(&phiM), phiP_(&phiP), A_(spec.A), B_(spec.B), a_(spec.a) {}

double H0Function::operator()(double x, double y, const H0Slots& s) const {
  const Grid3D& g = phiM_->grid();
  x = wrap_periodic(x, g.x0(), g.L());
  y = wrap_periodic(y, g.y0(), g.M());
  const double z = std::clamp(s.h, 0.0, a_);
  const Point3 q{x, y, z};
  const double pm = trilinear_sample(*phiM_, q), pp = trilinear_sample(*phiP_, q);
  const double V = s.ht + A_(x, y, z) * s.hx + B_(x, y, z) * s.hy;
  return eval_H0_closed(V, pm, pp, normal_angles(s.hx, s.hy).az);
}

H0Partials H0Function::partials(double x, double y, const H0Slots& s, double rel) const {
  auto d = [&](double H0Slots::*slot) {
    const double step = rel * std::max(1.0, std::fabs(s.*slot));
    H0Slots a = s, b = s;
    a.*slot += step;
    b.*slot -= step;
    return ((*this)(x, y, a) - (*this)(x, y, b)) / (2 * step);
  };
  return {d(&H0Slots::h), d(&H0Slots::hx), d(&H0Slots::hy), d(&H0Slots::ht)};
}

double eval_H1(const LayerModel& model, double l, double m, const Q1Quadrature& q) { return model.H1(l, m, q); }

TransportTable::TransportTable(int nx, int ny, double x0, double L, double y0, double M)
    : nx_(nx), ny_(ny), x0_(x0), L_(L), y0_(y0), M_(M) {}

void TransportTable::add_level(double t, std::vector<TransportCoefficients> nodes) {
  if (nodes.size() != static_cast<std::size_t>(nx_) * ny_) {
    throw Error(ErrorKind::InvalidArgument, "front.TransportTable", "level size mismatch");
  }
  if (!times_.empty() && !(t > times_.back())) {
    throw Error(ErrorKind::InvalidArgument, "front.TransportTable", "levels must be added in increasing time");
  }
  times_.push_back(t);
  levels_.push_back(std::move(nodes));
}

TransportCoefficients TransportTable::spatial(std::size_t level, double x, double y) const {
  const double sx = (wrap_periodic(x, x0_, L_) - x0_) / (L_ / nx_);
  const double sy = (wrap_periodic(y, y0_, M_) - y0_) / (M_ / ny_);
  const int i0 = static_cast<int>(sx) % nx_, j0 = static_cast<int>(sy) % ny_;
  const double fx = sx - std::floor(sx), fy = sy - std::floor(sy);
  const int i1 = (i0 + 1) % nx_, j1 = (j0 + 1) % ny_;
  const auto& L = levels_[level];
  auto at = [&](int i, int j) -> const TransportCoefficients& { return L[i + static_cast<std::size_t>(nx_) * j]; };
  const double w00 = (1 - fx) * (1 - fy), w10 = fx * (1 - fy), w01 = (1 - fx) * fy, w11 = fx * fy;
  auto blend = [&](double TransportCoefficients::*f) {
    return w00 * (at(i0, j0).*f) + w10 * (at(i1, j0).*f) + w01 * (at(i0, j1).*f) + w11 * (at(i1, j1).*f);
  };
  return {blend(&TransportCoefficients::a_t), blend(&TransportCoefficients::b_x), blend(&TransportCoefficients::b_y),
          blend(&TransportCoefficients::c), blend(&TransportCoefficients::g)};
}

TransportCoefficients TransportTable::operator()(double x, double y, double t) const {
  if (times_.empty()) throw Error(ErrorKind::InvalidArgument, "front.TransportTable", "no levels");
  if (t <= times_.front()) return spatial(0, x, y);
  if (t >= times_.back()) return spatial(times_.size() - 1, x, y);
  const std::size_t k = static_cast<std::size_t>(std::upper_bound(times_.begin(), times_.end(), t) - times_.begin());
  const double w = (t - times_[k - 1]) / (times_[k] - times_[k - 1]);
  const TransportCoefficients a = spatial(k - 1, x, y), b = spatial(k, x, y);
  return {a.a_t + w * (b.a_t - a.a_t), a.b_x + w * (b.b_x - a.b_x), a.b_y + w * (b.b_y - a.b_y), a.c + w * (b.c - a.c),
          a.g + w * (b.g - a.g)};
}

FrontEvolution solve_linear_transport(const CoefficientFunction& coef, int nx, int ny, double x0, double L, double y0,
                                      double M, const std::vector<double>& times, double step) {
  constexpr const char* kStage = "front.solve_h1";
  struct Aug {
    double x, y, E, I;
  };
  auto rhs = [&](const Aug& s, double t) {
    const TransportCoefficients c = coef(s.x, s.y, t);
    if (!(std::fabs(c.a_t) > 1e-14)) {
      throw Error(ErrorKind::DegenerateLayer, kStage, "time coefficient vanishes at t = " + std::to_string(t));
    }
    return Aug{c.b_x / c.a_t, c.b_y / c.a_t, -c.c / c.a_t, c.g / c.a_t * std::exp(-s.E)};
  };
  auto add = [](const Aug& s, double h, const Aug& k) { return Aug{s.x + h * k.x, s.y + h * k.y, s.E + h * k.E, s.I + h * k.I}; };

  FrontEvolution evo;
  for (double t : times) {
    std::vector<double> w(static_cast<std::size_t>(nx) * ny, 0.0);
    if (t > 0.0) {
      const int n = std::max(1, static_cast<int>(std::ceil(t / step - 1e-9)));
      const double h = -t / n;
      std::string failure;
#pragma omp parallel for schedule(dynamic)
      for (int ij = 0; ij < nx * ny; ++ij) {
        try {
          Aug s{x0 + (ij % nx) * L / nx, y0 + (ij / nx) * M / ny, 0.0, 0.0};
          double tau = t;
          for (int k = 0; k < n; ++k) {
            const Aug k1 = rhs(s, tau);
            const Aug k2 = rhs(add(s, 0.5 * h, k1), tau + 0.5 * h);
            const Aug k3 = rhs(add(s, 0.5 * h, k2), tau + 0.5 * h);
            const Aug k4 = rhs(add(s, h, k3), tau + h);
            s = Aug{s.x + h / 6 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x), s.y + h / 6 * (k1.y + 2 * k2.y + 2 * k3.y + k4.y),
                    s.E + h / 6 * (k1.E + 2 * k2.E + 2 * k3.E + k4.E), s.I + h / 6 * (k1.I + 2 * k2.I + 2 * k3.I + k4.I)};
            tau = k + 1 == n ? 0.0 : tau + h;
          }
          w[ij] = s.I;
        } catch (const Error& e) {
#pragma omp critical(rdafront_transport)
          if (failure.empty()) failure = e.relay(kStage);
        }
      }
      if (!failure.empty()) throw Error(ErrorKind::DegenerateLayer, kStage, failure);
    }
    const FrontSurface provisional(nx, ny, x0, L, y0, M, t, w);
    std::vector<double> wt(w.size());
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const std::size_t k = provisional.index(i, j);
        const TransportCoefficients c = coef(provisional.x(i), provisional.y(j), t);
        wt[k] = -(c.b_x * provisional.h_x()[k] + c.b_y * provisional.h_y()[k] + c.c * w[k] + c.g) / c.a_t;
      }
    }
    evo.snapshots.emplace_back(nx, ny, x0, L, y0, M, t, std::move(w), std::move(wt));
  }
  return evo;
}

FrontEvolution solve_h1(const ProblemSpec& spec, const OuterBranch& minus, const OuterBranch& plus,
                        const FrontEvolution& evolution0, const std::vector<double>& times, const H1Options& options) {
  constexpr const char* kStage = "front.solve_h1";
  if (evolution0.snapshots.empty()) throw Error(ErrorKind::InvalidArgument, kStage, "empty leading-order evolution");
  const FrontSurface& first = evolution0.snapshots.front();
  const int nx = first.nx(), ny = first.ny();
  const H0Function H0(spec, minus.phi, plus.phi);
  TransportTable table(nx, ny, first.x0(), first.L(), first.y0(), first.M());
  for (const FrontSurface& s : evolution0.snapshots) {
    const LayerModel model(spec, minus, plus, s);
    std::vector<TransportCoefficients> level(static_cast<std::size_t>(nx) * ny);
    std::string failure;
#pragma omp parallel for schedule(dynamic)
    for (int ij = 0; ij < nx * ny; ++ij) {
      const int i = ij % nx, j = ij / nx;
      try {
        const SurfaceJet J = s.node_jet(i, j);
        const H0Partials d = H0.partials(s.x(i), s.y(j), {J.h, J.hx, J.hy, J.ht});
        level[ij] = {d.dht, d.dhx, d.dhy, d.dh, model.H1(s.x(i), s.y(j), options.quadrature)};
      } catch (const Error& e) {
#pragma omp critical(rdafront_h1_levels)
        if (failure.empty()) failure = e.relay(kStage);
      }
    }
    if (!failure.empty()) throw Error(ErrorKind::LayerAssembly, kStage, failure);
    table.add_level(s.t(), std::move(level));
  }
  const double t_last = evolution0.snapshots.back().t();
  for (double t : times) {
    if (t > t_last + 1e-12) {
      throw Error(ErrorKind::InvalidArgument, kStage, "output time " + std::to_string(t) + " beyond the h0 levels");
    }
  }
  return solve_linear_transport([&](double x, double y, double t) { return table(x, y, t); }, nx, ny, first.x0(),
                                first.L(), first.y0(), first.M(), times, options.step);
}

}  // namespace rdafront
