#include "rdafront/reference.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "rdafront/error.hpp"

namespace rdafront {

namespace {

constexpr const char* kStage = "reference";

unsigned bit(Var v) { return 1u << static_cast<int>(v); }

}  // namespace

double u_init_value(const ProblemSpec& spec, double x, double y, double z) {
  if (spec.u_init) return eval(*spec.u_init, Bindings::xyz(x, y, z));
  const double h = eval(spec.h_init, Bindings::xyz(x, y, 0.0));
  const double u0 = eval(spec.u0, Bindings::xyz(x, y, 0.0));
  const double ua = eval(spec.ua, Bindings::xyz(x, y, 0.0));
  const double theta = std::tanh(x + y + (z - h) / (0.1 * spec.mu));
  return 0.5 * ua * (1.0 + theta) + 0.5 * u0 * (1.0 - theta);
}

ScalarField3D make_u_init(const ProblemSpec& spec, const Grid3D& grid) {
  std::vector<double> u(grid.size());
  const CompiledExpr u0(spec.u0), ua(spec.ua);
  for (int k = 0; k < grid.nz(); ++k)
    for (int j = 0; j < grid.ny(); ++j)
      for (int i = 0; i < grid.nx(); ++i) {
        const double x = grid.x(i), y = grid.y(j);
        double v;
        if (k == 0) {
          v = u0(x, y, 0.0);
        } else if (k == grid.nz() - 1) {
          v = ua(x, y, grid.a());
        } else {
          v = u_init_value(spec, x, y, grid.z(k));
        }
        u[grid.index(i, j, k)] = v;
      }
  return ScalarField3D(grid, std::move(u));
}

ReferenceSolver::ReferenceSolver(const ProblemSpec& spec, const Grid3D& grid, const ReferenceOptions& options)
    : spec_(spec), grid_(grid), options_(options), F_(spec.F) {
  if (grid.nz() < 3 || grid.nx() < 3 || grid.ny() < 3) {
    throw Error(ErrorKind::InvalidArgument, kStage, "reference grid needs at least 3 nodes per axis");
  }
  if (!(options.safety > 0.0 && options.safety <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, kStage, "safety factor must lie in (0, 1]");
  }
  const CompiledExpr A(spec.A), B(spec.B), u0(spec.u0), ua(spec.ua);
  A_.resize(grid.size());
  B_.resize(grid.size());
  F_static_valid_ = (F_.uses() & (bit(Var::U) | bit(Var::T))) == 0;
  if (F_static_valid_) F_static_.resize(grid.size());
  for (int k = 0; k < grid.nz(); ++k)
    for (int j = 0; j < grid.ny(); ++j)
      for (int i = 0; i < grid.nx(); ++i) {
        const std::size_t n = grid.index(i, j, k);
        const double x = grid.x(i), y = grid.y(j), z = grid.z(k);
        A_[n] = A(x, y, z);
        B_[n] = B(x, y, z);
        max_abs_A_ = std::max(max_abs_A_, std::fabs(A_[n]));
        max_abs_B_ = std::max(max_abs_B_, std::fabs(B_[n]));
        if (F_static_valid_) F_static_[n] = F_(x, y, z);
      }
  const std::size_t plane = static_cast<std::size_t>(grid.nx()) * grid.ny();
  face0_.resize(plane);
  facea_.resize(plane);
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 0; i < grid.nx(); ++i) {
      face0_[grid.index(i, j, 0)] = u0(grid.x(i), grid.y(j), 0.0);
      facea_[grid.index(i, j, 0)] = ua(grid.x(i), grid.y(j), grid.a());
    }
}

double ReferenceSolver::stable_dt(std::span<const double> u) const {
  const double hx = grid_.hx(), hy = grid_.hy(), hz = grid_.hz();
  double umax = 0.0;
  for (double v : u) umax = std::max(umax, std::fabs(v));
  const double diff = 2.0 * spec_.mu * (1.0 / (hx * hx) + 1.0 / (hy * hy) + 1.0 / (hz * hz));
  const double adv = max_abs_A_ / hx + max_abs_B_ / hy + umax / hz;
  double bound = 1.0 / diff;
  if (adv > 0.0) bound = std::min(bound, 1.0 / adv);
  return options_.safety * bound;
}

void ReferenceSolver::rhs(std::span<const double> u, double t, std::vector<double>& out) const {
  const int nx = grid_.nx(), ny = grid_.ny(), nz = grid_.nz();
  const double hx = grid_.hx(), hy = grid_.hy(), hz = grid_.hz();
  const double mu = spec_.mu;
  const double cx = mu / (hx * hx), cy = mu / (hy * hy), cz = mu / (hz * hz);
  out.assign(u.size(), 0.0);
  // Engquist-Osher flux for f(u) = -u^2/2, whose wave speed is -u
  auto flux = [](double l, double r) {
    const double lm = std::min(l, 0.0), rp = std::max(r, 0.0);
    return -0.5 * lm * lm - 0.5 * rp * rp;
  };
  const bool static_F = F_static_valid_;
#pragma omp parallel for schedule(static)
  for (int k = 1; k < nz - 1; ++k) {
    double vars[kVarCount] = {0.0, 0.0, grid_.z(k), 0.0, t};
    for (int j = 0; j < ny; ++j) {
      const int jm = j == 0 ? ny - 1 : j - 1, jp = j == ny - 1 ? 0 : j + 1;
      for (int i = 0; i < nx; ++i) {
        const int im = i == 0 ? nx - 1 : i - 1, ip = i == nx - 1 ? 0 : i + 1;
        const std::size_t n = grid_.index(i, j, k);
        const double c = u[n];
        const double uxm = u[grid_.index(im, j, k)], uxp = u[grid_.index(ip, j, k)];
        const double uym = u[grid_.index(i, jm, k)], uyp = u[grid_.index(i, jp, k)];
        const double uzm = u[grid_.index(i, j, k - 1)], uzp = u[grid_.index(i, j, k + 1)];
        const double lap = cx * (uxp - 2.0 * c + uxm) + cy * (uyp - 2.0 * c + uym) + cz * (uzp - 2.0 * c + uzm);
        const double A = A_[n], B = B_[n];
        const double ux = A > 0.0 ? (c - uxm) / hx : (uxp - c) / hx;
        const double uy = B > 0.0 ? (c - uym) / hy : (uyp - c) / hy;
        const double uuz = -(flux(c, uzp) - flux(uzm, c)) / hz;
        double F;
        if (static_F) {
          F = F_static_[n];
        } else {
          vars[0] = grid_.x(i);
          vars[1] = grid_.y(j);
          vars[3] = c;
          F = F_(vars);
        }
        out[n] = lap - A * ux - B * uy + uuz - F;
      }
    }
  }
}

void ReferenceSolver::pin_faces(std::vector<double>& u) const {
  const std::size_t top = grid_.index(0, 0, grid_.nz() - 1);
  std::copy(face0_.begin(), face0_.end(), u.begin());
  std::copy(facea_.begin(), facea_.end(), u.begin() + static_cast<std::ptrdiff_t>(top));
}

SolverState ReferenceSolver::step(const SolverState& state, double dt) const {
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, kStage, "time step must be positive");
  const auto u = state.field.values();
  const std::size_t N = u.size();
  std::vector<double> k1, k2, mid(N), next(N);
  rhs(u, state.time, k1);
  if (options_.scheme == TimeScheme::Midpoint) {
    for (std::size_t n = 0; n < N; ++n) mid[n] = u[n] + 0.5 * dt * k1[n];
    pin_faces(mid);
    rhs(mid, state.time + 0.5 * dt, k2);
    for (std::size_t n = 0; n < N; ++n) next[n] = u[n] + dt * k2[n];
  } else {
    for (std::size_t n = 0; n < N; ++n) mid[n] = u[n] + dt * k1[n];
    pin_faces(mid);
    rhs(mid, state.time + dt, k2);
    for (std::size_t n = 0; n < N; ++n) next[n] = u[n] + 0.5 * dt * (k1[n] + k2[n]);
  }
  pin_faces(next);
  for (double v : next) {
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::Divergence, kStage,
                  "non-finite value at step " + std::to_string(state.step_index + 1) + ", t = " +
                      std::to_string(state.time + dt));
    }
  }
  SolverState out;
  out.field = ScalarField3D(grid_, std::move(next));
  out.time = state.time + dt;
  out.step_index = state.step_index + 1;
  return out;
}

std::vector<ScalarField3D> ReferenceSolver::solve(const ScalarField3D& init, const std::vector<double>& output_times,
                                                  SolveLog* log) const {
  if (!(init.grid() == grid_)) throw Error(ErrorKind::InvalidArgument, kStage, "initial field grid mismatch");
  for (std::size_t i = 0; i < output_times.size(); ++i) {
    if (output_times[i] < 0.0 || (i > 0 && output_times[i] <= output_times[i - 1])) {
      throw Error(ErrorKind::InvalidArgument, kStage, "output times must be non-negative and strictly increasing");
    }
  }
  SolveLog local;
  local.under_resolved = grid_.hz() > 0.5 * spec_.mu;
  if (local.under_resolved) {
    std::fprintf(stderr, "warning: reference z spacing %.3g exceeds mu/2 = %.3g\n", grid_.hz(), 0.5 * spec_.mu);
  }
  std::vector<double> start(init.values().begin(), init.values().end());
  pin_faces(start);
  SolverState state{ScalarField3D(grid_, std::move(start)), 0.0, 0};
  std::vector<ScalarField3D> out;
  out.reserve(output_times.size());
  for (double target : output_times) {
    while (state.time < target) {
      double dt = stable_dt(state.field.values());
      // land exactly on the output time; avoid a sliver step just short of it
      if (state.time + dt >= target - 1e-12 * std::max(1.0, target)) dt = target - state.time;
      state = step(state, dt);
      if (state.time > target - 1e-14 * std::max(1.0, target)) state.time = target;
      local.dt_min = local.steps == 0 ? dt : std::min(local.dt_min, dt);
      local.dt_max = std::max(local.dt_max, dt);
      ++local.steps;
    }
    out.push_back(state.field);
  }
  if (log) *log = local;
  return out;
}

std::vector<ScalarField3D> solve_reference(const ProblemSpec& spec, const Grid3D& grid,
                                           const std::vector<double>& output_times, const ReferenceOptions& options,
                                           SolveLog* log) {
  const ReferenceSolver solver(spec, grid, options);
  return solver.solve(make_u_init(spec, grid), output_times, log);
}

}  // namespace rdafront
