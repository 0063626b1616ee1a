#include "rdafront/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rdafront/error.hpp"

namespace rdafront {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::OutOfDomain: return "out-of-domain";
    case ErrorKind::DegenerateReference: return "degenerate-reference";
    case ErrorKind::Syntax: return "syntax";
    case ErrorKind::UnknownIdentifier: return "unknown-identifier";
    case ErrorKind::UnboundVariable: return "unbound-variable";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Escape: return "escape";
    case ErrorKind::BlowUp: return "blow-up";
    case ErrorKind::Transversality: return "transversality";
    case ErrorKind::Coverage: return "coverage";
    case ErrorKind::DivisionHazard: return "division-hazard";
    case ErrorKind::ConditionViolated: return "condition-violated";
    case ErrorKind::FrontEscape: return "front-escape";
    case ErrorKind::MultivaluedFront: return "multivalued-front";
    case ErrorKind::DegenerateLayer: return "degenerate-layer";
    case ErrorKind::Projection: return "projection";
    case ErrorKind::Existence: return "existence";
    case ErrorKind::LayerAssembly: return "layer-assembly";
    case ErrorKind::Divergence: return "divergence";
    case ErrorKind::Io: return "io";
    case ErrorKind::Config: return "config";
  }
  return "unknown";
}

Grid3D::Grid3D(int nx, int ny, int nz, double x0, double L, double y0, double M, double a)
    : nx_(nx), ny_(ny), nz_(nz), x0_(x0), L_(L), y0_(y0), M_(M), a_(a) {
  if (nx < 1 || ny < 1 || nz < 2) {
    throw Error(ErrorKind::InvalidArgument, "core.Grid3D", "need nx, ny >= 1 and nz >= 2");
  }
  if (!(L > 0.0) || !(M > 0.0) || !(a > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "core.Grid3D", "periods and depth must be positive");
  }
}

ScalarField3D::ScalarField3D(const Grid3D& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw Error(ErrorKind::InvalidArgument, "core.ScalarField3D",
                "value count " + std::to_string(values_.size()) + " != " + std::to_string(grid_.size()));
  }
  for (std::size_t n = 0; n < values_.size(); ++n) {
    if (!std::isfinite(values_[n])) {
      throw Error(ErrorKind::InvalidArgument, "core.ScalarField3D",
                  "non-finite value at linear index " + std::to_string(n));
    }
  }
}

ScalarField3D ScalarField3D::generate(const Grid3D& grid, const std::function<double(const Point3&)>& fn) {
  std::vector<double> v(grid.size());
  for (int k = 0; k < grid.nz(); ++k)
    for (int j = 0; j < grid.ny(); ++j)
      for (int i = 0; i < grid.nx(); ++i) v[grid.index(i, j, k)] = fn({grid.x(i), grid.y(j), grid.z(k)});
  return ScalarField3D(grid, std::move(v));
}

ScalarField3D ScalarField3D::constant(const Grid3D& grid, double c) {
  return ScalarField3D(grid, std::vector<double>(grid.size(), c));
}

double wrap_periodic(double x, double origin, double period) {
  if (!(period > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "core.wrap_periodic", "period must be positive");
  }
  double r = std::fmod(x - origin, period);
  if (r < 0.0) r += period;
  // fmod of a tiny negative number can round up to exactly one period
  if (r >= period) r -= period;
  return origin + r;
}

double wrap_difference(double d, double period) {
  double r = std::fmod(d + 0.5 * period, period);
  if (r < 0.0) r += period;
  return r - 0.5 * period;
}

double trilinear_sample(const ScalarField3D& field, const Point3& p, double z_eps) {
  const Grid3D& g = field.grid();
  double z = p.z;
  if (z < -z_eps || z > g.a() + z_eps || !std::isfinite(z)) {
    throw Error(ErrorKind::OutOfDomain, "core.trilinear_sample", "z = " + std::to_string(z) + " outside [0, a]");
  }
  z = std::clamp(z, 0.0, g.a());

  const double sx = (wrap_periodic(p.x, g.x0(), g.L()) - g.x0()) / g.hx();
  const double sy = (wrap_periodic(p.y, g.y0(), g.M()) - g.y0()) / g.hy();
  const double sz = z / g.hz();

  int i0 = static_cast<int>(std::floor(sx));
  int j0 = static_cast<int>(std::floor(sy));
  int k0 = std::min(static_cast<int>(std::floor(sz)), g.nz() - 2);
  const double fx = sx - i0, fy = sy - j0, fz = sz - k0;
  i0 %= g.nx();
  j0 %= g.ny();
  const int i1 = (i0 + 1) % g.nx();
  const int j1 = (j0 + 1) % g.ny();
  const int k1 = k0 + 1;

  auto v = [&](int i, int j, int k) { return field.at(i, j, k); };
  const double c00 = v(i0, j0, k0) * (1 - fx) + v(i1, j0, k0) * fx;
  const double c10 = v(i0, j1, k0) * (1 - fx) + v(i1, j1, k0) * fx;
  const double c01 = v(i0, j0, k1) * (1 - fx) + v(i1, j0, k1) * fx;
  const double c11 = v(i0, j1, k1) * (1 - fx) + v(i1, j1, k1) * fx;
  const double c0 = c00 * (1 - fy) + c10 * fy;
  const double c1 = c01 * (1 - fy) + c11 * fy;
  return c0 * (1 - fz) + c1 * fz;
}

double relative_l2_error(const ScalarField3D& a, const ScalarField3D& b) {
  if (!(a.grid() == b.grid())) {
    throw Error(ErrorKind::InvalidArgument, "core.relative_l2_error", "fields live on different grids");
  }
  const Grid3D& g = a.grid();
  double num = 0.0, den = 0.0;
  for (int k = 0; k < g.nz(); ++k) {
    const double w = (k == 0 || k == g.nz() - 1) ? 0.5 : 1.0;
    double sn = 0.0, sd = 0.0;
    for (int j = 0; j < g.ny(); ++j) {
      for (int i = 0; i < g.nx(); ++i) {
        const std::size_t n = g.index(i, j, k);
        const double d = a[n] - b[n];
        sn += d * d;
        sd += b[n] * b[n];
      }
    }
    num += w * sn;
    den += w * sd;
  }
  if (!(den > 0.0)) {
    throw Error(ErrorKind::DegenerateReference, "core.relative_l2_error", "reference field has zero norm");
  }
  return std::sqrt(num / den);
}

}  // namespace rdafront
