#include "rdafront/surface.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rdafront/error.hpp"
#include "rdafront/grid.hpp"

namespace rdafront {

namespace {

double catmull_rom(double p0, double p1, double p2, double p3, double t) {
  return p1 + 0.5 * t * (p2 - p0 + t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + t * (3.0 * (p1 - p2) + p3 - p0)));
}

double catmull_rom_slope(double p0, double p1, double p2, double p3, double t) {
  return 0.5 * (p2 - p0 + t * (2.0 * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) + 3.0 * t * (3.0 * (p1 - p2) + p3 - p0)));
}

}  // namespace

FrontSurface::FrontSurface(int nx, int ny, double x0, double L, double y0, double M, double t, std::vector<double> h,
                           std::vector<double> ht)
    : nx_(nx), ny_(ny), x0_(x0), L_(L), y0_(y0), M_(M), t_(t), h_(std::move(h)), ht_(std::move(ht)) {
  constexpr const char* kStage = "core.FrontSurface";
  if (nx < 4 || ny < 4) throw Error(ErrorKind::InvalidArgument, kStage, "need at least 4 samples per axis");
  const std::size_t n = static_cast<std::size_t>(nx) * ny;
  if (h_.size() != n) throw Error(ErrorKind::InvalidArgument, kStage, "h sample count mismatch");
  if (ht_.empty()) ht_.assign(n, 0.0);
  if (ht_.size() != n) throw Error(ErrorKind::InvalidArgument, kStage, "h_t sample count mismatch");
  for (std::size_t k = 0; k < n; ++k) {
    if (!std::isfinite(h_[k]) || !std::isfinite(ht_[k])) {
      throw Error(ErrorKind::InvalidArgument, kStage, "non-finite sample at " + std::to_string(k));
    }
  }

  const double dx = hx_spacing(), dy = hy_spacing();
  auto at = [&](const std::vector<double>& f, int i, int j) { return f[index((i + nx) % nx, (j + ny) % ny)]; };
  hx_.resize(n);
  hy_.resize(n);
  hxx_.resize(n);
  hxy_.resize(n);
  hyy_.resize(n);
  hxt_.resize(n);
  hyt_.resize(n);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t k = index(i, j);
      hx_[k] = (at(h_, i + 1, j) - at(h_, i - 1, j)) / (2 * dx);
      hy_[k] = (at(h_, i, j + 1) - at(h_, i, j - 1)) / (2 * dy);
      hxx_[k] = (at(h_, i + 1, j) - 2 * h_[k] + at(h_, i - 1, j)) / (dx * dx);
      hyy_[k] = (at(h_, i, j + 1) - 2 * h_[k] + at(h_, i, j - 1)) / (dy * dy);
      hxy_[k] = (at(h_, i + 1, j + 1) - at(h_, i + 1, j - 1) - at(h_, i - 1, j + 1) + at(h_, i - 1, j - 1)) /
                (4 * dx * dy);
      hxt_[k] = (at(ht_, i + 1, j) - at(ht_, i - 1, j)) / (2 * dx);
      hyt_[k] = (at(ht_, i, j + 1) - at(ht_, i, j - 1)) / (2 * dy);
    }
  }
}

SurfaceJet FrontSurface::node_jet(int i, int j) const {
  const std::size_t k = index(i, j);
  return {h_[k], hx_[k], hy_[k], ht_[k], hxx_[k], hxy_[k], hyy_[k], hxt_[k], hyt_[k]};
}

double FrontSurface::interp(const std::vector<double>& f, double x, double y) const {
  const double sx = (wrap_periodic(x, x0_, L_) - x0_) / hx_spacing();
  const double sy = (wrap_periodic(y, y0_, M_) - y0_) / hy_spacing();
  const int i = static_cast<int>(std::floor(sx)), j = static_cast<int>(std::floor(sy));
  const double tx = sx - i, ty = sy - j;
  double col[4];
  for (int b = 0; b < 4; ++b) {
    const int jj = ((j + b - 1) % ny_ + ny_) % ny_;
    const double* row = &f[static_cast<std::size_t>(nx_) * jj];
    auto v = [&](int a) { return row[((i + a - 1) % nx_ + nx_) % nx_]; };
    col[b] = catmull_rom(v(0), v(1), v(2), v(3), tx);
  }
  return catmull_rom(col[0], col[1], col[2], col[3], ty);
}

FrontSurface::Patch FrontSurface::patch(const std::vector<double>& f, double x, double y) const {
  const double sx = (wrap_periodic(x, x0_, L_) - x0_) / hx_spacing();
  const double sy = (wrap_periodic(y, y0_, M_) - y0_) / hy_spacing();
  const int i = static_cast<int>(std::floor(sx)), j = static_cast<int>(std::floor(sy));
  const double tx = sx - i, ty = sy - j;
  double col[4], dcol[4];
  for (int b = 0; b < 4; ++b) {
    const int jj = ((j + b - 1) % ny_ + ny_) % ny_;
    const double* row = &f[static_cast<std::size_t>(nx_) * jj];
    auto v = [&](int a) { return row[((i + a - 1) % nx_ + nx_) % nx_]; };
    col[b] = catmull_rom(v(0), v(1), v(2), v(3), tx);
    dcol[b] = catmull_rom_slope(v(0), v(1), v(2), v(3), tx);
  }
  return {catmull_rom(col[0], col[1], col[2], col[3], ty),
          catmull_rom(dcol[0], dcol[1], dcol[2], dcol[3], ty) / hx_spacing(),
          catmull_rom_slope(col[0], col[1], col[2], col[3], ty) / hy_spacing()};
}

SurfaceJet FrontSurface::jet(double x, double y) const {
  // first derivatives come from the height interpolant itself so that h and its
  // gradient stay consistent; second derivatives differentiate the gradient grids
  const Patch h = patch(h_, x, y), gx = patch(hx_, x, y), gy = patch(hy_, x, y), t = patch(ht_, x, y);
  SurfaceJet J;
  J.h = h.v;
  J.hx = h.dx;
  J.hy = h.dy;
  J.ht = t.v;
  J.hxx = gx.dx;
  J.hxy = 0.5 * (gx.dy + gy.dx);
  J.hyy = gy.dy;
  J.hxt = t.dx;
  J.hyt = t.dy;
  return J;
}

double FrontSurface::height(double x, double y) const { return interp(h_, x, y); }

double FrontSurface::min_h() const { return *std::min_element(h_.begin(), h_.end()); }
double FrontSurface::max_h() const { return *std::max_element(h_.begin(), h_.end()); }

}  // namespace rdafront
