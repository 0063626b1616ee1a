#pragma once

#include <vector>

namespace rdafront {

/// Front position and its partials at one surface point.
struct SurfaceJet {
  double h = 0.0, hx = 0.0, hy = 0.0, ht = 0.0;
  double hxx = 0.0, hxy = 0.0, hyy = 0.0;
  double hxt = 0.0, hyt = 0.0;
};

/// Periodic nx x ny samples of h(x, y) at time t, with central-difference
/// partials and the h_t samples supplied by the evolution solver.
class FrontSurface {
 public:
  FrontSurface() = default;
  /// h and ht are x-fastest; ht may be empty (treated as zero).
  FrontSurface(int nx, int ny, double x0, double L, double y0, double M, double t, std::vector<double> h,
               std::vector<double> ht = {});

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double x0() const { return x0_; }
  double y0() const { return y0_; }
  double L() const { return L_; }
  double M() const { return M_; }
  double t() const { return t_; }
  double hx_spacing() const { return L_ / nx_; }
  double hy_spacing() const { return M_ / ny_; }
  double x(int i) const { return x0_ + i * hx_spacing(); }
  double y(int j) const { return y0_ + j * hy_spacing(); }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) + static_cast<std::size_t>(nx_) * j; }

  const std::vector<double>& h() const { return h_; }
  const std::vector<double>& h_x() const { return hx_; }
  const std::vector<double>& h_y() const { return hy_; }
  const std::vector<double>& h_t() const { return ht_; }

  /// Node jet (no interpolation).
  SurfaceJet node_jet(int i, int j) const;
  /// Periodic bicubic (Catmull-Rom) interpolation. h_x, h_y are derivatives of the
  /// height interpolant; second derivatives and h_xt, h_yt differentiate the
  /// interpolants of the stored gradient and h_t grids.
  SurfaceJet jet(double x, double y) const;
  double height(double x, double y) const;

  double min_h() const;
  double max_h() const;

 private:
  double interp(const std::vector<double>& f, double x, double y) const;
  struct Patch {
    double v, dx, dy;
  };
  Patch patch(const std::vector<double>& f, double x, double y) const;

  int nx_ = 0, ny_ = 0;
  double x0_ = 0.0, L_ = 1.0, y0_ = 0.0, M_ = 1.0, t_ = 0.0;
  std::vector<double> h_, hx_, hy_, ht_, hxx_, hxy_, hyy_, hxt_, hyt_;
};

}  // namespace rdafront
