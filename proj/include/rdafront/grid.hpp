#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace rdafront {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// Structured box grid: x and y are periodic and sampled without the
/// duplicated seam node, z is node-centred with both faces present.
class Grid3D {
 public:
  Grid3D() = default;
  Grid3D(int nx, int ny, int nz, double x0, double L, double y0, double M, double a);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int nz() const { return nz_; }
  double x0() const { return x0_; }
  double y0() const { return y0_; }
  double L() const { return L_; }
  double M() const { return M_; }
  double a() const { return a_; }

  double hx() const { return L_ / nx_; }
  double hy() const { return M_ / ny_; }
  double hz() const { return a_ / (nz_ - 1); }

  double x(int i) const { return x0_ + i * hx(); }
  double y(int j) const { return y0_ + j * hy(); }
  double z(int k) const { return k == nz_ - 1 ? a_ : k * hz(); }

  /// Storage order: x fastest, then y, then z.
  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(nx_) * (static_cast<std::size_t>(j) + static_cast<std::size_t>(ny_) * k);
  }
  std::size_t size() const { return static_cast<std::size_t>(nx_) * ny_ * nz_; }

  bool operator==(const Grid3D&) const = default;

 private:
  int nx_ = 0, ny_ = 0, nz_ = 0;
  double x0_ = 0.0, L_ = 1.0, y0_ = 0.0, M_ = 1.0, a_ = 1.0;
};

class ScalarField3D {
 public:
  ScalarField3D() = default;
  /// Throws InvalidArgument on a size mismatch or non-finite value.
  ScalarField3D(const Grid3D& grid, std::vector<double> values);

  static ScalarField3D generate(const Grid3D& grid, const std::function<double(const Point3&)>& fn);
  static ScalarField3D constant(const Grid3D& grid, double c);

  const Grid3D& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t n) const { return values_[n]; }
  double at(int i, int j, int k) const { return values_[grid_.index(i, j, k)]; }

 private:
  Grid3D grid_;
  std::vector<double> values_;
};

/// Maps x into [origin, origin + period).
double wrap_periodic(double x, double origin, double period);

/// Shortest signed representative of d modulo period, in [-period/2, period/2).
double wrap_difference(double d, double period);

/// Trilinear blend of the eight surrounding nodes; x and y wrap periodically.
/// z may exceed [0, a] by at most z_eps before OutOfDomain is raised.
double trilinear_sample(const ScalarField3D& field, const Point3& p, double z_eps = 1e-9);

/// sqrt(sum w (A-B)^2) / sqrt(sum w B^2) with trapezoidal z weights.
double relative_l2_error(const ScalarField3D& a, const ScalarField3D& b);

}  // namespace rdafront
