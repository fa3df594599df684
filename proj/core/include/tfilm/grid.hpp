#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <utility>
#include <variant>
#include <vector>

#include "tfilm/errors.hpp"

namespace tfilm {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm2(Vec2 a) { return dot(a, a); }

/// Symmetric 2x2 matrix in symmetric-unique storage.
struct SymMat2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;
};

inline SymMat2 operator+(SymMat2 a, SymMat2 b) {
  return {a.xx + b.xx, a.xy + b.xy, a.yy + b.yy};
}
inline SymMat2 operator-(SymMat2 a, SymMat2 b) {
  return {a.xx - b.xx, a.xy - b.xy, a.yy - b.yy};
}
inline SymMat2 operator*(double s, SymMat2 a) {
  return {s * a.xx, s * a.xy, s * a.yy};
}
inline Vec2 apply(SymMat2 m, Vec2 v) {
  return {m.xx * v.x + m.xy * v.y, m.xy * v.x + m.yy * v.y};
}
inline double trace(SymMat2 m) { return m.xx + m.yy; }

/// Frobenius norm squared, off-diagonal counted twice.
inline double frob2(SymMat2 m) {
  return m.xx * m.xx + 2.0 * m.xy * m.xy + m.yy * m.yy;
}

/// Symmetric 2x2x2 tensor in symmetric-unique storage.
struct SymTen3 {
  double xxx = 0.0;
  double xxy = 0.0;
  double xyy = 0.0;
  double yyy = 0.0;
};

/// Frobenius norm squared with index multiplicities (1,3,3,1).
inline double frob2(SymTen3 t) {
  return t.xxx * t.xxx + 3.0 * t.xxy * t.xxy + 3.0 * t.xyy * t.xyy +
         t.yyy * t.yyy;
}

/// Contraction (T . v)_{ij} = T_{ijk} v_k.
inline SymMat2 contract(SymTen3 t, Vec2 v) {
  return {t.xxx * v.x + t.xxy * v.y,   // (xx*)
          t.xxy * v.x + t.xyy * v.y,   // (xy*)
          t.xyy * v.x + t.yyy * v.y};  // (yy*)
}

/// Periodic uniform grid of square cells. ny == 1 flags 1D mode.
class Grid {
 public:
  Grid(int nx, int ny, double length) : nx_(nx), ny_(ny), length_(length) {
    if (nx < 8)
      throw ConstraintViolationError("nx", "grid needs nx >= 8");
    if (ny != 1 && ny != nx)
      throw ConstraintViolationError("ny", "2D grids must be square (nx == ny); ny == 1 flags 1D mode");
    if (!(length > 0.0))
      throw ConstraintViolationError("domain_size", "length must be positive");
    h_ = length_ / nx_;
  }

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double length() const { return length_; }
  double spacing() const { return h_; }
  bool one_dimensional() const { return ny_ == 1; }
  int dim() const { return ny_ == 1 ? 1 : 2; }
  std::size_t cell_count() const {
    return static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_);
  }
  /// Cell volume element (h in 1D, h^2 in 2D).
  double cell_measure() const { return one_dimensional() ? h_ : h_ * h_; }

  int wrap_x(int i) const {
    i %= nx_;
    return i < 0 ? i + nx_ : i;
  }
  int wrap_y(int j) const {
    j %= ny_;
    return j < 0 ? j + ny_ : j;
  }
  std::size_t index(int ix, int iy) const {
    return static_cast<std::size_t>(wrap_y(iy)) * nx_ + wrap_x(ix);
  }

  double x_center(int ix) const { return (ix + 0.5) * h_; }
  double y_center(int iy) const { return one_dimensional() ? 0.0 : (iy + 0.5) * h_; }

  /// Wrap a coordinate difference into [-L/2, L/2].
  double wrap_delta(double d) const {
    double w = std::remainder(d, length_);
    return w;
  }

  bool same_layout(const Grid& o) const {
    return nx_ == o.nx_ && ny_ == o.ny_ && length_ == o.length_;
  }

 private:
  int nx_;
  int ny_;
  double length_;
  double h_;
};

/// Scalar grid function (cell-centered values, row-major). Immutable after
/// construction; the solver builds new Fields per snapshot.
class Field {
 public:
  Field(Grid grid, std::vector<double> values, double time = 0.0)
      : grid_(grid), values_(std::move(values)), time_(time) {
    if (values_.size() != grid_.cell_count())
      throw ConstraintViolationError("values", "value array length must equal nx*ny");
  }

  static Field constant(const Grid& grid, double c, double time = 0.0) {
    return Field(grid, std::vector<double>(grid.cell_count(), c), time);
  }

  /// Sample f(x, y) at cell centers.
  static Field from_function(const Grid& grid,
                             const std::function<double(double, double)>& f,
                             double time = 0.0) {
    std::vector<double> v(grid.cell_count());
    for (int j = 0; j < grid.ny(); ++j)
      for (int i = 0; i < grid.nx(); ++i)
        v[grid.index(i, j)] = f(grid.x_center(i), grid.y_center(j));
    return Field(grid, std::move(v), time);
  }

  const Grid& grid() const { return grid_; }
  double time() const { return time_; }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double at(int ix, int iy) const { return values_[grid_.index(ix, iy)]; }
  std::size_t size() const { return values_.size(); }

  double max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  bool all_finite() const {
    for (double v : values_)
      if (!std::isfinite(v)) return false;
    return true;
  }

 private:
  Grid grid_;
  std::vector<double> values_;
  double time_;
};

struct VectorField {
  Grid grid;
  std::vector<double> x, y;
  Vec2 at(std::size_t i) const { return {x[i], y[i]}; }
};

struct MatrixField {
  Grid grid;
  std::vector<double> xx, xy, yy;
  SymMat2 at(std::size_t i) const { return {xx[i], xy[i], yy[i]}; }
};

struct Tensor3Field {
  Grid grid;
  std::vector<double> xxx, xxy, xyy, yyy;
  SymTen3 at(std::size_t i) const { return {xxx[i], xxy[i], xyy[i], yyy[i]}; }
};

// ---- regions ----------------------------------------------------------------

struct Ball {
  Vec2 center;
  double radius = 0.0;
};

struct Annulus {
  Vec2 center;
  double r_in = 0.0;
  double r_out = 0.0;
};

struct Whole {};

/// Membership is by cell center under the periodic metric; inner boundary
/// strict, outer boundary inclusive. Outer radii are capped at L/4 so a region
/// never self-overlaps through periodicity.
class Region {
 public:
  static Region ball(Vec2 center, double radius) {
    return Region(Ball{center, radius});
  }
  static Region annulus(Vec2 center, double r_in, double r_out) {
    return Region(Annulus{center, r_in, r_out});
  }
  static Region whole() { return Region(Whole{}); }

  const std::variant<Ball, Annulus, Whole>& shape() const { return shape_; }

  bool is_whole() const { return std::holds_alternative<Whole>(shape_); }

  void validate(const Grid& g) const {
    const double cap = g.length() / 4.0;
    if (const Ball* b = std::get_if<Ball>(&shape_)) {
      if (!(b->radius > 0.0))
        throw ConstraintViolationError("radius", "ball radius must be positive");
      if (b->radius > cap)
        throw ConstraintViolationError("radius", "2*radius must not exceed L/2");
    } else if (const Annulus* a = std::get_if<Annulus>(&shape_)) {
      if (!(a->r_in > 0.0) || !(a->r_in < a->r_out))
        throw ConstraintViolationError("radius", "annulus needs 0 < r_in < r_out");
      if (a->r_out > cap)
        throw ConstraintViolationError("radius", "2*r_out must not exceed L/2");
    }
  }

 private:
  explicit Region(std::variant<Ball, Annulus, Whole> s) : shape_(s) {}
  std::variant<Ball, Annulus, Whole> shape_;
};

namespace detail {

/// Visit every cell of `region` exactly once, in a traversal order that is
/// relative to the region center (so translated copies sum in the same
/// order). The callback receives (flat index, displacement from center).
template <typename F>
std::size_t for_each_region_cell(const Grid& g, const Region& region, F&& fn) {
  std::size_t count = 0;
  if (region.is_whole()) {
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) {
        fn(g.index(i, j), Vec2{g.x_center(i), g.y_center(j)});
        ++count;
      }
    return count;
  }

  Vec2 c{};
  double r_in = -1.0, r_out = 0.0;
  if (const Ball* b = std::get_if<Ball>(&region.shape())) {
    c = b->center;
    r_out = b->radius;
  } else {
    const Annulus& a = std::get<Annulus>(region.shape());
    c = a.center;
    r_in = a.r_in;
    r_out = a.r_out;
  }

  const double h = g.spacing();
  const double r2_out = r_out * r_out;
  const double r2_in = r_in > 0.0 ? r_in * r_in : -1.0;
  const int bx = static_cast<int>(std::floor(c.x / h));
  const int by = g.one_dimensional() ? 0 : static_cast<int>(std::floor(c.y / h));
  int reach = static_cast<int>(std::ceil(r_out / h)) + 1;

  auto offsets = [](int n, int reach_wanted, auto&& body) {
    // Enumerate cell offsets -lo..hi around the base cell without visiting a
    // wrapped cell twice.
    int lo = std::min(reach_wanted, n / 2);
    int hi = std::min(reach_wanted, (n - 1) / 2);
    for (int o = -lo; o <= hi; ++o) body(o);
  };

  if (g.one_dimensional()) {
    offsets(g.nx(), reach, [&](int ox) {
      const int i = g.wrap_x(bx + ox);
      const double dx = g.wrap_delta(g.x_center(i) - c.x);
      const double d2 = dx * dx;
      if (d2 <= r2_out && d2 > r2_in) {
        fn(g.index(i, 0), Vec2{dx, 0.0});
        ++count;
      }
    });
    return count;
  }

  offsets(g.ny(), reach, [&](int oy) {
    const int j = g.wrap_y(by + oy);
    const double dy = g.wrap_delta(g.y_center(j) - c.y);
    offsets(g.nx(), reach, [&](int ox) {
      const int i = g.wrap_x(bx + ox);
      const double dx = g.wrap_delta(g.x_center(i) - c.x);
      const double d2 = dx * dx + dy * dy;
      if (d2 <= r2_out && d2 > r2_in) {
        fn(g.index(i, j), Vec2{dx, dy});
        ++count;
      }
    });
  });
  return count;
}

}  // namespace detail

}  // namespace tfilm
