#include "tfilm/stencil.hpp"

#include <limits>

namespace tfilm {

namespace {

inline int up(int i, int n) { return i + 1 == n ? 0 : i + 1; }
inline int dn(int i, int n) { return i == 0 ? n - 1 : i - 1; }

}  // namespace

VectorField gradient(const Field& f) {
  const Grid& g = f.grid();
  const int nx = g.nx(), ny = g.ny();
  const double inv2h = 1.0 / (2.0 * g.spacing());
  const std::vector<double>& v = f.values();
  VectorField out{g, std::vector<double>(v.size(), 0.0),
                  std::vector<double>(v.size(), 0.0)};
  for (int j = 0; j < ny; ++j) {
    const std::size_t row = static_cast<std::size_t>(j) * nx;
    const std::size_t rup = static_cast<std::size_t>(up(j, ny)) * nx;
    const std::size_t rdn = static_cast<std::size_t>(dn(j, ny)) * nx;
    for (int i = 0; i < nx; ++i) {
      const std::size_t k = row + i;
      out.x[k] = (v[row + up(i, nx)] - v[row + dn(i, nx)]) * inv2h;
      if (ny > 1) out.y[k] = (v[rup + i] - v[rdn + i]) * inv2h;
    }
  }
  return out;
}

Field laplacian(const Field& f) {
  const Grid& g = f.grid();
  const int nx = g.nx(), ny = g.ny();
  const double invh2 = 1.0 / (g.spacing() * g.spacing());
  const std::vector<double>& v = f.values();
  std::vector<double> out(v.size());
  for (int j = 0; j < ny; ++j) {
    const std::size_t row = static_cast<std::size_t>(j) * nx;
    const std::size_t rup = static_cast<std::size_t>(up(j, ny)) * nx;
    const std::size_t rdn = static_cast<std::size_t>(dn(j, ny)) * nx;
    for (int i = 0; i < nx; ++i) {
      const std::size_t k = row + i;
      double s = v[row + up(i, nx)] + v[row + dn(i, nx)] - 2.0 * v[k];
      if (ny > 1) s += v[rup + i] + v[rdn + i] - 2.0 * v[k];
      out[k] = s * invh2;
    }
  }
  return Field(g, std::move(out), f.time());
}

MatrixField hessian(const Field& f) {
  const Grid& g = f.grid();
  const int nx = g.nx(), ny = g.ny();
  const double h = g.spacing();
  const double invh2 = 1.0 / (h * h);
  const double inv4h2 = 1.0 / (4.0 * h * h);
  const std::vector<double>& v = f.values();
  MatrixField out{g, std::vector<double>(v.size(), 0.0),
                  std::vector<double>(v.size(), 0.0),
                  std::vector<double>(v.size(), 0.0)};
  for (int j = 0; j < ny; ++j) {
    const std::size_t row = static_cast<std::size_t>(j) * nx;
    const std::size_t rup = static_cast<std::size_t>(up(j, ny)) * nx;
    const std::size_t rdn = static_cast<std::size_t>(dn(j, ny)) * nx;
    for (int i = 0; i < nx; ++i) {
      const std::size_t k = row + i;
      const int ip = up(i, nx), im = dn(i, nx);
      out.xx[k] = (v[row + ip] - 2.0 * v[k] + v[row + im]) * invh2;
      if (ny > 1) {
        out.yy[k] = (v[rup + i] - 2.0 * v[k] + v[rdn + i]) * invh2;
        out.xy[k] =
            (v[rup + ip] - v[rup + im] - v[rdn + ip] + v[rdn + im]) * inv4h2;
      }
    }
  }
  return out;
}

VectorField grad_laplacian(const Field& f) { return gradient(laplacian(f)); }

Tensor3Field third_derivatives(const Field& f) {
  // Centered first differences of the hessian; component (abc) differentiates
  // H_bc along the first index a of the sorted triple.
  const MatrixField H = hessian(f);
  const Grid& g = f.grid();
  const int nx = g.nx(), ny = g.ny();
  const double inv2h = 1.0 / (2.0 * g.spacing());
  Tensor3Field out{g, std::vector<double>(f.size(), 0.0),
                   std::vector<double>(f.size(), 0.0),
                   std::vector<double>(f.size(), 0.0),
                   std::vector<double>(f.size(), 0.0)};
  for (int j = 0; j < ny; ++j) {
    const std::size_t row = static_cast<std::size_t>(j) * nx;
    const std::size_t rup = static_cast<std::size_t>(up(j, ny)) * nx;
    const std::size_t rdn = static_cast<std::size_t>(dn(j, ny)) * nx;
    for (int i = 0; i < nx; ++i) {
      const std::size_t k = row + i;
      const std::size_t kp = row + up(i, nx), km = row + dn(i, nx);
      out.xxx[k] = (H.xx[kp] - H.xx[km]) * inv2h;
      if (ny > 1) {
        out.xxy[k] = (H.xy[kp] - H.xy[km]) * inv2h;
        out.xyy[k] = (H.yy[kp] - H.yy[km]) * inv2h;
        out.yyy[k] = (H.yy[rup + i] - H.yy[rdn + i]) * inv2h;
      }
    }
  }
  return out;
}

double integrate(const Field& f, const Region& R) {
  R.validate(f.grid());
  double sum = 0.0;
  const std::vector<double>& v = f.values();
  std::size_t n = detail::for_each_region_cell(
      f.grid(), R, [&](std::size_t k, Vec2) { sum += v[k]; });
  if (n == 0)
    throw EmptyRegionError("region contains no cell center (radius below grid resolution)");
  return sum * f.grid().cell_measure();
}

std::pair<double, double> sup_inf(const Field& f, const Region& R) {
  R.validate(f.grid());
  double hi = -std::numeric_limits<double>::infinity();
  double lo = std::numeric_limits<double>::infinity();
  const std::vector<double>& v = f.values();
  std::size_t n = detail::for_each_region_cell(f.grid(), R, [&](std::size_t k, Vec2) {
    hi = std::max(hi, v[k]);
    lo = std::min(lo, v[k]);
  });
  if (n == 0)
    throw EmptyRegionError("region contains no cell center (radius below grid resolution)");
  return {hi, lo};
}

}  // namespace tfilm
