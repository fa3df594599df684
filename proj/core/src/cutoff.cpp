#include "tfilm/cutoff.hpp"

#include <cmath>

namespace tfilm {

double CutoffProfile::smoothstep(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  return ((((-20.0 * s + 70.0) * s - 84.0) * s + 35.0)) * s * s * s * s;
}

double CutoffProfile::smoothstep_d1(double s) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  // 140 s^3 (1-s)^3
  const double a = s * (1.0 - s);
  return 140.0 * a * a * a;
}

double CutoffProfile::smoothstep_d2(double s) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  return (((-840.0 * s + 2100.0) * s - 1680.0) * s + 420.0) * s * s;
}

double CutoffProfile::smoothstep_d3(double s) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  return ((-4200.0 * s + 8400.0) * s - 5040.0) * s * s + 840.0 * s;
}

namespace {

// Band layout in rho = |x|/r. The annulus kernel ramps up on [1, 4/3] and
// down on [5/3, 2]; the ball cutoff ramps down on [1, 2].
struct Band {
  double lo, width, sign;  // sign +1 rising, -1 falling
};

inline bool locate(CutoffKind kind, double rho, Band& band, double& base) {
  if (kind == CutoffKind::AnnulusKernel) {
    if (rho <= 1.0 || rho >= 2.0) return false;
    if (rho < 4.0 / 3.0) {
      band = {1.0, 1.0 / 3.0, +1.0};
      base = 0.0;
      return true;
    }
    if (rho <= 5.0 / 3.0) return false;  // plateau
    band = {5.0 / 3.0, 1.0 / 3.0, -1.0};
    base = 1.0;
    return true;
  }
  if (rho <= 1.0 || rho >= 2.0) return false;
  band = {1.0, 1.0, -1.0};
  base = 1.0;
  return true;
}

inline double plateau_value(CutoffKind kind, double rho) {
  if (kind == CutoffKind::AnnulusKernel)
    return (rho > 1.0 && rho < 2.0) ? 1.0 : 0.0;
  return rho <= 1.0 ? 1.0 : 0.0;
}

}  // namespace

double CutoffProfile::value(double rho) const {
  Band b;
  double base;
  if (!locate(kind_, rho, b, base)) return plateau_value(kind_, rho);
  return base + b.sign * smoothstep((rho - b.lo) / b.width);
}

double CutoffProfile::d1(double rho) const {
  Band b;
  double base;
  if (!locate(kind_, rho, b, base)) return 0.0;
  return b.sign * smoothstep_d1((rho - b.lo) / b.width) / b.width;
}

double CutoffProfile::d2(double rho) const {
  Band b;
  double base;
  if (!locate(kind_, rho, b, base)) return 0.0;
  return b.sign * smoothstep_d2((rho - b.lo) / b.width) / (b.width * b.width);
}

double CutoffProfile::d3(double rho) const {
  Band b;
  double base;
  if (!locate(kind_, rho, b, base)) return 0.0;
  return b.sign * smoothstep_d3((rho - b.lo) / b.width) /
         (b.width * b.width * b.width);
}

double CutoffProfile::value_at(Vec2 rel, double r) const {
  return value(std::sqrt(norm2(rel)) / r);
}

Vec2 CutoffProfile::gradient_at(Vec2 rel, double r) const {
  const double s = std::sqrt(norm2(rel));
  const double rho = s / r;
  const double a = d1(rho);
  if (a == 0.0 || s == 0.0) return {0.0, 0.0};
  const Vec2 e{rel.x / s, rel.y / s};
  return (a / r) * e;
}

SymMat2 CutoffProfile::hessian_at(Vec2 rel, double r) const {
  const double s = std::sqrt(norm2(rel));
  const double rho = s / r;
  const double a = d1(rho), b = d2(rho);
  if ((a == 0.0 && b == 0.0) || s == 0.0) return {};
  const Vec2 e{rel.x / s, rel.y / s};
  const double c_ee = b / (r * r);
  const double c_id = a / (r * s);
  return {c_ee * e.x * e.x + c_id * (1.0 - e.x * e.x),
          (c_ee - c_id) * e.x * e.y,
          c_ee * e.y * e.y + c_id * (1.0 - e.y * e.y)};
}

SymTen3 CutoffProfile::third_at(Vec2 rel, double r) const {
  const double s = std::sqrt(norm2(rel));
  const double rho = s / r;
  const double a = d1(rho), b = d2(rho), c = d3(rho);
  if ((a == 0.0 && b == 0.0 && c == 0.0) || s == 0.0) return {};
  const Vec2 e{rel.x / s, rel.y / s};
  const double c_eee = c / (r * r * r);
  // coefficient of (delta_ij e_k + delta_ik e_j + delta_jk e_i - 3 e_i e_j e_k)
  const double c_mix = b / (r * r * s) - a / (r * s * s);
  const double ex = e.x, ey = e.y;
  SymTen3 t;
  t.xxx = c_eee * ex * ex * ex + c_mix * (3.0 * ex - 3.0 * ex * ex * ex);
  t.xxy = c_eee * ex * ex * ey + c_mix * (ey - 3.0 * ex * ex * ey);
  t.xyy = c_eee * ex * ey * ey + c_mix * (ex - 3.0 * ex * ey * ey);
  t.yyy = c_eee * ey * ey * ey + c_mix * (3.0 * ey - 3.0 * ey * ey * ey);
  return t;
}

void CutoffProfile::require_resolvable(double r, double h) const {
  const double min_r = min_resolvable_radius(h);
  if (r < min_r)
    throw RampUnresolvedError(
        "cutoff at radius " + std::to_string(r) +
            " is unresolved on spacing " + std::to_string(h) +
            " (minimum resolvable radius " + std::to_string(min_r) + ")",
        min_r);
}

double CutoffProfile::bound_constant() const {
  // Dense scan over rho; the profile is scale-invariant so r = 1 suffices.
  double c = 0.0;
  const int n = 20000;
  for (int i = 0; i <= n; ++i) {
    const double rho = 2.2 * i / n + 1e-9;
    const Vec2 rel{rho, 0.0};
    const double v = value(rho);
    const double g = std::sqrt(norm2(gradient_at(rel, 1.0)));
    const double h2 = std::sqrt(frob2(hessian_at(rel, 1.0)));
    const double h3 = std::sqrt(frob2(third_at(rel, 1.0)));
    c = std::max(c, v + g + h2 + h3);
  }
  return c;
}

}  // namespace tfilm
