#include "tfilm/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "tfilm/stencil.hpp"

namespace tfilm {

namespace {

void require_2d(const Field& u, const char* op) {
  if (u.grid().one_dimensional())
    throw ConstraintViolationError("grid", std::string(op) + " requires a 2D grid");
}

/// u^p with the degenerate-power rule: clamp at eps when p < 1.
inline double clamp_power(double u, double p, double eps) {
  if (p < 1.0) return std::pow(std::max(u, eps), p);
  return std::pow(std::max(u, 0.0), p);
}

Field powered_field(const Field& u, double p, double eps) {
  std::vector<double> v(u.size());
  const std::vector<double>& in = u.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = clamp_power(in[i], p, eps);
  return Field(u.grid(), std::move(v), u.time());
}

/// Mobility weight u^n zeroed on {u <= eps} (the positivity restriction).
inline double mobility_weight(double u, double n, double eps) {
  if (u <= eps) return 0.0;
  return std::pow(u, n);
}

}  // namespace

double resolve_eps_floor(const Field& u, double eps_floor) {
  if (eps_floor >= 0.0) return eps_floor;
  return 1e-10 * u.max_abs();
}

double energy(const Field& u, const Region& R) {
  R.validate(u.grid());
  const VectorField G = gradient(u);
  double s = 0.0;
  std::size_t n = detail::for_each_region_cell(
      u.grid(), R, [&](std::size_t k, Vec2) { s += norm2(G.at(k)); });
  if (n == 0) throw EmptyRegionError("energy: empty region");
  return 0.5 * s * u.grid().cell_measure();
}

double dissipation(const Field& u, double n, const Region& R, double eps_floor) {
  R.validate(u.grid());
  const double eps = resolve_eps_floor(u, eps_floor);
  const VectorField GL = grad_laplacian(u);
  const std::vector<double>& v = u.values();
  double s = 0.0;
  std::size_t count = detail::for_each_region_cell(
      u.grid(), R, [&](std::size_t k, Vec2) {
        s += mobility_weight(v[k], n, eps) * norm2(GL.at(k));
      });
  if (count == 0) throw EmptyRegionError("dissipation: empty region");
  return s * u.grid().cell_measure();
}

std::pair<double, double> entropy_alpha_range(double n) {
  return {std::max(-1.0, 0.5 - n), 2.0 - n};
}

double default_entropy_alpha(double n) {
  const auto [lo, hi] = entropy_alpha_range(n);
  if (!(lo < hi))
    throw AlphaOutOfRangeError("empty admissible entropy exponent range for n=" +
                               std::to_string(n));
  double a = 0.5 * (lo + hi);
  if (std::abs(a) < 0.05 * (hi - lo)) a = lo + 0.375 * (hi - lo);
  return a;
}

double entropy(const Field& u, double alpha, double eps_floor) {
  if (alpha == 0.0 || alpha <= -1.0)
    throw AlphaOutOfRangeError("entropy exponent alpha must satisfy alpha > -1, alpha != 0");
  const double eps = resolve_eps_floor(u, eps_floor);
  const double p = 1.0 + alpha;
  double s = 0.0;
  for (double v : u.values()) s += clamp_power(v, p, eps);
  return s * u.grid().cell_measure() / (alpha * (1.0 + alpha));
}

double entropy_dissipation_rhs(const Field& u, double n, double alpha,
                               double eps_floor) {
  const auto [lo, hi] = entropy_alpha_range(n);
  if (!(alpha > lo && alpha < hi) || alpha == 0.0)
    throw AlphaOutOfRangeError(
        "alpha=" + std::to_string(alpha) + " outside admissible range (" +
        std::to_string(lo) + ", " + std::to_string(hi) + ") \\ {0}");
  const double eps = resolve_eps_floor(u, eps_floor);
  const double p = n + alpha + 1.0;

  const Field w2 = powered_field(u, p / 2.0, eps);
  const MatrixField H = hessian(w2);
  const Field w4 = powered_field(u, p / 4.0, eps);
  const VectorField G = gradient(w4);

  double s = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double g2 = norm2(G.at(k));
    s += frob2(H.at(k)) + g2 * g2;
  }
  return s * u.grid().cell_measure();
}

TimeClass classify_time(const Field& u, const Region& ball) {
  const Ball* b = std::get_if<Ball>(&ball.shape());
  if (!b)
    throw ConstraintViolationError("region", "classify_time requires a ball region");
  const auto [hi, lo] = sup_inf(u, ball);
  TimeClass out;
  out.label = hi <= 2.0 * lo ? TimeLabel::Good : TimeLabel::Bad;
  out.sup = hi;
  out.inf = lo;
  out.radius = b->radius;
  out.center = b->center;
  return out;
}

namespace {

// Traverse the kernel support annulus r < |x - center| < 2r, padded by one
// cell so that boundary-straddling cells (whose subsampled average is
// nonzero) are included, in center-relative order. Kernel radii may reach
// L/4 (support up to L/2), which is wider than the user-facing Region cap,
// so this has its own loop.
template <typename F>
std::size_t for_each_kernel_cell(const Grid& g, Vec2 center, double r, F&& fn) {
  if (!(2.0 * r <= 0.5 * g.length() * (1.0 + 1e-12)))
    throw ConstraintViolationError(
        "radius", "annulus kernel support 2r must not exceed L/2");
  const double h = g.spacing();
  const double pad = h;
  const double r_in = std::max(r - pad, 0.0);
  const double r2_in = r_in * r_in;
  const double r_out = 2.0 * r + pad;
  const double r2_out = r_out * r_out;
  const int bx = static_cast<int>(std::floor(center.x / h));
  const int by = static_cast<int>(std::floor(center.y / h));
  const int reach = static_cast<int>(std::ceil(r_out / h)) + 1;
  const int nx = g.nx(), ny = g.ny();
  std::size_t count = 0;
  auto offsets = [](int n, int want, auto&& body) {
    int lo = std::min(want, n / 2), hi = std::min(want, (n - 1) / 2);
    for (int o = -lo; o <= hi; ++o) body(o);
  };
  offsets(ny, reach, [&](int oy) {
    const int j = g.wrap_y(by + oy);
    const double dy = g.wrap_delta(g.y_center(j) - center.y);
    offsets(nx, reach, [&](int ox) {
      const int i = g.wrap_x(bx + ox);
      const double dx = g.wrap_delta(g.x_center(i) - center.x);
      const double d2 = dx * dx + dy * dy;
      if (d2 <= r2_in || d2 >= r2_out) return;
      fn(g.index(i, j), Vec2{dx, dy});
      ++count;
    });
  });
  return count;
}

// Cell-averaged kernel evaluation on a sub x sub midpoint subgrid. The kernel
// ramps are piecewise polynomials with C^3 junctions; averaging them over the
// cell removes the junction-aliasing oscillation from the quadrature error,
// leaving the smooth O(h^2) term that comes from sampling grad(u) at centers.
constexpr int kKernelSubsample = 4;

double cell_avg_value(const CutoffProfile& kernel, Vec2 rel, double r, double h) {
  double s = 0.0;
  for (int a = 0; a < kKernelSubsample; ++a)
    for (int b = 0; b < kKernelSubsample; ++b) {
      const Vec2 p{rel.x + ((a + 0.5) / kKernelSubsample - 0.5) * h,
                   rel.y + ((b + 0.5) / kKernelSubsample - 0.5) * h};
      s += kernel.value_at(p, r);
    }
  return s / (kKernelSubsample * kKernelSubsample);
}

Vec2 cell_avg_gradient(const CutoffProfile& kernel, Vec2 rel, double r, double h) {
  Vec2 s{};
  for (int a = 0; a < kKernelSubsample; ++a)
    for (int b = 0; b < kKernelSubsample; ++b) {
      const Vec2 p{rel.x + ((a + 0.5) / kKernelSubsample - 0.5) * h,
                   rel.y + ((b + 0.5) / kKernelSubsample - 0.5) * h};
      s = s + kernel.gradient_at(p, r);
    }
  return (1.0 / (kKernelSubsample * kKernelSubsample)) * s;
}

SymMat2 cell_avg_hessian(const CutoffProfile& kernel, Vec2 rel, double r, double h) {
  SymMat2 s{};
  for (int a = 0; a < kKernelSubsample; ++a)
    for (int b = 0; b < kKernelSubsample; ++b) {
      const Vec2 p{rel.x + ((a + 0.5) / kKernelSubsample - 0.5) * h,
                   rel.y + ((b + 0.5) / kKernelSubsample - 0.5) * h};
      s = s + kernel.hessian_at(p, r);
    }
  return (1.0 / (kKernelSubsample * kKernelSubsample)) * s;
}

SymTen3 cell_avg_third(const CutoffProfile& kernel, Vec2 rel, double r, double h) {
  SymTen3 s{};
  for (int a = 0; a < kKernelSubsample; ++a)
    for (int b = 0; b < kKernelSubsample; ++b) {
      const Vec2 p{rel.x + ((a + 0.5) / kKernelSubsample - 0.5) * h,
                   rel.y + ((b + 0.5) / kKernelSubsample - 0.5) * h};
      const SymTen3 t = kernel.third_at(p, r);
      s.xxx += t.xxx;
      s.xxy += t.xxy;
      s.xyy += t.xyy;
      s.yyy += t.yyy;
    }
  const double inv = 1.0 / (kKernelSubsample * kKernelSubsample);
  return {s.xxx * inv, s.xxy * inv, s.xyy * inv, s.yyy * inv};
}

struct KernelSums {
  double weight = 0.0;                    // sum of kernel values
  double a[4] = {0, 0, 0, 0};             // sum of grad(kernel) (x) grad(u)
  Vec2 grad_kernel_sum;                   // sum of grad(kernel)
  Vec2 grad_u_sum;                        // sum of grad(u) over the support
  Vec2 weighted_grad;                     // sum of kernel * grad(u)
  std::size_t count = 0;
};

KernelSums annulus_kernel_sums(const Field& u, const VectorField& G, double r,
                               Vec2 center) {
  const Grid& g = u.grid();
  const double h = g.spacing();
  const CutoffProfile kernel(CutoffKind::AnnulusKernel);
  kernel.require_resolvable(r, h);

  KernelSums s;
  s.count = for_each_kernel_cell(g, center, r, [&](std::size_t k, Vec2 rel) {
    const double w = cell_avg_value(kernel, rel, r, h);
    const Vec2 kg = cell_avg_gradient(kernel, rel, r, h);
    const Vec2 gu = G.at(k);
    s.weight += w;
    s.a[0] += kg.x * gu.x;
    s.a[1] += kg.x * gu.y;
    s.a[2] += kg.y * gu.x;
    s.a[3] += kg.y * gu.y;
    s.grad_kernel_sum = s.grad_kernel_sum + kg;
    s.grad_u_sum = s.grad_u_sum + gu;
    s.weighted_grad = s.weighted_grad + w * gu;
  });
  if (s.count == 0 || !(s.weight > 0.0))
    throw EmptyRegionError("smoothed_averages: kernel annulus contains no cells");
  return s;
}

}  // namespace

AnnulusAverages smoothed_averages(const Field& u, double r, Vec2 center) {
  require_2d(u, "smoothed_averages");
  const VectorField G = gradient(u);
  const KernelSums s = annulus_kernel_sums(u, G, r, center);

  // Raw average -sum grad(kernel) (x) grad(u) / sum kernel, with the kernel
  // gradient recentered to discrete mean zero so that affine data yields an
  // exactly vanishing matrix (the continuum integral of grad(kernel) is zero
  // by compact support; the recentering removes its quadrature defect).
  const double inv_n = 1.0 / static_cast<double>(s.count);
  double raw[4];
  raw[0] = -(s.a[0] - s.grad_kernel_sum.x * s.grad_u_sum.x * inv_n) / s.weight;
  raw[1] = -(s.a[1] - s.grad_kernel_sum.x * s.grad_u_sum.y * inv_n) / s.weight;
  raw[2] = -(s.a[2] - s.grad_kernel_sum.y * s.grad_u_sum.x * inv_n) / s.weight;
  raw[3] = -(s.a[3] - s.grad_kernel_sum.y * s.grad_u_sum.y * inv_n) / s.weight;

  AnnulusAverages out;
  out.second_deriv = {raw[0], 0.5 * (raw[1] + raw[2]), raw[3]};
  out.asymmetry_defect = std::abs(raw[1] - raw[2]);
  out.first_deriv = (1.0 / s.weight) * s.weighted_grad;
  out.radius = r;
  out.time = u.time();
  return out;
}

std::pair<SymMat2, Vec2> averages_rate(const Field& u, double n, double r,
                                       Vec2 center, double eps_floor) {
  require_2d(u, "averages_rate");
  const double eps = resolve_eps_floor(u, eps_floor);
  const Grid& g = u.grid();
  const CutoffProfile kernel(CutoffKind::AnnulusKernel);
  kernel.require_resolvable(r, g.spacing());

  const VectorField GL = grad_laplacian(u);
  const std::vector<double>& uv = u.values();

  double weight = 0.0;
  SymMat2 b_rate;
  Vec2 c_rate;
  const double h = g.spacing();
  for_each_kernel_cell(g, center, r, [&](std::size_t k, Vec2 rel) {
    weight += cell_avg_value(kernel, rel, r, h);
    const double mw = mobility_weight(uv[k], n, eps);
    if (mw == 0.0) return;
    const Vec2 flux = mw * GL.at(k);
    b_rate = b_rate + contract(cell_avg_third(kernel, rel, r, h), flux);
    c_rate = c_rate - apply(cell_avg_hessian(kernel, rel, r, h), flux);
  });
  if (!(weight > 0.0))
    throw EmptyRegionError("averages_rate: kernel annulus contains no cells");
  return {(1.0 / weight) * b_rate, (1.0 / weight) * c_rate};
}

TiltExcessReport tilt_excess(const Field& u, double r,
                             const AnnulusAverages& ref, Vec2 center) {
  require_2d(u, "tilt_excess");
  const Region ball = Region::ball(center, r);
  ball.validate(u.grid());
  const VectorField G = gradient(u);
  double s = 0.0;
  std::size_t count = detail::for_each_region_cell(
      u.grid(), ball, [&](std::size_t k, Vec2 rel) {
        const Vec2 d = G.at(k) - apply(ref.second_deriv, rel) - ref.first_deriv;
        s += norm2(d);
      });
  if (count == 0) throw EmptyRegionError("tilt_excess: empty ball");
  TiltExcessReport out;
  out.value = 0.5 * s * u.grid().cell_measure();
  out.ref_second = ref.second_deriv;
  out.ref_first = ref.first_deriv;
  out.ball_radius = r;
  out.reference_radius = ref.radius;
  out.time = u.time();
  return out;
}

InequalityCheck bernis_gruen_sides(const Field& u, double n,
                                   const CutoffProfile& cut, Vec2 center,
                                   double r, double eps_floor) {
  require_2d(u, "bernis_gruen_sides");
  if (!(n > regime_lower_bound() && n < 3.0))
    throw RegimeViolationError("bernis_gruen_sides requires n in (2-sqrt(4/5), 3)");
  const Grid& g = u.grid();
  cut.require_resolvable(r, g.spacing());
  const Region supp = Region::ball(center, cut.support_outer() * r);
  supp.validate(g);

  const double eps = resolve_eps_floor(u, eps_floor);
  const std::vector<double>& uv = u.values();

  const Field w6 = powered_field(u, (n + 2.0) / 6.0, eps);
  const VectorField G6 = gradient(w6);
  const MatrixField H = hessian(u);
  const Field w32 = powered_field(u, (n + 2.0) / 2.0, eps);
  const Tensor3Field T32 = third_derivatives(w32);
  const VectorField GL = grad_laplacian(u);

  const double mid_coeff = 36.0 / ((n + 2.0) * (n + 2.0));
  const double mid_exp = 2.0 * (n - 1.0) / 3.0;

  double lhs = 0.0, rhs_diss = 0.0, rhs_cut = 0.0;
  detail::for_each_region_cell(g, supp, [&](std::size_t k, Vec2 rel) {
    const double eta = cut.value_at(rel, r);
    const double eta2 = eta * eta;
    const double eta3 = eta2 * eta;
    const double eta6 = eta3 * eta3;
    const double g6sq = norm2(G6.at(k));

    if (eta6 > 0.0) {
      const double grad_pow6 = g6sq * g6sq * g6sq;
      const double mid =
          mid_coeff * clamp_power(uv[k], mid_exp, eps) * frob2(H.at(k)) * g6sq;
      const double third = frob2(T32.at(k));
      lhs += (grad_pow6 + mid + third) * eta6;
      rhs_diss += mobility_weight(uv[k], n, eps) * norm2(GL.at(k)) * eta6;
    }

    const Vec2 geta = cut.gradient_at(rel, r);
    const double geta2 = norm2(geta);
    const double geta6 = geta2 * geta2 * geta2;
    const SymMat2 heta = cut.hessian_at(rel, r);
    const double heta_norm = std::sqrt(frob2(heta));
    const double teta2 = frob2(cut.third_at(rel, r));
    const double cut_weight =
        geta6 + eta3 * heta_norm * heta_norm * heta_norm + eta2 * eta2 * teta2;
    if (cut_weight > 0.0)
      rhs_cut += std::pow(std::max(uv[k], 0.0), n + 2.0) * cut_weight;
  });

  const double meas = g.cell_measure();
  InequalityCheck out;
  out.name = "bernis_gruen";
  out.lhs = lhs * meas;
  out.rhs_components = {{"dissipation_term", rhs_diss * meas},
                        {"cutoff_term", rhs_cut * meas}};
  return out;
}

InequalityCheck morrey_sup_check(const Field& u, double n, double r,
                                 double delta, Vec2 center, double eps_floor) {
  require_2d(u, "morrey_sup_check");
  if (!(delta > 0.0 && delta <= 1.0))
    throw ConstraintViolationError("delta", "must lie in (0, 1]");
  const Region big = Region::ball(center, 2.0 * r);
  big.validate(u.grid());
  const auto [hi, lo] = sup_inf(u, big);
  // hi == 0 is the degenerate trivial case (0 <= 0); any other good ball
  // violates the hypothesis of the bound.
  if (hi != 0.0 && !(lo < 0.5 * hi))
    throw NotBadTimeError("morrey_sup_check requires a bad time on B_2r");

  const double eps = resolve_eps_floor(u, eps_floor);
  const Field w6 = powered_field(u, (n + 2.0) / 6.0, eps);
  const VectorField G6 = gradient(w6);
  auto pow6_integral = [&](const Region& R) {
    double s = 0.0;
    detail::for_each_region_cell(u.grid(), R, [&](std::size_t k, Vec2) {
      const double g2 = norm2(G6.at(k));
      s += g2 * g2 * g2;
    });
    return s * u.grid().cell_measure();
  };

  const double r4 = r * r * r * r;  // r^{6-d} with d = 2
  InequalityCheck out;
  out.name = "morrey_sup";
  out.lhs = std::pow(std::max(hi, 0.0), n + 2.0);
  out.rhs_components = {
      {"annulus_term",
       r4 * pow6_integral(Region::annulus(center, delta * r, 2.0 * r))},
      {"inner_term", r4 * delta * pow6_integral(Region::ball(center, delta * r))}};
  return out;
}

std::vector<InequalityCheck> poincare_checks(const Field& u, double r,
                                             Vec2 center) {
  require_2d(u, "poincare_checks");
  const Region ann = Region::annulus(center, r, 2.0 * r);
  const Region ball2 = Region::ball(center, 2.0 * r);
  ann.validate(u.grid());
  ball2.validate(u.grid());

  const AnnulusAverages avg = smoothed_averages(u, r, center);
  const VectorField G = gradient(u);
  const MatrixField H = hessian(u);
  const Tensor3Field T = third_derivatives(u);
  const double meas = u.grid().cell_measure();

  struct Sums {
    double grad_dev = 0.0, hess_dev = 0.0, third = 0.0, third_l1 = 0.0;
  };
  auto region_sums = [&](const Region& R) {
    Sums s;
    std::size_t cnt = detail::for_each_region_cell(u.grid(), R, [&](std::size_t k, Vec2 rel) {
      const Vec2 gd = G.at(k) - apply(avg.second_deriv, rel) - avg.first_deriv;
      s.grad_dev += norm2(gd);
      s.hess_dev += frob2(H.at(k) - avg.second_deriv);
      const double t2 = frob2(T.at(k));
      s.third += t2;
      s.third_l1 += std::sqrt(t2);
    });
    if (cnt == 0) throw EmptyRegionError("poincare_checks: empty region");
    s.grad_dev *= meas;
    s.hess_dev *= meas;
    s.third *= meas;
    s.third_l1 *= meas;
    return s;
  };

  const Sums sa = region_sums(ann);
  const Sums sb = region_sums(ball2);
  const double r2 = r * r;

  std::vector<InequalityCheck> out;
  out.push_back({"poincare_gradient_annulus",
                 sa.grad_dev,
                 {{"r2_hessian_deviation", r2 * sa.hess_dev}}});
  out.push_back({"poincare_hessian_annulus",
                 sa.hess_dev,
                 {{"r2_third_derivative", r2 * sa.third}}});
  out.push_back({"poincare_gradient_ball",
                 sb.grad_dev,
                 {{"r2_hessian_deviation", r2 * sb.hess_dev}}});
  out.push_back({"poincare_hessian_ball",
                 sb.hess_dev,
                 {{"r2_third_derivative", r2 * sb.third}}});
  out.push_back({"poincare_sobolev_ball",
                 sb.hess_dev,
                 {{"squared_third_l1", sb.third_l1 * sb.third_l1}}});
  return out;
}

InequalityCheck third_derivative_check(const Field& u, double r, Vec2 center) {
  require_2d(u, "third_derivative_check");
  const Region inner = Region::ball(center, r);
  const Region outer = Region::ball(center, 2.0 * r);
  const Region ann = Region::annulus(center, r, 2.0 * r);
  outer.validate(u.grid());

  const Tensor3Field T = third_derivatives(u);
  const VectorField GL = grad_laplacian(u);
  const double meas = u.grid().cell_measure();

  double lhs = 0.0, diss = 0.0, ann_third = 0.0;
  std::size_t c1 = detail::for_each_region_cell(
      u.grid(), inner, [&](std::size_t k, Vec2) { lhs += frob2(T.at(k)); });
  detail::for_each_region_cell(
      u.grid(), outer, [&](std::size_t k, Vec2) { diss += norm2(GL.at(k)); });
  detail::for_each_region_cell(
      u.grid(), ann, [&](std::size_t k, Vec2) { ann_third += frob2(T.at(k)); });
  if (c1 == 0) throw EmptyRegionError("third_derivative_check: empty ball");

  InequalityCheck out;
  out.name = "third_derivative";
  out.lhs = lhs * meas;
  out.rhs_components = {{"dissipation_ball", diss * meas},
                        {"annulus_third", ann_third * meas}};
  return out;
}

InequalityCheck second_derivative_check(const Field& u, double n,
                                        const CutoffProfile& cut, Vec2 center,
                                        double r, double eps_floor) {
  require_2d(u, "second_derivative_check");
  const Grid& g = u.grid();
  cut.require_resolvable(r, g.spacing());
  const Region supp = Region::ball(center, cut.support_outer() * r);
  supp.validate(g);

  const double eps = resolve_eps_floor(u, eps_floor);
  const std::vector<double>& uv = u.values();
  const VectorField G = gradient(u);
  const MatrixField H = hessian(u);
  const VectorField GL = grad_laplacian(u);

  double lhs = 0.0, diss = 0.0, grad_term = 0.0, quartic = 0.0;
  detail::for_each_region_cell(g, supp, [&](std::size_t k, Vec2 rel) {
    const double eta = cut.value_at(rel, r);
    const double eta2 = eta * eta;
    const double un = clamp_power(uv[k], n, eps);
    const double g2 = norm2(G.at(k));
    const Vec2 geta = cut.gradient_at(rel, r);
    lhs += un * frob2(H.at(k)) * eta2;
    diss += mobility_weight(uv[k], n, eps) * norm2(GL.at(k));
    grad_term += un * g2 * (eta2 * eta2 + norm2(geta));
    quartic += clamp_power(uv[k], n - 2.0, eps) * g2 * g2 * eta2;
  });

  const double meas = g.cell_measure();
  InequalityCheck out;
  out.name = "second_derivative";
  out.lhs = lhs * meas;
  out.rhs_components = {{"dissipation_support", diss * meas},
                        {"gradient_term", grad_term * meas},
                        {"quartic_gradient_term", quartic * meas}};
  return out;
}

namespace {

struct BulkIntegrals {
  double good = 0.0;  // u^n (|grad lap u|^2 + |D^3 u|^2)
  double bad = 0.0;   // u^n |grad lap u|^2 + |grad u^{(n+2)/6}|^6
};

BulkIntegrals bulk_integrals(const Field& u, double n, double eps,
                             const Region& R, const VectorField& GL,
                             const Tensor3Field& T, const VectorField& G6) {
  BulkIntegrals b;
  const std::vector<double>& uv = u.values();
  detail::for_each_region_cell(u.grid(), R, [&](std::size_t k, Vec2) {
    const double mw = mobility_weight(uv[k], n, eps);
    const double gl2 = norm2(GL.at(k));
    const double g6sq = norm2(G6.at(k));
    b.good += mw * (gl2 + frob2(T.at(k)));
    b.bad += mw * gl2 + g6sq * g6sq * g6sq;
  });
  const double meas = u.grid().cell_measure();
  b.good *= meas;
  b.bad *= meas;
  return b;
}

}  // namespace

HoleFillingReport hole_filling_sides(const Trajectory& traj, double t1,
                                     double t2, double r, double delta,
                                     Vec2 center) {
  if (traj.fields.empty()) throw Error("hole_filling_sides: empty trajectory");
  require_2d(traj.fields.front(), "hole_filling_sides");
  if (!(t1 < t2))
    throw ConstraintViolationError("t1", "needs t1 < t2");
  if (!(delta > 0.0 && delta <= 0.5))
    throw ConstraintViolationError("delta", "must lie in (0, 1/2]");

  const double tol = 1e-9 * std::max(1.0, traj.records.back().t);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < traj.records.size(); ++i) {
    const double t = traj.records[i].t;
    if (t >= t1 - tol && t <= t2 + tol) idx.push_back(i);
  }
  if (idx.size() < 3)
    throw InsufficientSnapshotsError(
        "hole_filling_sides needs at least 3 snapshots in [t1, t2]");

  const double n = traj.config.mobility.exponent;
  const double eps = traj.config.mobility.eps_floor;

  HoleFillingReport rep;
  rep.t_start = traj.records[idx.front()].t;
  rep.t_end = traj.records[idx.back()].t;
  rep.r = r;
  rep.delta = delta;

  {
    const Field& u_end = traj.fields[idx.back()];
    const AnnulusAverages ref = smoothed_averages(u_end, r, center);
    rep.excess_end_small = tilt_excess(u_end, delta * r, ref, center).value;
  }
  {
    const Field& u_start = traj.fields[idx.front()];
    const AnnulusAverages ref = smoothed_averages(u_start, r, center);
    rep.excess_start_big = tilt_excess(u_start, 2.0 * r, ref, center).value;
  }

  const Region small = Region::ball(center, delta * r);
  const Region big = Region::ball(center, 2.0 * r);
  for (std::size_t i : idx) {
    const Field& u = traj.fields[i];
    const VectorField GL = grad_laplacian(u);
    const Tensor3Field T = third_derivatives(u);
    const Field w6 = powered_field(u, (n + 2.0) / 6.0, eps);
    const VectorField G6 = gradient(w6);

    HoleFillingRow row;
    row.t = traj.records[i].t;
    row.class_small = classify_time(u, small).label;
    row.class_big = classify_time(u, big).label;
    const BulkIntegrals bs = bulk_integrals(u, n, eps, small, GL, T, G6);
    const BulkIntegrals bb = bulk_integrals(u, n, eps, big, GL, T, G6);
    row.good_small = row.class_small == TimeLabel::Good ? bs.good : 0.0;
    row.bad_small = row.class_small == TimeLabel::Bad ? bs.bad : 0.0;
    row.good_big = row.class_big == TimeLabel::Good ? bb.good : 0.0;
    row.bad_big = row.class_big == TimeLabel::Bad ? bb.bad : 0.0;
    rep.rows.push_back(row);
  }

  auto trapezoid = [&](auto member) {
    double s = 0.0;
    for (std::size_t i = 1; i < rep.rows.size(); ++i) {
      const double dt = rep.rows[i].t - rep.rows[i - 1].t;
      s += 0.5 * dt * (rep.rows[i].*member + rep.rows[i - 1].*member);
    }
    return s;
  };
  rep.good_small_integral = trapezoid(&HoleFillingRow::good_small);
  rep.bad_small_integral = trapezoid(&HoleFillingRow::bad_small);
  rep.good_big_integral = trapezoid(&HoleFillingRow::good_big);
  rep.bad_big_integral = trapezoid(&HoleFillingRow::bad_big);
  return rep;
}

}  // namespace tfilm
