#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tfilm/cutoff.hpp"
#include "tfilm/grid.hpp"
#include "tfilm/solver.hpp"

namespace tfilm {

/// Smoothed annulus averages of second and first derivatives: the affine
/// reference (second_deriv . x + first_deriv) used by the tilt excess.
struct AnnulusAverages {
  SymMat2 second_deriv;     // symmetrized
  Vec2 first_deriv;
  double radius = 0.0;
  double time = 0.0;
  double asymmetry_defect = 0.0;  // |raw_xy - raw_yx| before symmetrization
};

enum class TimeLabel { Good, Bad };

inline const char* to_string(TimeLabel l) {
  return l == TimeLabel::Good ? "Good" : "Bad";
}

/// Good iff sup <= 2 inf over the ball (inclusive at equality).
struct TimeClass {
  TimeLabel label = TimeLabel::Good;
  double sup = 0.0;
  double inf = 0.0;
  double radius = 0.0;
  Vec2 center;
};

struct TiltExcessReport {
  double value = 0.0;
  SymMat2 ref_second;
  Vec2 ref_first;
  double ball_radius = 0.0;
  double reference_radius = 0.0;
  double time = 0.0;
};

/// One inequality instance: lhs against named rhs components. The ratio is
/// lhs / (sum of rhs components), defined as 0 when lhs == 0.
struct InequalityCheck {
  std::string name;
  double lhs = 0.0;
  std::vector<std::pair<std::string, double>> rhs_components;

  double rhs_total() const {
    double s = 0.0;
    for (const auto& [k, v] : rhs_components) s += v;
    return s;
  }
  double ratio() const {
    if (lhs == 0.0) return 0.0;
    return lhs / rhs_total();
  }
};

// Degenerate powers u^p are evaluated as clamp(u, eps_floor)^p when p < 1;
// passing eps_floor < 0 resolves it to 1e-10 * max|u|.
double resolve_eps_floor(const Field& u, double eps_floor);

/// Integral of 0.5 |grad u|^2 over R.
double energy(const Field& u, const Region& R);

/// Integral of u^n |grad lap u|^2 over R, integrand zeroed where u <= eps.
double dissipation(const Field& u, double n, const Region& R,
                   double eps_floor = -1.0);

/// Integral of u^{1+alpha} / (alpha (1+alpha)) over the whole domain.
double entropy(const Field& u, double alpha, double eps_floor = -1.0);

/// Integral of |D^2 u^{(n+alpha+1)/2}|^2 + |grad u^{(n+alpha+1)/4}|^4.
double entropy_dissipation_rhs(const Field& u, double n, double alpha,
                               double eps_floor = -1.0);

/// Admissible entropy exponent interval (max{-1, 1/2 - n}, 2 - n) \ {0}.
std::pair<double, double> entropy_alpha_range(double n);

/// Deterministic representative alpha for diagnostics tables.
double default_entropy_alpha(double n);

TimeClass classify_time(const Field& u, const Region& ball);

/// Annulus-kernel weighted averages over B_2r \ B_r around `center`.
AnnulusAverages smoothed_averages(const Field& u, double r, Vec2 center);

/// Time derivatives of the smoothed averages, evaluated from the instantaneous
/// flux field u^n grad lap u against the kernel's second and third derivatives.
std::pair<SymMat2, Vec2> averages_rate(const Field& u, double n, double r,
                                       Vec2 center, double eps_floor = -1.0);

/// 0.5 * integral over B_r of |grad u - ref.second_deriv . x - ref.first_deriv|^2,
/// with x measured relative to the ball center.
TiltExcessReport tilt_excess(const Field& u, double r,
                             const AnnulusAverages& ref, Vec2 center);

/// Weighted gradient-power inequality sides: lhs is the three weighted
/// integrals, rhs splits into the dissipation term and the cutoff term.
InequalityCheck bernis_gruen_sides(const Field& u, double n,
                                   const CutoffProfile& cut, Vec2 center,
                                   double r, double eps_floor = -1.0);

/// Sup bound at bad times: (max_{B_2r} u)^{n+2} against the two weighted
/// gradient-power integrals (d = 2). Requires a bad classification on B_2r.
InequalityCheck morrey_sup_check(const Field& u, double n, double r,
                                 double delta, Vec2 center,
                                 double eps_floor = -1.0);

/// Annulus and ball Poincare estimates around the smoothed averages, plus the
/// ball Poincare-Sobolev variant. Five checks.
std::vector<InequalityCheck> poincare_checks(const Field& u, double r,
                                             Vec2 center);

/// Inner-ball third-derivative control by dissipation plus annulus term.
InequalityCheck third_derivative_check(const Field& u, double r, Vec2 center);

/// Weighted second-derivative control by dissipation, gradient and quartic
/// gradient terms.
InequalityCheck second_derivative_check(const Field& u, double n,
                                        const CutoffProfile& cut, Vec2 center,
                                        double r, double eps_floor = -1.0);

struct HoleFillingRow {
  double t = 0.0;
  TimeLabel class_small = TimeLabel::Good;  // on B_{delta r}
  TimeLabel class_big = TimeLabel::Good;    // on B_{2r}
  double good_small = 0.0;  // chi_good(delta r) * int_{B_dr} u^n(|GL|^2+|D3|^2)
  double bad_small = 0.0;   // chi_bad(delta r) * int_{B_dr} u^n|GL|^2+|grad u^p6|^6
  double good_big = 0.0;    // same integrands over B_2r with chi at 2r
  double bad_big = 0.0;
};

/// Every raw ingredient of the dyadic hole-filling inequality over [t1, t2]:
/// tilt-excess endpoints and the four trapezoid-integrated good/bad bulk
/// terms, with the per-snapshot breakdown.
struct HoleFillingReport {
  double t_start = 0.0;
  double t_end = 0.0;
  double r = 0.0;
  double delta = 0.0;
  double excess_end_small = 0.0;   // at t2 over B_{delta r}, reference radius r
  double excess_start_big = 0.0;   // at t1 over B_{2r}, reference radius r
  double good_small_integral = 0.0;
  double bad_small_integral = 0.0;
  double good_big_integral = 0.0;
  double bad_big_integral = 0.0;
  std::vector<HoleFillingRow> rows;
};

HoleFillingReport hole_filling_sides(const Trajectory& traj, double t1,
                                     double t2, double r, double delta,
                                     Vec2 center);

}  // namespace tfilm
