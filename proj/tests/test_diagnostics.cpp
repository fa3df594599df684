#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracle.hpp"
#include "tfilm/diagnostics.hpp"
#include "tfilm/solver.hpp"
#include "tfilm/stencil.hpp"

using namespace tfilm;

namespace {
constexpr double kPi = std::numbers::pi;

Field quadratic_field(const Grid& g, SymMat2 q, Vec2 center, double base = 0.0) {
  return Field::from_function(g, [&](double x, double y) {
    const double dx = g.wrap_delta(x - center.x), dy = g.wrap_delta(y - center.y);
    return base + 0.5 * (q.xx * dx * dx + 2.0 * q.xy * dx * dy + q.yy * dy * dy);
  });
}

}  // namespace

TEST_CASE("energy basics and the discrete sine value") {
  const Grid g(64, 64, 1.0);
  CHECK(energy(Field::constant(g, 3.0), Region::whole()) == 0.0);

  const double k = 2.0 * kPi;
  const Field s =
      Field::from_function(g, [&](double x, double) { return std::sin(k * x); });
  const double lambda_h = std::pow(std::sin(k * g.spacing()) / g.spacing(), 2.0);
  CHECK(energy(s, Region::whole()) ==
        doctest::Approx(0.5 * lambda_h * 0.5).epsilon(1e-12));  // L^2/2 = 1/2
}

TEST_CASE("energy of an affine ramp over a ball matches 0.5|a|^2 area") {
  const Grid g(128, 128, 1.0);
  const Vec2 a{0.7, -0.2};
  const Field f = Field::from_function(g, [&](double x, double y) {
    return a.x * g.wrap_delta(x - 0.5) + a.y * g.wrap_delta(y - 0.5) + 2.0;
  });
  const double r = 0.2;
  // area oracle: cell count times h^2
  std::size_t count = 0;
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i)
      if (oracle::in_ball(g.x_center(i), g.y_center(j), {0.5, 0.5}, r, 1.0))
        ++count;
  const double area = count * g.cell_measure();
  CHECK(energy(f, Region::ball({0.5, 0.5}, r)) ==
        doctest::Approx(0.5 * norm2(a) * area).epsilon(1e-10));
}

TEST_CASE("dissipation: constants, floor clause, and oracle equivalence") {
  const Grid g(64, 64, 1.0);
  CHECK(dissipation(Field::constant(g, 2.0), 2.0, Region::whole()) == 0.0);

  // entirely below the floor: integrand forced to zero
  const Field tiny = Field::constant(g, 1e-14);
  CHECK(dissipation(tiny, 2.0, Region::whole(), 1e-12) == 0.0);

  const Field u = make_mode(g, 0.1);
  const double eps = resolve_eps_floor(u, -1.0);
  const double mine = dissipation(u, 2.0, Region::whole());
  const double ref = oracle::dissipation_whole(u, 2.0, eps);
  CHECK(mine == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("entropy values and admissible range") {
  const Grid g(32, 32, 1.0);
  const Field one = Field::constant(g, 1.0);
  const double alpha = -0.5;
  CHECK(entropy(one, alpha) ==
        doctest::Approx(1.0 / (alpha * (1.0 + alpha))).epsilon(1e-12));
  CHECK(entropy_dissipation_rhs(one, 2.0, alpha) == 0.0);

  CHECK_THROWS_AS(entropy(one, 0.0), AlphaOutOfRangeError);
  CHECK_THROWS_AS(entropy(one, -1.0), AlphaOutOfRangeError);
  CHECK_THROWS_AS(entropy_dissipation_rhs(one, 2.0, 0.5), AlphaOutOfRangeError);
  CHECK_THROWS_AS(entropy_dissipation_rhs(one, 2.0, -1.2), AlphaOutOfRangeError);

  const auto [lo, hi] = entropy_alpha_range(2.0);
  CHECK(lo == -1.0);
  CHECK(hi == 0.0);
  const double a2 = default_entropy_alpha(2.0);
  CHECK(a2 > lo);
  CHECK(a2 < hi);
}

TEST_CASE("entropy rhs of a droplet matches the direct-sum oracle") {
  const Grid g(64, 64, 1.0);
  const Field u = make_droplet(g, {0.5, 0.5}, 0.12, 1.0);
  const double n = 2.0, alpha = -0.5;
  const double eps = resolve_eps_floor(u, -1.0);
  const double mine = entropy_dissipation_rhs(u, n, alpha);
  const double ref = oracle::entropy_rhs_whole(u, n, alpha, eps);
  CHECK(mine == doctest::Approx(ref).epsilon(1e-10));
}

TEST_CASE("classify_time follows the sup <= 2 inf rule, inclusive") {
  const Grid g(32, 32, 1.0);
  const Region ball = Region::ball({0.5, 0.5}, 0.2);
  CHECK(classify_time(Field::constant(g, 1.0), ball).label == TimeLabel::Good);

  // boundary case sup = 2 inf stays Good
  const Field edge = Field::from_function(g, [&](double x, double y) {
    return oracle::in_ball(x, y, {0.5, 0.5}, 0.1, 1.0) ? 2.0 : 1.0;
  });
  const TimeClass tc = classify_time(edge, ball);
  CHECK(tc.sup == 2.0);
  CHECK(tc.inf == 1.0);
  CHECK(tc.label == TimeLabel::Good);

  const Field zeroed = Field::from_function(g, [&](double x, double y) {
    return oracle::in_ball(x, y, {0.5, 0.5}, 0.05, 1.0) ? 0.0 : 1.0;
  });
  CHECK(classify_time(zeroed, ball).label == TimeLabel::Bad);
}

TEST_CASE("smoothed averages: affine data gives (0, a) to 1e-10") {
  const Grid g(256, 256, 1.0);
  const Vec2 a{0.8, -0.35};
  const Field f = Field::from_function(g, [&](double x, double y) {
    return a.x * g.wrap_delta(x - 0.5) + a.y * g.wrap_delta(y - 0.5) + 1.0;
  });
  const AnnulusAverages avg = smoothed_averages(f, 0.2, {0.5, 0.5});
  CHECK(std::abs(avg.second_deriv.xx) < 1e-10);
  CHECK(std::abs(avg.second_deriv.xy) < 1e-10);
  CHECK(std::abs(avg.second_deriv.yy) < 1e-10);
  CHECK(avg.first_deriv.x == doctest::Approx(a.x).epsilon(1e-12));
  CHECK(avg.first_deriv.y == doctest::Approx(a.y).epsilon(1e-12));
}

TEST_CASE("smoothed averages: quadratic identity with O(h^2) error") {
  const SymMat2 q{1.4, -0.3, 0.7};
  const double qnorm = std::sqrt(frob2(q));
  double err128 = 0.0;
  for (int nx : {128, 256}) {
    const Grid g(nx, nx, 1.0);
    const Field f = quadratic_field(g, q, {0.5, 0.5});
    const AnnulusAverages avg = smoothed_averages(f, 0.125, {0.5, 0.5});
    const double err = std::sqrt(frob2(avg.second_deriv - q)) +
                       std::sqrt(norm2(avg.first_deriv));
    if (nx == 128) {
      err128 = err;
      CHECK(err <= 1e-3 * qnorm);
    } else {
      CHECK(err <= err128 / 3.5);
    }
    CHECK(avg.asymmetry_defect <= 1e-6 * qnorm);
  }
}

TEST_CASE("smoothed averages of a constant vanish") {
  const Grid g(64, 64, 1.0);
  const AnnulusAverages avg =
      smoothed_averages(Field::constant(g, 4.0), 0.2, {0.5, 0.5});
  CHECK(std::abs(avg.second_deriv.xx) < 1e-13);
  CHECK(std::abs(avg.first_deriv.x) < 1e-13);
  CHECK(std::abs(avg.first_deriv.y) < 1e-13);
}

TEST_CASE("smoothed averages ramp resolvability") {
  const Grid g(64, 64, 1.0);
  const Field f = Field::constant(g, 1.0);
  CHECK_THROWS_AS(smoothed_averages(f, 6.0 * g.spacing(), {0.5, 0.5}),
                  RampUnresolvedError);
}

TEST_CASE("tilt excess: quadratic with reference (Q, 0) is zero to roundoff") {
  const Grid g(128, 128, 1.0);
  const SymMat2 q{2.0, 0.5, -1.0};
  const Field f = quadratic_field(g, q, {0.5, 0.5});
  AnnulusAverages ref;
  ref.second_deriv = q;
  ref.first_deriv = {0.0, 0.0};
  ref.radius = 0.125;
  const double r = 0.125;
  const TiltExcessReport rep = tilt_excess(f, r, ref, {0.5, 0.5});
  CHECK(rep.value <= 1e-10 * frob2(q) * std::pow(r, 4.0));
}

TEST_CASE("tilt excess: constant with zero reference is exactly zero") {
  const Grid g(64, 64, 1.0);
  AnnulusAverages ref;
  const TiltExcessReport rep =
      tilt_excess(Field::constant(g, 2.0), 0.2, ref, {0.5, 0.5});
  CHECK(rep.value == 0.0);
}

TEST_CASE("tilt excess matches the direct-sum oracle on a sine mode") {
  const Grid g(96, 96, 1.0);
  const Field u = Field::from_function(g, [&](double x, double y) {
    return 1.0 + 0.3 * std::sin(2.0 * kPi * x) * std::sin(2.0 * kPi * y);
  });
  const double r = 0.15;
  const Vec2 c{0.5, 0.5};
  const AnnulusAverages ref = smoothed_averages(u, r, c);
  const double mine = tilt_excess(u, r, ref, c).value;
  const double b[3] = {ref.second_deriv.xx, ref.second_deriv.xy, ref.second_deriv.yy};
  const double cv[2] = {ref.first_deriv.x, ref.first_deriv.y};
  const double theirs = oracle::tilt_excess_ball(u, {c.x, c.y}, r, b, cv);
  CHECK(mine == doctest::Approx(theirs).epsilon(1e-11));
}

TEST_CASE("affine shift invariance of the tilt excess") {
  const Grid g(128, 128, 1.0);
  const Vec2 c{0.5, 0.5};
  const double r = 0.12;
  const Field base = make_droplet(g, c, 0.15, 1.0);
  const Vec2 a{0.4, -0.15};
  std::vector<double> shifted(base.values());
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i)
      shifted[g.index(i, j)] += a.x * g.wrap_delta(g.x_center(i) - c.x) +
                                a.y * g.wrap_delta(g.y_center(j) - c.y) + 0.3;
  const Field moved(g, shifted);

  const AnnulusAverages r0 = smoothed_averages(base, r, c);
  const AnnulusAverages r1 = smoothed_averages(moved, r, c);
  CHECK(std::sqrt(frob2(r1.second_deriv - r0.second_deriv)) < 1e-10);
  CHECK(r1.first_deriv.x - r0.first_deriv.x == doctest::Approx(a.x).epsilon(1e-10));
  CHECK(r1.first_deriv.y - r0.first_deriv.y == doctest::Approx(a.y).epsilon(1e-10));

  const double e0 = tilt_excess(base, r, r0, c).value;
  const double e1 = tilt_excess(moved, r, r1, c).value;
  CHECK(e1 == doctest::Approx(e0).epsilon(1e-9));
}

TEST_CASE("bernis-gruen: trivial inputs") {
  const Grid g(64, 64, 1.0);
  const CutoffProfile cut(CutoffKind::BallCutoff);
  const double r = 0.125;

  const InequalityCheck on_c =
      bernis_gruen_sides(Field::constant(g, 2.0), 2.0, cut, {0.5, 0.5}, r);
  CHECK(on_c.lhs == 0.0);
  CHECK(on_c.rhs_components[0].second == 0.0);
  CHECK(on_c.rhs_components[1].second > 0.0);
  CHECK(on_c.ratio() == 0.0);

  const InequalityCheck on_zero =
      bernis_gruen_sides(Field::constant(g, 0.0), 2.0, cut, {0.5, 0.5}, r, 0.0);
  CHECK(on_zero.lhs == 0.0);
  CHECK(on_zero.rhs_total() == 0.0);
}

TEST_CASE("bernis-gruen five integrals match the direct-sum oracle") {
  const Grid g(96, 96, 1.0);
  const Field u = Field::from_function(g, [&](double x, double y) {
    return 1.0 + 0.2 * std::sin(2.0 * kPi * x) * std::sin(2.0 * kPi * y);
  });
  const double n = 2.0, r = 1.0 / 8.0;
  const double eps = resolve_eps_floor(u, -1.0);
  const CutoffProfile cut(CutoffKind::BallCutoff);
  const InequalityCheck chk = bernis_gruen_sides(u, n, cut, {0.5, 0.5}, r);
  const oracle::BernisGruenParts parts =
      oracle::bernis_gruen_parts(u, n, eps, {0.5, 0.5}, r);
  CHECK(chk.lhs ==
        doctest::Approx(parts.grad6 + parts.mid + parts.third).epsilon(1e-10));
  CHECK(chk.rhs_components[0].second == doctest::Approx(parts.diss).epsilon(1e-10));
  CHECK(chk.rhs_components[1].second == doctest::Approx(parts.cut).epsilon(1e-10));
}

TEST_CASE("bernis-gruen scale covariance: u -> lambda u multiplies both sides by lambda^(n+2)") {
  const Grid g(64, 64, 1.0);
  const Field u = make_random(g, 17, 0.4);
  const double n = 2.0, r = 0.125, lambda = 3.0;
  std::vector<double> sv(u.values());
  for (double& v : sv) v *= lambda;
  const Field su(g, sv);
  const CutoffProfile cut(CutoffKind::BallCutoff);
  const InequalityCheck c1 = bernis_gruen_sides(u, n, cut, {0.5, 0.5}, r);
  const InequalityCheck c2 = bernis_gruen_sides(su, n, cut, {0.5, 0.5}, r);
  const double scale = std::pow(lambda, n + 2.0);
  CHECK(c2.lhs == doctest::Approx(scale * c1.lhs).epsilon(1e-10));
  CHECK(c2.rhs_total() == doctest::Approx(scale * c1.rhs_total()).epsilon(1e-10));
  CHECK(c2.ratio() == doctest::Approx(c1.ratio()).epsilon(1e-10));
}

TEST_CASE("morrey sup bound: preconditions and oracle equivalence") {
  const Grid g(96, 96, 1.0);
  const Vec2 c{0.5, 0.5};
  const double r = 0.1, delta = 0.5;

  CHECK_THROWS_AS(morrey_sup_check(Field::constant(g, 1.0), 2.0, r, delta, c),
                  NotBadTimeError);

  // u == 0 on the ball: trivial check, zero against zero
  const InequalityCheck z =
      morrey_sup_check(Field::constant(g, 0.0), 2.0, r, delta, c, 0.0);
  CHECK(z.lhs == 0.0);

  // radial ramp from 0 to 1 across B_2r: a genuinely bad ball
  const Field ramp = Field::from_function(g, [&](double x, double y) {
    const double d = std::sqrt(oracle::pdist2(x, y, c.x, c.y, 1.0));
    return std::min(1.0, d / (2.0 * r));
  });
  const double eps = resolve_eps_floor(ramp, -1.0);
  const InequalityCheck chk = morrey_sup_check(ramp, 2.0, r, delta, c);
  const double r4 = std::pow(r, 4.0);
  const double ann =
      r4 * oracle::grad_pow6_region(ramp, 2.0, eps, {c.x, c.y}, delta * r, 2.0 * r);
  const double inner = r4 * delta *
                       oracle::grad_pow6_region(ramp, 2.0, eps, {c.x, c.y},
                                                -1.0, delta * r);
  CHECK(chk.rhs_components[0].second == doctest::Approx(ann).epsilon(1e-10));
  CHECK(chk.rhs_components[1].second == doctest::Approx(inner).epsilon(1e-10));
  auto [hi, lo] = sup_inf(ramp, Region::ball(c, 2.0 * r));
  CHECK(chk.lhs == doctest::Approx(std::pow(hi, 4.0)).epsilon(1e-12));
}

TEST_CASE("poincare checks: affine and quadratic degeneracies") {
  const Grid g(128, 128, 1.0);
  const Vec2 c{0.5, 0.5};
  const double r = 0.1;

  const Field aff = Field::from_function(g, [&](double x, double y) {
    return 0.6 * g.wrap_delta(x - c.x) - 0.2 * g.wrap_delta(y - c.y) + 1.0;
  });
  for (const InequalityCheck& chk : poincare_checks(aff, r, c))
    CHECK(chk.lhs < 1e-18);

  const SymMat2 q{1.0, 0.25, -0.5};
  const Field quad = quadratic_field(g, q, c);
  const auto checks = poincare_checks(quad, r, c);
  // b_r = Q up to quadrature so every deviation integral is tiny
  for (const InequalityCheck& chk : checks)
    CHECK(chk.lhs < 1e-7 * frob2(q));
}

TEST_CASE("poincare checks match the direct-sum oracle on a random field") {
  const Grid g(96, 96, 1.0);
  const Field u = make_random(g, 23, 0.5);
  const Vec2 c{0.5, 0.5};
  const double r = 0.1;
  const auto checks = poincare_checks(u, r, c);
  const AnnulusAverages avg = smoothed_averages(u, r, c);
  const double b[3] = {avg.second_deriv.xx, avg.second_deriv.xy, avg.second_deriv.yy};
  const double cv[2] = {avg.first_deriv.x, avg.first_deriv.y};
  const oracle::PoincareParts ann =
      oracle::poincare_parts(u, {c.x, c.y}, r, 2.0 * r, b, cv);
  const oracle::PoincareParts ball =
      oracle::poincare_parts(u, {c.x, c.y}, -1.0, 2.0 * r, b, cv);

  CHECK(checks[0].lhs == doctest::Approx(ann.grad_dev).epsilon(1e-10));
  CHECK(checks[0].rhs_components[0].second ==
        doctest::Approx(r * r * ann.hess_dev).epsilon(1e-10));
  CHECK(checks[1].lhs == doctest::Approx(ann.hess_dev).epsilon(1e-10));
  CHECK(checks[1].rhs_components[0].second ==
        doctest::Approx(r * r * ann.third).epsilon(1e-10));
  CHECK(checks[2].lhs == doctest::Approx(ball.grad_dev).epsilon(1e-10));
  CHECK(checks[3].lhs == doctest::Approx(ball.hess_dev).epsilon(1e-10));
  CHECK(checks[4].lhs == doctest::Approx(ball.hess_dev).epsilon(1e-10));
  CHECK(checks[4].rhs_components[0].second ==
        doctest::Approx(ball.third_l1 * ball.third_l1).epsilon(1e-10));
}

TEST_CASE("third derivative bound: quadratic triviality and windowed harmonic cubic") {
  const Grid g(128, 128, 1.0);
  const Vec2 c{0.5, 0.5};
  const double r = 0.1;

  const Field quad = quadratic_field(g, {1.0, 0.0, 2.0}, c, 1.0);
  const InequalityCheck q = third_derivative_check(quad, r, c);
  CHECK(q.lhs < 1e-12);
  CHECK(q.rhs_total() < 1e-12);

  // harmonic cubic windowed by a plateau that covers B_2r: laplacian
  // vanishes there, so the dissipation side is near zero
  const CutoffProfile win(CutoffKind::BallCutoff);
  const Field harm = Field::from_function(g, [&](double x, double y) {
    const double dx = g.wrap_delta(x - c.x), dy = g.wrap_delta(y - c.y);
    const double w = win.value(std::sqrt(dx * dx + dy * dy) / (2.2 * r));
    return (dx * dx * dx - 3.0 * dx * dy * dy) * w;
  });
  const InequalityCheck hc = third_derivative_check(harm, r, c);
  CHECK(hc.rhs_components[0].second < 1e-8 * hc.lhs);
  CHECK(hc.lhs > 0.0);
  CHECK(hc.rhs_components[1].second > 0.0);
  // lhs controlled by the annulus term with an O(1) constant
  CHECK(hc.lhs / hc.rhs_components[1].second < 10.0);
}

TEST_CASE("second derivative bound: trivial and oracle equivalence") {
  const Grid g(96, 96, 1.0);
  const Vec2 c{0.5, 0.5};
  const double r = 0.1;
  const CutoffProfile cut(CutoffKind::BallCutoff);

  const InequalityCheck z =
      second_derivative_check(Field::constant(g, 1.5), 2.0, cut, c, r);
  CHECK(z.lhs == 0.0);
  CHECK(z.rhs_total() == 0.0);

  const Field u = Field::from_function(g, [&](double x, double) {
    return 1.0 + 0.1 * std::sin(2.0 * kPi * x);
  });
  const double eps = resolve_eps_floor(u, -1.0);
  const InequalityCheck chk = second_derivative_check(u, 2.0, cut, c, r);
  const oracle::SecondDerivParts parts =
      oracle::second_deriv_parts(u, 2.0, eps, {c.x, c.y}, r);
  CHECK(chk.lhs == doctest::Approx(parts.lhs).epsilon(1e-10));
  CHECK(chk.rhs_components[0].second == doctest::Approx(parts.diss).epsilon(1e-10));
  CHECK(chk.rhs_components[1].second ==
        doctest::Approx(parts.grad_term).epsilon(1e-10));
  CHECK(chk.rhs_components[2].second ==
        doctest::Approx(parts.quartic).epsilon(1e-10));
}

TEST_CASE("averages rate: zero on constants and steady states") {
  const Grid g(64, 64, 1.0);
  const auto [bd, cd] = averages_rate(Field::constant(g, 2.0), 2.0, 0.15, {0.5, 0.5});
  CHECK(frob2(bd) == 0.0);
  CHECK(norm2(cd) == 0.0);
}

TEST_CASE("averages rate agrees with finite differences in time") {
  const Grid g(128, 128, 1.0);
  const Field u0 = make_random(g, 31, 0.25);
  const double n = 2.0;
  const double h = g.spacing();
  const double dt0 = 0.1 * std::pow(h, 4.0) / (32.0 * std::pow(1.25, n));
  const Vec2 c{0.5, 0.5};
  const double r = 0.15;

  auto fd_error = [&](double spacing_steps) {
    SolverConfig cfg;
    cfg.mobility = MobilityModel(n, 1e-10 * u0.max_abs());
    cfg.snapshot_every = spacing_steps * dt0;
    cfg.t_end = 2.0 * cfg.snapshot_every;
    cfg.record_steps = false;
    const Trajectory traj = run(u0, cfg);
    REQUIRE(traj.size() == 3);
    const AnnulusAverages a0 = smoothed_averages(traj.fields[0], r, c);
    const AnnulusAverages a2 = smoothed_averages(traj.fields[2], r, c);
    const double dt = traj.records[2].t - traj.records[0].t;
    const SymMat2 fd_b = (1.0 / dt) * (a2.second_deriv - a0.second_deriv);
    const Vec2 fd_c = (1.0 / dt) * (a2.first_deriv - a0.first_deriv);
    const auto [bd, cd] = averages_rate(traj.fields[1], n, r, c);
    const double scale = std::sqrt(frob2(bd)) + std::sqrt(norm2(cd));
    return (std::sqrt(frob2(fd_b - bd)) + std::sqrt(norm2(fd_c - cd))) / scale;
  };

  // the mismatch is bounded by C (dt + h^2): halving dt keeps it bounded
  const double coarse = fd_error(64.0);
  CHECK(coarse < 0.05);
  CHECK(fd_error(32.0) < std::max(1.2 * coarse, 0.02));
}

TEST_CASE("hole filling: constant trajectory gives all-zero ingredients") {
  const Grid g(64, 64, 1.0);
  Trajectory traj;
  traj.config.mobility = MobilityModel(2.0, 1e-10);
  for (int s = 0; s < 4; ++s) {
    traj.fields.push_back(Field::constant(g, 1.0, 0.1 * s));
    traj.records.push_back({0.1 * s, 1.0, 0.0, 0.0});
  }
  const HoleFillingReport rep =
      hole_filling_sides(traj, 0.0, 0.3, 0.125, 0.5, {0.5, 0.5});
  CHECK(rep.excess_end_small == 0.0);
  CHECK(rep.excess_start_big == 0.0);
  CHECK(rep.good_small_integral == 0.0);
  CHECK(rep.bad_small_integral == 0.0);
  CHECK(rep.good_big_integral == 0.0);
  CHECK(rep.bad_big_integral == 0.0);
}

TEST_CASE("hole filling: stationary positive quadratic window is inert") {
  const Grid g(128, 128, 1.0);
  const Vec2 c{0.5, 0.5};
  const Field quad = quadratic_field(g, {0.8, 0.1, 0.5}, c, 2.0);
  Trajectory traj;
  traj.config.mobility = MobilityModel(2.0, 1e-10);
  for (int s = 0; s < 3; ++s) {
    traj.fields.push_back(Field(g, quad.values(), 0.1 * s));
    traj.records.push_back({0.1 * s, 0.0, 0.0, 0.0});
  }
  const HoleFillingReport rep =
      hole_filling_sides(traj, 0.0, 0.2, 0.1, 0.5, c);
  for (const HoleFillingRow& row : rep.rows) {
    CHECK(row.class_small == TimeLabel::Good);
    CHECK(row.class_big == TimeLabel::Good);
  }
  CHECK(rep.good_small_integral < 1e-12);
  CHECK(rep.good_big_integral < 1e-12);
  CHECK(rep.bad_small_integral == 0.0);
  CHECK(rep.bad_big_integral == 0.0);
  CHECK(rep.excess_end_small < 1e-7);
  CHECK(rep.excess_start_big < 1e-6);
}

TEST_CASE("hole filling ingredients match the oracle on an evolving run") {
  const Grid g(64, 64, 1.0);
  const Field u0 = make_random(g, 77, 0.45);
  const double n = 2.0;
  const double dt0 = 0.1 * std::pow(g.spacing(), 4.0) / (32.0 * std::pow(1.45, n));
  SolverConfig cfg;
  cfg.mobility = MobilityModel(n, 1e-10 * u0.max_abs());
  cfg.snapshot_every = 40.0 * dt0;
  cfg.t_end = 4.0 * cfg.snapshot_every;
  cfg.record_steps = false;
  const Trajectory traj = run(u0, cfg);
  REQUIRE(traj.size() == 5);

  const Vec2 c{0.5, 0.5};
  const double r = 0.125, delta = 0.5;
  const double eps = cfg.mobility.eps_floor;
  const HoleFillingReport rep =
      hole_filling_sides(traj, 0.0, traj.records.back().t, r, delta, c);

  // oracle: per-snapshot classification and bulk integrals, trapezoid in time
  std::vector<double> times, gs, bs, gb, bb;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const Field& u = traj.fields[i];
    times.push_back(traj.records[i].t);
    auto cls = [&](double rr) {
      double hi = -1e300, lo = 1e300;
      for (int j = 0; j < g.ny(); ++j)
        for (int ii = 0; ii < g.nx(); ++ii)
          if (oracle::in_ball(g.x_center(ii), g.y_center(j), {c.x, c.y}, rr, 1.0)) {
            hi = std::max(hi, u.at(ii, j));
            lo = std::min(lo, u.at(ii, j));
          }
      return hi <= 2.0 * lo;
    };
    const bool good_small = cls(delta * r), good_big = cls(2.0 * r);
    gs.push_back(good_small ? oracle::bulk_good(u, n, eps, {c.x, c.y}, delta * r) : 0.0);
    bs.push_back(good_small ? 0.0 : oracle::bulk_bad(u, n, eps, {c.x, c.y}, delta * r));
    gb.push_back(good_big ? oracle::bulk_good(u, n, eps, {c.x, c.y}, 2.0 * r) : 0.0);
    bb.push_back(good_big ? 0.0 : oracle::bulk_bad(u, n, eps, {c.x, c.y}, 2.0 * r));
  }
  CHECK(rep.good_small_integral ==
        doctest::Approx(oracle::trapezoid(times, gs)).epsilon(1e-9));
  CHECK(rep.bad_small_integral ==
        doctest::Approx(oracle::trapezoid(times, bs)).epsilon(1e-9));
  CHECK(rep.good_big_integral ==
        doctest::Approx(oracle::trapezoid(times, gb)).epsilon(1e-9));
  CHECK(rep.bad_big_integral ==
        doctest::Approx(oracle::trapezoid(times, bb)).epsilon(1e-9));

  // excess endpoints against the oracle quadrature
  const AnnulusAverages ref2 = smoothed_averages(traj.fields.back(), r, c);
  const double b2[3] = {ref2.second_deriv.xx, ref2.second_deriv.xy,
                        ref2.second_deriv.yy};
  const double c2[2] = {ref2.first_deriv.x, ref2.first_deriv.y};
  CHECK(rep.excess_end_small ==
        doctest::Approx(oracle::tilt_excess_ball(traj.fields.back(), {c.x, c.y},
                                                 delta * r, b2, c2))
            .epsilon(1e-9));

  CHECK_THROWS_AS(
      hole_filling_sides(traj, 0.0, cfg.snapshot_every * 1.01, r, delta, c),
      InsufficientSnapshotsError);
}

TEST_CASE("classifier dichotomy and good-time radius monotonicity") {
  const Grid g(64, 64, 1.0);
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const Field u = make_random(g, seed, 0.9);
    const Vec2 c{0.5, 0.5};
    TimeLabel outer_label = TimeLabel::Bad;
    bool outer_good_seen = false;
    for (double r = 0.24; r >= 8.0 * g.spacing(); r *= 0.75) {
      const TimeClass tc = classify_time(u, Region::ball(c, r));
      const bool good = tc.sup <= 2.0 * tc.inf;
      const bool bad = tc.inf < 0.5 * tc.sup;
      CHECK(good != bad);
      if (outer_good_seen) CHECK(tc.label == TimeLabel::Good);
      if (tc.label == TimeLabel::Good) outer_good_seen = true;
      outer_label = tc.label;
      ++checked;
    }
    (void)outer_label;
  }
  CHECK(checked > 100);
}
