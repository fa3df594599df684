#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracle.hpp"
#include "tfilm/stencil.hpp"

using namespace tfilm;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("gradient of a constant field vanishes") {
  const Grid g(16, 16, 2.0);
  const Field f = Field::constant(g, 5.0);
  const VectorField G = gradient(f);
  for (std::size_t k = 0; k < f.size(); ++k) {
    CHECK(G.x[k] == 0.0);
    CHECK(G.y[k] == 0.0);
  }
}

TEST_CASE("gradient of a sine mode matches the discrete symbol") {
  // Centered difference of sin(2 pi x / L) gives sin(2 pi h / L)/h times the
  // cosine at each cell center.
  const Grid g(64, 64, 1.0);
  const double k = 2.0 * kPi / g.length();
  const Field f =
      Field::from_function(g, [&](double x, double) { return std::sin(k * x); });
  const VectorField G = gradient(f);
  const double factor = std::sin(k * g.spacing()) / g.spacing();
  for (int j = 0; j < g.ny(); j += 7)
    for (int i = 0; i < g.nx(); ++i) {
      const double expected = factor * std::cos(k * g.x_center(i));
      CHECK(G.x[g.index(i, j)] == doctest::Approx(expected).epsilon(1e-12));
      CHECK(G.y[g.index(i, j)] == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("gradient is exact on affine data away from the seam (1D)") {
  const Grid g(64, 1, 1.0);
  const Field f = Field::from_function(g, [](double x, double) { return x; });
  const VectorField G = gradient(f);
  for (int i = 2; i < g.nx() - 2; ++i)
    CHECK(G.x[g.index(i, 0)] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("second-order stencils are exact on quadratics in a seam-free window") {
  const Grid g(64, 64, 1.0);
  const Field f = Field::from_function(
      g, [](double x, double y) { return 0.5 * (x * x + 3.0 * y * y); });
  const Field L = laplacian(f);
  const MatrixField H = hessian(f);
  const Tensor3Field T = third_derivatives(f);
  for (int j = 3; j < g.ny() - 3; ++j)
    for (int i = 3; i < g.nx() - 3; ++i) {
      const std::size_t k = g.index(i, j);
      CHECK(L[k] == doctest::Approx(4.0).epsilon(1e-12));
      CHECK(H.xx[k] == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(H.yy[k] == doctest::Approx(3.0).epsilon(1e-12));
      CHECK(std::abs(H.xy[k]) < 1e-9);
      CHECK(std::abs(T.xxx[k]) < 1e-7);
      CHECK(std::abs(T.yyy[k]) < 1e-7);
    }
}

TEST_CASE("laplacian eigenrelation on the discrete sine mode") {
  const Grid g(48, 48, 1.0);
  const double k = 2.0 * kPi / g.length();
  const Field f =
      Field::from_function(g, [&](double x, double) { return std::sin(k * x); });
  const Field L = laplacian(f);
  const double h = g.spacing();
  const double lambda = -(2.0 / (h * h)) * (1.0 - std::cos(k * h));
  for (std::size_t idx = 0; idx < f.size(); ++idx)
    CHECK(L[idx] == doctest::Approx(lambda * f[idx]).epsilon(1e-11));
}

TEST_CASE("all operators vanish on constants") {
  const Grid g(16, 16, 1.0);
  const Field f = Field::constant(g, 2.5);
  CHECK(laplacian(f).max_abs() == 0.0);
  const MatrixField H = hessian(f);
  const Tensor3Field T = third_derivatives(f);
  const VectorField GL = grad_laplacian(f);
  for (std::size_t k = 0; k < f.size(); ++k) {
    CHECK(H.xx[k] == 0.0);
    CHECK(H.xy[k] == 0.0);
    CHECK(H.yy[k] == 0.0);
    CHECK(T.xxx[k] == 0.0);
    CHECK(T.yyy[k] == 0.0);
    CHECK(GL.x[k] == 0.0);
    CHECK(GL.y[k] == 0.0);
  }
}

TEST_CASE("integrate: whole domain of a unit field is L^2 exactly") {
  const Grid g(32, 32, 2.0);
  const Field f = Field::constant(g, 1.0);
  CHECK(integrate(f, Region::whole()) == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("integrate over a ball equals h^2 times the brute-force cell count") {
  const double r = 0.21;
  const oracle::Pt c{0.5, 0.5};
  double prev_err = 0.0;
  for (int nx : {64, 128}) {
    const Grid g(nx, nx, 1.0);
    const Field f = Field::constant(g, 1.0);
    // brute-force count oracle
    std::size_t count = 0;
    for (int j = 0; j < nx; ++j)
      for (int i = 0; i < nx; ++i)
        if (oracle::in_ball(g.x_center(i), g.y_center(j), c, r, 1.0)) ++count;
    const double v = integrate(f, Region::ball({c.x, c.y}, r));
    CHECK(v == doctest::Approx(count * g.spacing() * g.spacing()).epsilon(1e-14));
    const double err = std::abs(v - kPi * r * r);
    if (nx > 64) CHECK(err < prev_err + 1e-12);  // O(h) convergence to pi r^2
    prev_err = err;
  }
}

TEST_CASE("integrate: sine mode cancels over the whole domain") {
  const Grid g(64, 64, 1.0);
  const double k = 2.0 * kPi;
  const Field f =
      Field::from_function(g, [&](double x, double) { return std::sin(k * x); });
  CHECK(std::abs(integrate(f, Region::whole())) < 1e-10);
}

TEST_CASE("integrate throws EmptyRegion below grid resolution") {
  const Grid g(32, 32, 1.0);
  const Field f = Field::constant(g, 1.0);
  // A tiny ball centered on a cell corner contains no cell center.
  const double h = g.spacing();
  CHECK_THROWS_AS(integrate(f, Region::ball({8.0 * h, 8.0 * h}, 0.2 * h)),
                  EmptyRegionError);
}

TEST_CASE("sup_inf basics") {
  const Grid g(16, 16, 1.0);
  const Field c3 = Field::constant(g, 3.0);
  auto [hi, lo] = sup_inf(c3, Region::whole());
  CHECK(hi == 3.0);
  CHECK(lo == 3.0);

  std::vector<double> v(g.cell_count(), 0.0);
  v[5] = 1.0;
  const Field f(g, v);
  auto [hi2, lo2] = sup_inf(f, Region::whole());
  CHECK(hi2 == 1.0);
  CHECK(lo2 == 0.0);
}

TEST_CASE("sup_inf on a linear ramp matches the exhaustive scan oracle") {
  const Grid g(96, 96, 1.0);
  const Field f =
      Field::from_function(g, [&](double x, double) { return 1.0 + x / g.length(); });
  const oracle::Pt c{0.5, 0.45};
  const double r = 0.2;
  double hi_o = -1e300, lo_o = 1e300;
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i)
      if (oracle::in_ball(g.x_center(i), g.y_center(j), c, r, 1.0)) {
        hi_o = std::max(hi_o, f[g.index(i, j)]);
        lo_o = std::min(lo_o, f[g.index(i, j)]);
      }
  auto [hi, lo] = sup_inf(f, Region::ball({c.x, c.y}, r));
  CHECK(hi == hi_o);
  CHECK(lo == lo_o);
}

TEST_CASE("translation equivariance is bit-identical on a dyadic grid") {
  const int nx = 64;
  const Grid g(nx, nx, 1.0);  // h = 2^-6, all centers dyadic
  const Field f = Field::from_function(g, [](double x, double y) {
    return std::sin(7.0 * x) * std::cos(3.0 * y) + 0.3 * x;
  });
  const int shift = 13;
  std::vector<double> shifted(f.size());
  for (int j = 0; j < nx; ++j)
    for (int i = 0; i < nx; ++i)
      shifted[g.index(i, j)] = f[g.index(i - shift, j)];
  const Field fs(g, shifted);

  const Vec2 c0{5.0 / 16.0, 0.5};
  const Vec2 c1{5.0 / 16.0 + shift * g.spacing(), 0.5};
  for (double r : {0.07, 0.125, 0.22}) {
    CHECK(integrate(f, Region::ball(c0, r)) == integrate(fs, Region::ball(c1, r)));
    auto [h0, l0] = sup_inf(f, Region::ball(c0, r));
    auto [h1, l1] = sup_inf(fs, Region::ball(c1, r));
    CHECK(h0 == h1);
    CHECK(l0 == l1);
    if (2.0 * r <= 0.25)
      CHECK(integrate(f, Region::annulus(c0, r, 2.0 * r)) ==
            integrate(fs, Region::annulus(c1, r, 2.0 * r)));
  }
}

TEST_CASE("operator errors shrink second order under refinement") {
  auto errors = [](int nx) {
    const Grid g(nx, nx, 1.0);
    const double k = 2.0 * kPi;
    const Field f = Field::from_function(g, [&](double x, double y) {
      return std::sin(k * x) * std::sin(k * y);
    });
    const VectorField G = gradient(f);
    const Field L = laplacian(f);
    const MatrixField H = hessian(f);
    double eg = 0.0, el = 0.0, eh = 0.0;
    for (int j = 0; j < nx; ++j)
      for (int i = 0; i < nx; ++i) {
        const double x = g.x_center(i), y = g.y_center(j);
        const std::size_t idx = g.index(i, j);
        eg = std::max(eg, std::abs(G.x[idx] - k * std::cos(k * x) * std::sin(k * y)));
        el = std::max(el, std::abs(L[idx] + 2.0 * k * k * std::sin(k * x) * std::sin(k * y)));
        eh = std::max(eh, std::abs(H.xy[idx] - k * k * std::cos(k * x) * std::cos(k * y)));
      }
    return std::array<double, 3>{eg, el, eh};
  };
  const auto e1 = errors(64);
  const auto e2 = errors(128);
  for (int c = 0; c < 3; ++c) {
    const double ratio = e1[c] / e2[c];
    CHECK(ratio >= 3.5);
    CHECK(ratio <= 4.5);
  }
}

TEST_CASE("partition additivity is exact on exactly representable data") {
  const int nx = 64;
  const Grid g(nx, nx, 1.0);  // h^2 = 2^-12
  const Field f = Field::from_function(g, [&](double x, double y) {
    return 1.0 + std::floor(3.0 * x) + 2.0 * std::floor(2.0 * y);  // small ints
  });
  const Vec2 c{0.5, 0.5};
  const double r = 0.2;
  const double whole = integrate(f, Region::whole());
  const double ball = integrate(f, Region::ball(c, r));
  double complement = 0.0;
  for (int j = 0; j < nx; ++j)
    for (int i = 0; i < nx; ++i)
      if (!oracle::in_ball(g.x_center(i), g.y_center(j), {c.x, c.y}, r, 1.0))
        complement += f[g.index(i, j)];
  complement *= g.cell_measure();
  CHECK(whole == ball + complement);
}
