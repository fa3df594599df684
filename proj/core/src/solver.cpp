#include "tfilm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "tfilm/cutoff.hpp"
#include "tfilm/stencil.hpp"

namespace tfilm {

double regime_lower_bound() { return 2.0 - std::sqrt(4.0 / 5.0); }

MobilityModel::MobilityModel(double n, double eps, bool strict)
    : exponent(n), eps_floor(eps), enforce_regime(strict) {
  if (!(eps_floor >= 0.0))
    throw ConstraintViolationError("eps_floor", "must be >= 0");
  if (enforce_regime) {
    if (!(exponent > regime_lower_bound() && exponent < 3.0))
      throw RegimeViolationError(
          "mobility exponent " + std::to_string(exponent) +
          " outside the admissible open interval (1.1055728090000841, 3)");
  } else if (!(exponent > 0.0)) {
    throw ConstraintViolationError("n_exponent", "must be positive");
  }
}

void SolverConfig::validate() const {
  if (!(dt_safety > 0.0 && dt_safety <= 1.0))
    throw ConstraintViolationError("dt_safety", "must lie in (0, 1]");
  if (!(t_end > 0.0))
    throw ConstraintViolationError("t_end", "must be positive");
  if (!(snapshot_every > 0.0 && snapshot_every <= t_end))
    throw ConstraintViolationError("snapshot_every", "must lie in (0, t_end]");
}

std::size_t Trajectory::snapshot_at(double t, double tol) const {
  if (records.empty()) throw Error("empty trajectory");
  if (tol < 0.0) tol = 1e-9 * std::max(1.0, records.back().t);
  std::size_t best = 0;
  double dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < records.size(); ++i) {
    const double d = std::abs(records[i].t - t);
    if (d < dist) {
      dist = d;
      best = i;
    }
  }
  if (dist > tol)
    throw Error("no snapshot within tolerance of requested time");
  return best;
}

namespace {

struct MobEval {
  double n, eps, epsn;

  explicit MobEval(const MobilityModel& m)
      : n(m.exponent), eps(m.eps_floor), epsn(std::pow(m.eps_floor, m.exponent)) {}

  double power(double a) const {
    if (n == 1.0) return a;
    if (n == 2.0) return a * a;
    if (n == 3.0) return a * a * a;
    return std::pow(a, n);
  }

  double operator()(double uL, double uR) const {
    const double mean = 0.5 * (uL + uR);
    double m = mean > 0.0 ? power(mean) : 0.0;
    if (uL <= eps || uR <= eps) m = std::max(m, epsn);
    return m;
  }
};

// Scratch buffers for the conservative update u' = u - dt div(M grad lap u).
struct StepWork {
  std::vector<double> lap, mob_x, mob_y;

  void resize(std::size_t n, bool two_d) {
    lap.assign(n, 0.0);
    mob_x.assign(n, 0.0);
    if (two_d) mob_y.assign(n, 0.0);
  }
};

inline int up(int i, int n) { return i + 1 == n ? 0 : i + 1; }
inline int dn(int i, int n) { return i == 0 ? n - 1 : i - 1; }

void compute_laplacian(const Grid& g, const std::vector<double>& u,
                       std::vector<double>& lap) {
  const int nx = g.nx(), ny = g.ny();
  const double invh2 = 1.0 / (g.spacing() * g.spacing());
  for (int j = 0; j < ny; ++j) {
    const std::size_t row = static_cast<std::size_t>(j) * nx;
    const std::size_t rup = static_cast<std::size_t>(up(j, ny)) * nx;
    const std::size_t rdn = static_cast<std::size_t>(dn(j, ny)) * nx;
    for (int i = 0; i < nx; ++i) {
      const std::size_t k = row + i;
      double s = u[row + up(i, nx)] + u[row + dn(i, nx)] - 2.0 * u[k];
      if (ny > 1) s += u[rup + i] + u[rdn + i] - 2.0 * u[k];
      lap[k] = s * invh2;
    }
  }
}

// Face mobilities from u; mob_x[k] lives on the face between k and k+x,
// mob_y[k] between k and k+y. Returns the max face mobility.
double compute_face_mobilities(const Grid& g, const std::vector<double>& u,
                               const MobEval& mob, StepWork& w) {
  const int nx = g.nx(), ny = g.ny();
  double max_m = 0.0;
  for (int j = 0; j < ny; ++j) {
    const std::size_t row = static_cast<std::size_t>(j) * nx;
    const std::size_t rup = static_cast<std::size_t>(up(j, ny)) * nx;
    for (int i = 0; i < nx; ++i) {
      const std::size_t k = row + i;
      const double mx = mob(u[k], u[row + up(i, nx)]);
      w.mob_x[k] = mx;
      max_m = std::max(max_m, mx);
      if (ny > 1) {
        const double my = mob(u[k], u[rup + i]);
        w.mob_y[k] = my;
        max_m = std::max(max_m, my);
      }
    }
  }
  return max_m;
}

// out = v + scale * div(M grad w); scale = +dt applies the implicit operator,
// and the explicit update uses u - dt * div(M grad lap u) directly.
void apply_divflux(const Grid& g, const std::vector<double>& w,
                   const StepWork& wk, double scale,
                   const std::vector<double>& v, std::vector<double>& out) {
  const int nx = g.nx(), ny = g.ny();
  const double h = g.spacing();
  const double c = scale / (h * h);
  for (int j = 0; j < ny; ++j) {
    const std::size_t row = static_cast<std::size_t>(j) * nx;
    const std::size_t rdn = static_cast<std::size_t>(dn(j, ny)) * nx;
    for (int i = 0; i < nx; ++i) {
      const std::size_t k = row + i;
      const std::size_t km = row + dn(i, nx);
      // (M dw)_faces differenced back to the cell; h^2 = face gradient h
      // times divergence h.
      double div = wk.mob_x[k] * (w[row + up(i, nx)] - w[k]) -
                   wk.mob_x[km] * (w[k] - w[km]);
      if (ny > 1) {
        const std::size_t kdn = rdn + i;
        div += wk.mob_y[k] * (w[static_cast<std::size_t>(up(j, ny)) * nx + i] - w[k]) -
               wk.mob_y[kdn] * (w[k] - w[kdn]);
      }
      out[k] = v[k] + c * div;
    }
  }
}

double mass_of(const Grid& g, const std::vector<double>& u) {
  double s = 0.0;
  for (double v : u) s += v;
  return s * g.cell_measure();
}

double energy_of(const Grid& g, const std::vector<double>& u) {
  // 0.5 * integral of |centered gradient|^2 over the whole domain.
  const int nx = g.nx(), ny = g.ny();
  const double inv2h = 1.0 / (2.0 * g.spacing());
  double s = 0.0;
  for (int j = 0; j < ny; ++j) {
    const std::size_t row = static_cast<std::size_t>(j) * nx;
    const std::size_t rup = static_cast<std::size_t>(up(j, ny)) * nx;
    const std::size_t rdn = static_cast<std::size_t>(dn(j, ny)) * nx;
    for (int i = 0; i < nx; ++i) {
      const double gx = (u[row + up(i, nx)] - u[row + dn(i, nx)]) * inv2h;
      double e = gx * gx;
      if (ny > 1) {
        const double gy = (u[rup + i] - u[rdn + i]) * inv2h;
        e += gy * gy;
      }
      s += e;
    }
  }
  return 0.5 * s * g.cell_measure();
}

double dissipation_of(const Grid& g, const std::vector<double>& u,
                      const MobEval& mob, const std::vector<double>& lap) {
  const int nx = g.nx(), ny = g.ny();
  const double inv2h = 1.0 / (2.0 * g.spacing());
  double s = 0.0;
  for (int j = 0; j < ny; ++j) {
    const std::size_t row = static_cast<std::size_t>(j) * nx;
    const std::size_t rup = static_cast<std::size_t>(up(j, ny)) * nx;
    const std::size_t rdn = static_cast<std::size_t>(dn(j, ny)) * nx;
    for (int i = 0; i < nx; ++i) {
      const std::size_t k = row + i;
      if (u[k] <= mob.eps) continue;
      const double gx = (lap[row + up(i, nx)] - lap[row + dn(i, nx)]) * inv2h;
      double q = gx * gx;
      if (ny > 1) {
        const double gy = (lap[rup + i] - lap[rdn + i]) * inv2h;
        q += gy * gy;
      }
      s += mob.power(u[k]) * q;
    }
  }
  return s * g.cell_measure();
}

// Matrix-free BiCGStab for (I + dt div(M grad lap .))x = b with frozen face
// mobilities. Relative residual target 1e-10.
void solve_semi_implicit(const Grid& g, const StepWork& wk, double dt,
                         const std::vector<double>& b, std::vector<double>& x,
                         std::vector<double>& lap_buf) {
  const std::size_t n = b.size();
  auto dot_v = [](const std::vector<double>& a, const std::vector<double>& c) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * c[i];
    return s;
  };
  auto apply_A = [&](const std::vector<double>& v, std::vector<double>& out) {
    compute_laplacian(g, v, lap_buf);
    apply_divflux(g, lap_buf, wk, dt, v, out);
  };

  std::vector<double> r(n), rhat(n), p(n), vv(n, 0.0), s(n), t(n), ax(n);
  x = b;  // initial guess: previous state
  apply_A(x, ax);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ax[i];
  rhat = r;
  const double bnorm = std::sqrt(dot_v(b, b));
  const double tol = 1e-10 * (bnorm > 0.0 ? bnorm : 1.0);
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  std::fill(p.begin(), p.end(), 0.0);

  for (int it = 0; it < 1000; ++it) {
    if (std::sqrt(dot_v(r, r)) <= tol) return;
    const double rho_new = dot_v(rhat, r);
    if (rho_new == 0.0) break;
    const double beta = (rho_new / rho) * (alpha / omega);
    rho = rho_new;
    for (std::size_t i = 0; i < n; ++i)
      p[i] = r[i] + beta * (p[i] - omega * vv[i]);
    apply_A(p, vv);
    alpha = rho / dot_v(rhat, vv);
    for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * vv[i];
    apply_A(s, t);
    const double tt = dot_v(t, t);
    omega = tt > 0.0 ? dot_v(t, s) / tt : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i] + omega * s[i];
      r[i] = s[i] - omega * t[i];
    }
    if (omega == 0.0) break;
  }
  if (std::sqrt(dot_v(r, r)) > tol)
    throw NonFiniteError("semi-implicit linear solve did not converge");
}

struct StepOutcome {
  double dt = 0.0;
  double mass = 0.0;
};

// One step into `out`; dt chosen from the CFL-style bound, capped by dt_cap.
StepOutcome advance(const Grid& g, const SolverConfig& cfg, const MobEval& mob,
                    const std::vector<double>& u, std::vector<double>& out,
                    StepWork& wk, std::vector<double>& lap_buf, double dt_cap) {
  const double h = g.spacing();
  compute_laplacian(g, u, wk.lap);
  const double max_m = compute_face_mobilities(g, u, mob, wk);
  if (!std::isfinite(max_m))
    throw NonFiniteError("face mobility overflowed to NaN/Inf");
  const double h4 = h * h * h * h;
  double dt = cfg.dt_safety * h4 / (32.0 * std::max(max_m, 1e-300));
  dt = std::min(dt, dt_cap);
  if (!(dt > 0.0)) throw NonFiniteError("time step underflow");

  if (cfg.scheme == Scheme::Explicit) {
    apply_divflux(g, wk.lap, wk, -dt, u, out);
  } else {
    solve_semi_implicit(g, wk, dt, u, out, lap_buf);
  }

  const double mass = mass_of(g, out);
  if (!std::isfinite(mass))
    throw NonFiniteError("solver update produced NaN/Inf");
  return {dt, mass};
}

}  // namespace

double face_mobility(double uL, double uR, const MobilityModel& m) {
  return MobEval(m)(uL, uR);
}

std::pair<Field, double> step(const Field& u, const SolverConfig& cfg) {
  if (!u.all_finite()) throw NonFiniteError("step input contains NaN/Inf");
  const Grid& g = u.grid();
  StepWork wk;
  wk.resize(u.size(), !g.one_dimensional());
  std::vector<double> out(u.size()), lap_buf(u.size());
  const MobEval mob(cfg.mobility);
  StepOutcome s = advance(g, cfg, mob, u.values(), out, wk, lap_buf,
                          std::numeric_limits<double>::infinity());
  return {Field(g, std::move(out), u.time() + s.dt), s.dt};
}

Trajectory run(const Field& u0, const SolverConfig& cfg) {
  cfg.validate();
  if (!u0.all_finite()) throw NonFiniteError("initial condition contains NaN/Inf");
  for (double v : u0.values())
    if (v < 0.0)
      throw ConstraintViolationError("u0", "initial condition must be nonnegative");

  const Grid& g = u0.grid();
  const MobEval mob(cfg.mobility);
  Trajectory traj;
  traj.config = cfg;

  std::vector<double> u = u0.values();
  std::vector<double> next(u.size()), lap_buf(u.size());
  std::vector<double> prev;  // copy of u before a lattice-crossing step
  StepWork wk;
  wk.resize(u.size(), !g.one_dimensional());

  auto record_snapshot = [&](const std::vector<double>& vals, double t) {
    compute_laplacian(g, vals, wk.lap);
    traj.fields.emplace_back(g, vals, t);
    traj.records.push_back({t, mass_of(g, vals), energy_of(g, vals),
                            dissipation_of(g, vals, mob, wk.lap)});
  };

  record_snapshot(u, 0.0);
  const double e0 = traj.records.front().energy;
  double last_snap_energy = e0;
  double cumulative_rise = 0.0;

  const double se = cfg.snapshot_every;
  const long lattice_count = static_cast<long>(std::floor(cfg.t_end / se + 1e-9));
  long next_lattice = 1;
  const double t_tol = 1e-12 * cfg.t_end;

  double t = 0.0;
  while (t < cfg.t_end - t_tol) {
    const double dt_cap = std::min(se, cfg.t_end - t);
    // Keep a copy when the next step may cross the next lattice point, so the
    // nearest completed step can be recorded.
    bool guard = next_lattice <= lattice_count;
    if (guard) prev = u;

    StepOutcome s = advance(g, cfg, mob, u, next, wk, lap_buf, dt_cap);
    std::swap(u, next);
    const double t_prev = t;
    t = t_prev + s.dt;

    if (cfg.record_steps)
      traj.steps.push_back({t, s.dt, s.mass, energy_of(g, u)});

    while (next_lattice <= lattice_count &&
           t >= next_lattice * se - t_tol) {
      const double target = next_lattice * se;
      const bool prev_closer =
          guard && std::abs(t_prev - target) < std::abs(t - target) &&
          t_prev > traj.records.back().t + t_tol;
      if (prev_closer)
        record_snapshot(prev, t_prev);
      else
        record_snapshot(u, t);
      ++next_lattice;

      const double e = traj.records.back().energy;
      if (e > last_snap_energy) cumulative_rise += e - last_snap_energy;
      last_snap_energy = e;
      if (cumulative_rise > 1e-3 * e0 + 1e-300)
        throw DivergedError(
            "cumulative energy increase exceeded 1e-3 * E(0); "
            "reduce dt_safety");
      if (t >= cfg.t_end - t_tol) break;
    }
  }
  return traj;
}

// ---- initial conditions -----------------------------------------------------

Field make_mode(const Grid& g, double amplitude) {
  const double k = 2.0 * M_PI / g.length();
  return Field::from_function(
      g, [&](double x, double) { return 1.0 + amplitude * std::sin(k * x); });
}

Field make_droplet(const Grid& g, Vec2 center, double width, double amplitude) {
  if (!(width > 0.0))
    throw ConstraintViolationError("init.width", "must be positive");
  const CutoffProfile cut(CutoffKind::BallCutoff);
  return Field::from_function(g, [&](double x, double y) {
    const double dx = g.wrap_delta(x - center.x);
    const double dy = g.one_dimensional() ? 0.0 : g.wrap_delta(y - center.y);
    const double rho = std::sqrt(dx * dx + dy * dy) / width;
    const double p = cut.value(rho);
    return amplitude * p * p;
  });
}

Field make_random(const Grid& g, std::uint64_t seed, double amplitude) {
  std::mt19937_64 rng(seed);
  auto uniform = [&rng]() {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0, 1)
  };

  struct Mode {
    int kx, ky;
    double amp, phase;
  };
  std::vector<Mode> modes;
  const int kmax = 3;
  const int ky_lo = g.one_dimensional() ? 0 : -kmax;
  const int ky_hi = g.one_dimensional() ? 0 : kmax;
  for (int kx = 0; kx <= kmax; ++kx)
    for (int ky = ky_lo; ky <= ky_hi; ++ky) {
      if (kx == 0 && ky <= 0) continue;  // skip mean and mirrored duplicates
      modes.push_back({kx, ky, 2.0 * uniform() - 1.0, 2.0 * M_PI * uniform()});
    }

  const double w = 2.0 * M_PI / g.length();
  std::vector<double> noise(g.cell_count());
  double max_abs = 0.0;
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      const double x = g.x_center(i), y = g.y_center(j);
      double s = 0.0;
      for (const Mode& m : modes)
        s += m.amp * std::cos(w * (m.kx * x + m.ky * y) + m.phase);
      noise[g.index(i, j)] = s;
      max_abs = std::max(max_abs, std::abs(s));
    }

  std::vector<double> v(noise.size());
  const double scale = max_abs > 0.0 ? amplitude / max_abs : 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = 1.0 + scale * noise[k];
  return Field(g, std::move(v));
}

Field make_travelwave1d(const Grid& g, double front_x, double width, double n) {
  if (!g.one_dimensional())
    throw ConstraintViolationError("init", "travelwave1d requires a 1D grid");
  if (!(width > 0.0))
    throw ConstraintViolationError("init.width", "must be positive");

  const double m = 3.0 / n;
  const double blend = 0.5 * width;
  const double plateau_len = 0.5 * width;
  const double x1 = front_x + width;          // end of the exact power ramp
  const double x2 = x1 + blend;               // start of the plateau
  const double x3 = x2 + plateau_len;         // start of the descent
  const double x4 = x3 + width;               // back to zero
  if (!(front_x > 0.0) || !(x4 < g.length()))
    throw ConstraintViolationError(
        "init.center", "traveling-wave profile must fit before the periodic seam");

  // Integral of the smoothstep, so the ramp slope blends C^3 from 1 to 0.
  auto smoothstep_int = [](double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 0.5;
    return (((-2.5 * s + 10.0) * s - 14.0) * s + 7.0) * s * s * s * s * s;
  };
  const double plateau = width + blend * (1.0 - smoothstep_int(1.0));
  const double height = std::pow(plateau, m);

  return Field::from_function(g, [&](double x, double) {
    if (x <= front_x || x >= x4) return 0.0;
    if (x <= x1) return std::pow(x - front_x, m);
    if (x <= x2) {
      const double s = (x - x1) / blend;
      const double ramp = width + blend * (s - smoothstep_int(s));
      return std::pow(ramp, m);
    }
    if (x <= x3) return height;
    const double s = (x - x3) / width;
    return height * (1.0 - CutoffProfile::smoothstep(s));
  });
}

}  // namespace tfilm
