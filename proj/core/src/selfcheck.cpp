#include "tfilm/selfcheck.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "tfilm/diagnostics.hpp"
#include "tfilm/io_store.hpp"
#include "tfilm/stencil.hpp"

namespace tfilm {

namespace fs = std::filesystem;

double front_position(const Field& u, double n, double level) {
  const Grid& g = u.grid();
  for (int i = 0; i < g.nx(); ++i) {
    if (u.at(i, 0) >= level)
      return g.x_center(i) - std::pow(u.at(i, 0), n / 3.0);
  }
  throw Error("front_position: no cell above the tracking level");
}

double traveling_wave_speed(const Trajectory& traj, double front_x,
                            double band_lo_cells, double band_hi_cells,
                            std::size_t intervals) {
  if (traj.size() < 2)
    throw InsufficientSnapshotsError("traveling_wave_speed needs >= 2 snapshots");
  const Grid& g = traj.fields.front().grid();
  const double h = g.spacing();
  const int i0 = static_cast<int>((front_x + band_lo_cells * h) / h);
  const int i1 = static_cast<int>((front_x + band_hi_cells * h) / h);
  double sum = 0.0;
  std::size_t count = 0;
  const std::size_t last = std::min(intervals + 1, traj.size());
  for (std::size_t s = 1; s < last; ++s) {
    const Field& ua = traj.fields[s - 1];
    const Field& ub = traj.fields[s];
    const double dt = traj.records[s].t - traj.records[s - 1].t;
    for (int i = i0; i <= i1; ++i) {
      const double ut = (ub.at(i, 0) - ua.at(i, 0)) / dt;
      const double ux = (ua.at(i + 1, 0) - ua.at(i - 1, 0) + ub.at(i + 1, 0) -
                         ub.at(i - 1, 0)) /
                        (4.0 * h);
      if (ux > 0.0) {
        sum += -ut / ux;
        ++count;
      }
    }
  }
  if (count == 0) throw Error("traveling_wave_speed: empty band");
  return sum / static_cast<double>(count);
}

namespace {

double max_norm_gradient_error(int nx) {
  const Grid g(nx, nx, 1.0);
  const double k = 2.0 * std::numbers::pi;
  const Field f = Field::from_function(
      g, [&](double x, double y) { return std::sin(k * x) * std::sin(k * y); });
  const VectorField G = gradient(f);
  double err = 0.0;
  for (int j = 0; j < nx; ++j)
    for (int i = 0; i < nx; ++i) {
      const double x = g.x_center(i), y = g.y_center(j);
      const double ex = k * std::cos(k * x) * std::sin(k * y);
      err = std::max(err, std::abs(G.x[g.index(i, j)] - ex));
    }
  return err;
}

double max_norm_laplacian_error(int nx) {
  const Grid g(nx, nx, 1.0);
  const double k = 2.0 * std::numbers::pi;
  const Field f = Field::from_function(
      g, [&](double x, double y) { return std::sin(k * x) * std::sin(k * y); });
  const Field L = laplacian(f);
  double err = 0.0;
  for (int j = 0; j < nx; ++j)
    for (int i = 0; i < nx; ++i) {
      const double x = g.x_center(i), y = g.y_center(j);
      const double ex = -2.0 * k * k * std::sin(k * x) * std::sin(k * y);
      err = std::max(err, std::abs(L[g.index(i, j)] - ex));
    }
  return err;
}

CheckResult check_operator_convergence() {
  const double g1 = max_norm_gradient_error(64), g2 = max_norm_gradient_error(128);
  const double l1 = max_norm_laplacian_error(64), l2 = max_norm_laplacian_error(128);
  const double rg = g1 / g2, rl = l1 / l2;
  const bool ok = rg >= 3.5 && rg <= 4.5 && rl >= 3.5 && rl <= 4.5;
  std::ostringstream d;
  d << "gradient ratio " << rg << ", laplacian ratio " << rl;
  return {"operator_convergence", ok, d.str()};
}

CheckResult check_traveling_wave() {
  const int nx = 512;
  const Grid g(nx, 1, 1.0);
  const double h = g.spacing();
  const double n = 1.0;
  const double front = 0.30;
  const Field u0 = make_travelwave1d(g, front, 64.0 * h, n);

  SolverConfig cfg;
  cfg.mobility = MobilityModel(n, 1e-10 * u0.max_abs(), false);
  cfg.dt_safety = 0.4;
  cfg.record_steps = false;
  cfg.t_end = 0.02 * h / 6.0;  // window: wave travels 0.02 cells
  cfg.snapshot_every = cfg.t_end / 2.0;

  const Trajectory traj = run(u0, cfg);
  const double speed = traveling_wave_speed(traj, front, 6.0, 18.0, 2);
  const double rel = std::abs(speed - 6.0) / 6.0;
  std::ostringstream d;
  d << "front speed " << speed << " (expected 6, rel err " << rel << ")";
  return {"traveling_wave", rel <= 0.10, d.str()};
}

CheckResult check_round_trip(const std::string& scratch) {
  try {
    const fs::path dir(scratch);
    fs::create_directories(dir);
    const Grid g(32, 32, 1.0);
    const Field f = make_random(g, 7, 0.5);
    const fs::path p = dir / "selfcheck_snapshot.tflm";
    write_snapshot(f, 2.0, p);
    const Snapshot s = read_snapshot(p);
    bool same = s.field.values() == f.values() && s.n_exponent == 2.0 &&
                s.field.time() == f.time();

    // Same seed twice must yield byte-identical diagnostics rows.
    auto mini_csv = [&]() {
      const Field u0 = make_random(g, 11, 0.3);
      SolverConfig cfg;
      cfg.mobility = MobilityModel(2.0, 1e-10 * u0.max_abs());
      cfg.t_end = 20.0 * 0.1 * std::pow(g.spacing(), 4.0) / 32.0;
      cfg.snapshot_every = cfg.t_end / 2.0;
      const Trajectory traj = run(u0, cfg);
      DiagnosticsTable tab(0);
      for (std::size_t i = 0; i < traj.size(); ++i) {
        DiagnosticsTable::Row row;
        row.t = traj.records[i].t;
        row.mass = traj.records[i].mass;
        row.energy = traj.records[i].energy;
        row.dissipation = traj.records[i].dissipation;
        tab.append_row(row);
      }
      return tab.str();
    };
    same = same && mini_csv() == mini_csv();
    fs::remove(p);
    return {"round_trip", same, same ? "bitwise round trip and deterministic CSV"
                                     : "round trip mismatch"};
  } catch (const std::exception& e) {
    return {"round_trip", false, std::string("IoFailure: ") + e.what()};
  }
}

CheckResult check_invariants() {
  std::ostringstream d;
  bool ok = true;

  // Constant states are exact fixed points.
  {
    const Grid g(32, 32, 1.0);
    const Field c = Field::constant(g, 1.5);
    SolverConfig cfg;
    cfg.mobility = MobilityModel(2.0, 1e-10);
    cfg.t_end = 1.0;
    cfg.snapshot_every = 0.5;
    auto [next, dt] = step(c, cfg);
    if (next.values() != c.values()) {
      ok = false;
      d << "constant state moved; ";
    }
  }

  // Mass conservation on a short random run.
  {
    const Grid g(48, 48, 1.0);
    const Field u0 = make_random(g, 3, 0.4);
    SolverConfig cfg;
    cfg.mobility = MobilityModel(2.0, 1e-10 * u0.max_abs());
    const double dt0 = 0.1 * std::pow(g.spacing(), 4.0) / (32.0 * std::pow(1.4, 2.0));
    cfg.t_end = 200.0 * dt0;
    cfg.snapshot_every = cfg.t_end;
    const Trajectory traj = run(u0, cfg);
    const double drift = std::abs(traj.records.back().mass - traj.records.front().mass);
    if (drift > 1e-10 * std::abs(traj.records.front().mass)) {
      ok = false;
      d << "mass drift " << drift << "; ";
    }
  }

  // Classifier dichotomy and good-time monotonicity under radius decrease.
  {
    const Grid g(64, 64, 1.0);
    for (std::uint64_t seed = 1; seed <= 20 && ok; ++seed) {
      const Field u = make_random(g, seed, 0.8);
      const Vec2 c{0.5, 0.5};
      TimeLabel prev = TimeLabel::Bad;
      for (double r = 0.25; r >= 0.05; r *= 0.7) {
        const TimeClass tc = classify_time(u, Region::ball(c, r));
        const bool good = tc.sup <= 2.0 * tc.inf;
        const bool bad = tc.inf < 0.5 * tc.sup;
        if (good == bad) {
          ok = false;
          d << "dichotomy violated; ";
          break;
        }
        if (prev == TimeLabel::Good && tc.label == TimeLabel::Bad) {
          ok = false;
          d << "good-time monotonicity violated; ";
          break;
        }
        prev = tc.label;
      }
    }
  }

  if (ok) d << "constant fixed point, mass conservation, classifier laws";
  return {"invariants", ok, d.str()};
}

}  // namespace

std::vector<CheckResult> run_selfchecks(const std::string& scratch_dir) {
  std::vector<CheckResult> out;
  out.push_back(check_operator_convergence());
  out.push_back(check_traveling_wave());
  out.push_back(check_round_trip(scratch_dir));
  out.push_back(check_invariants());
  return out;
}

}  // namespace tfilm
