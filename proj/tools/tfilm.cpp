// tfilm: thin-film equation lab driver.
//
// Subcommands: run (simulate + diagnostics CSV), diagnose (single-snapshot
// functionals), sweep (dyadic excess sweep over a trajectory), fit (decay
// exponent from a sweep CSV), validate (built-in check suites).

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "tfilm/diagnostics.hpp"
#include "tfilm/io_store.hpp"
#include "tfilm/regularity.hpp"
#include "tfilm/selfcheck.hpp"
#include "tfilm/solver.hpp"
#include "tfilm/stencil.hpp"

namespace fs = std::filesystem;
using namespace tfilm;

namespace {

constexpr int kExitDiverged = 2;
constexpr int kExitConfig = 3;
constexpr int kExitRegion = 4;
constexpr int kExitInsufficient = 5;

int thread_cap() {
  const char* env = std::getenv("TFLM_THREADS");
  if (!env) return 1;
  const int v = std::atoi(env);
  return v > 0 ? v : 1;
}

Vec2 parse_center(const std::string& text, double fallback) {
  if (text.empty()) return {fallback, fallback};
  const auto comma = text.find(',');
  if (comma == std::string::npos) {
    const double x = std::stod(text);
    return {x, x};
  }
  return {std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
}

Field build_initial(const ExperimentConfig& cfg, const Grid& g) {
  const Vec2 center{cfg.resolved_center_x(), cfg.resolved_center_y()};
  if (cfg.init == "constant") return Field::constant(g, cfg.init_amplitude);
  if (cfg.init == "mode") return make_mode(g, cfg.init_amplitude);
  if (cfg.init == "droplet")
    return make_droplet(g, center, cfg.resolved_width(), cfg.init_amplitude);
  if (cfg.init == "random") return make_random(g, cfg.seed, cfg.init_amplitude);
  return make_travelwave1d(g, cfg.resolved_center_x(), cfg.resolved_width(),
                           cfg.n_exponent);
}

// Dyadic column ladder for the diagnostics table: r_max / lambda^k down to
// the resolvability floor. Unlike a RadiusSchedule this may have fewer than
// three levels on coarse grids.
std::vector<double> table_radii(const ExperimentConfig& cfg, const Grid& g) {
  std::vector<double> radii;
  const double floor_r = std::max(8.0 * g.spacing(), cfg.resolved_r_min());
  double r = cfg.resolved_r_max();
  while (r >= floor_r * (1.0 - 1e-12)) {
    radii.push_back(r);
    r /= cfg.sweep_lambda;
  }
  return radii;
}

int cmd_run(const std::string& config_path, const std::string& out_dir) {
  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  const bool one_d = cfg.init == "travelwave1d";
  const Grid grid(cfg.nx, one_d ? 1 : cfg.nx, cfg.domain_size);
  const Field u0 = build_initial(cfg, grid);

  if (!cfg.strict_regime) {
    const RegimeDecision d = regime_gate(cfg.n_exponent, false);
    if (!d.accepted) std::cerr << "warning: " << d.message << "\n";
  }

  SolverConfig scfg;
  scfg.mobility = MobilityModel(cfg.n_exponent, cfg.eps_floor * u0.max_abs(),
                                cfg.strict_regime);
  scfg.dt_safety = cfg.dt_safety;
  scfg.t_end = cfg.t_end;
  scfg.snapshot_every = cfg.snapshot_every;
  scfg.scheme = cfg.scheme == "explicit" ? Scheme::Explicit : Scheme::SemiImplicit;
  scfg.record_steps = false;

  Trajectory traj;
  try {
    traj = run(u0, scfg);
  } catch (const DivergedError& e) {
    std::cerr << "diverged: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const NonFiniteError& e) {
    std::cerr << "diverged: " << e.what() << "\n";
    return kExitDiverged;
  }

  fs::create_directories(out_dir);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "snap_%06zu.tflm", i);
    write_snapshot(traj.fields[i], cfg.n_exponent, fs::path(out_dir) / name);
  }

  const Vec2 center{cfg.resolved_center_x(), cfg.resolved_center_y()};
  const std::vector<double> radii = one_d ? std::vector<double>{} : table_radii(cfg, grid);
  const double alpha = default_entropy_alpha(cfg.n_exponent);
  const double eps = scfg.mobility.eps_floor;
  const double r_bg = std::min(cfg.resolved_r_max(), grid.length() / 8.0);
  const bool bg_ok = !one_d && r_bg >= 8.0 * grid.spacing();
  const CutoffProfile ball_cut(CutoffKind::BallCutoff);

  DiagnosticsTable table(radii.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const Field& u = traj.fields[i];
    DiagnosticsTable::Row row;
    row.t = traj.records[i].t;
    row.mass = traj.records[i].mass;
    row.energy = traj.records[i].energy;
    row.dissipation = traj.records[i].dissipation;
    row.entropy_a1 = entropy(u, alpha, eps);
    row.entropy_rhs_a1 = entropy_dissipation_rhs(u, cfg.n_exponent, alpha, eps);
    if (bg_ok) {
      const InequalityCheck bg =
          bernis_gruen_sides(u, cfg.n_exponent, ball_cut, center, r_bg, eps);
      row.bg_lhs = bg.lhs;
      row.bg_rhs_diss = bg.rhs_components[0].second;
      row.bg_rhs_cut = bg.rhs_components[1].second;
    }
    {
      const VectorField G = gradient(u);
      double s = 0.0;
      for (std::size_t k = 0; k < u.size(); ++k)
        s += std::pow(norm2(G.at(k)), 1.5);
      row.l3_gradnorm = s * grid.cell_measure();
    }
    for (double r : radii) {
      const AnnulusAverages ref = smoothed_averages(u, r, center);
      row.excesses.push_back(tilt_excess(u, r, ref, center).value);
      row.classes.push_back(
          to_string(classify_time(u, Region::ball(center, r)).label));
    }
    table.append_row(row);
  }
  table.save(fs::path(out_dir) / "diagnostics.csv");
  std::cout << "wrote " << traj.size() << " snapshots and diagnostics.csv to "
            << out_dir << "\n";
  return 0;
}

void emit(std::ostream& os, const std::string& quantity,
          const std::string& component, double value) {
  os << quantity << ',' << component << ',' << format_double17(value) << "\n";
}

void emit_check(std::ostream& os, const InequalityCheck& chk) {
  emit(os, chk.name, "lhs", chk.lhs);
  for (const auto& [k, v] : chk.rhs_components) emit(os, chk.name, k, v);
  emit(os, chk.name, "ratio", chk.ratio());
}

int cmd_diagnose(const std::string& snap_path, const std::string& center_text,
                 double radius, bool all) {
  const Snapshot snap = read_snapshot(snap_path);
  const Field& u = snap.field;
  const Grid& g = u.grid();
  const double n = snap.n_exponent;
  const double eps = 1e-10 * u.max_abs();
  const Vec2 center = parse_center(center_text, 0.5 * g.length());
  const double r = radius > 0.0 ? radius : g.length() / 8.0;

  try {
    std::ostringstream os;
    os << "quantity,component,value\n";
    emit(os, "snapshot", "t", u.time());
    emit(os, "snapshot", "n_exponent", n);
    emit(os, "mass", "", integrate(u, Region::whole()));
    emit(os, "energy", "ball", energy(u, Region::ball(center, r)));
    emit(os, "dissipation", "ball", dissipation(u, n, Region::ball(center, r), eps));

    const TimeClass cls = classify_time(u, Region::ball(center, r));
    emit(os, "class", "sup", cls.sup);
    emit(os, "class", "inf", cls.inf);
    os << "class,label," << to_string(cls.label) << "\n";

    const AnnulusAverages avg = smoothed_averages(u, r, center);
    emit(os, "averages", "b_xx", avg.second_deriv.xx);
    emit(os, "averages", "b_xy", avg.second_deriv.xy);
    emit(os, "averages", "b_yy", avg.second_deriv.yy);
    emit(os, "averages", "c_x", avg.first_deriv.x);
    emit(os, "averages", "c_y", avg.first_deriv.y);
    emit(os, "averages", "asymmetry_defect", avg.asymmetry_defect);
    emit(os, "tilt_excess", "value", tilt_excess(u, r, avg, center).value);

    if (all) {
      const double alpha = default_entropy_alpha(n);
      emit(os, "entropy", "value", entropy(u, alpha, eps));
      emit(os, "entropy", "rhs", entropy_dissipation_rhs(u, n, alpha, eps));

      const CutoffProfile ball_cut(CutoffKind::BallCutoff);
      const double r_bg = std::min(r, g.length() / 8.0);
      emit_check(os, bernis_gruen_sides(u, n, ball_cut, center, r_bg, eps));
      const double r_half = std::min(r, g.length() / 8.0);
      for (const InequalityCheck& chk : poincare_checks(u, r_half, center))
        emit_check(os, chk);
      emit_check(os, third_derivative_check(u, r_half, center));
      emit_check(os, second_derivative_check(u, n, ball_cut, center, r_bg, eps));
      try {
        emit_check(os, morrey_sup_check(u, n, r_half, 0.5, center, eps));
      } catch (const NotBadTimeError&) {
        os << "morrey_sup,skipped,NotBadTime\n";
      }
      const auto [b_rate, c_rate] = averages_rate(u, n, r, center, eps);
      emit(os, "averages_rate", "b_xx", b_rate.xx);
      emit(os, "averages_rate", "b_xy", b_rate.xy);
      emit(os, "averages_rate", "b_yy", b_rate.yy);
      emit(os, "averages_rate", "c_x", c_rate.x);
      emit(os, "averages_rate", "c_y", c_rate.y);
    }
    std::cout << os.str();
  } catch (const EmptyRegionError& e) {
    std::cerr << "region error: " << e.what()
              << " (minimum resolvable radius is 8h = " << 8.0 * g.spacing()
              << ")\n";
    return kExitRegion;
  } catch (const RampUnresolvedError& e) {
    std::cerr << "region error: " << e.what() << "\n";
    return kExitRegion;
  } catch (const ConstraintViolationError& e) {
    std::cerr << "region error: " << e.what() << "\n";
    return kExitRegion;
  }
  return 0;
}

int cmd_sweep(const std::string& traj_dir, const std::string& center_text,
              double rmin, double rmax, double lambda,
              const std::string& out_csv) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(traj_dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("snap_", 0) == 0 && entry.path().extension() == ".tflm")
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    std::cerr << "no snap_*.tflm files in " << traj_dir << "\n";
    return kExitRegion;
  }

  std::vector<Snapshot> snaps;
  snaps.reserve(files.size());
  for (const fs::path& p : files) snaps.push_back(read_snapshot(p));
  const Grid& g = snaps.front().field.grid();
  const Vec2 center = parse_center(center_text, 0.5 * g.length());

  std::vector<std::vector<SweepRow>> results(snaps.size());
  try {
    const RadiusSchedule sched(rmin, rmax, lambda, g);
    const auto radii = sched.radii();

    auto process = [&](std::size_t i) {
      const Field& u = snaps[i].field;
      std::vector<SweepRow> rows;
      for (int k = 0; k < static_cast<int>(radii.size()); ++k) {
        const AnnulusAverages ref = smoothed_averages(u, radii[k], center);
        double excess = tilt_excess(u, radii[k], ref, center).value;
        // Excess below the reference's own kernel-quadrature floor counts as
        // perfect regularity. The floor scales with the ramp resolution
        // (r / 3h cells), with an absolute roundoff backstop.
        const double ramp_cells = radii[k] / (3.0 * g.spacing());
        const double floor_rel = std::max(std::pow(ramp_cells, -6.0), 1e-13);
        const double scale = energy(u, Region::ball(center, radii[k]));
        if (excess <= floor_rel * scale) excess = 0.0;
        const TimeClass cls = classify_time(u, Region::ball(center, radii[k]));
        rows.push_back({u.time(), k, radii[k], excess, cls.label});
      }
      results[i] = std::move(rows);
    };

    const int threads = std::min<int>(thread_cap(), static_cast<int>(snaps.size()));
    if (threads <= 1) {
      for (std::size_t i = 0; i < snaps.size(); ++i) process(i);
    } else {
      std::vector<std::thread> pool;
      std::atomic<std::size_t> next{0};
      for (int t = 0; t < threads; ++t)
        pool.emplace_back([&]() {
          for (std::size_t i = next.fetch_add(1); i < snaps.size();
               i = next.fetch_add(1))
            process(i);
        });
      for (std::thread& t : pool) t.join();
    }
  } catch (const ConstraintViolationError& e) {
    std::cerr << "schedule error: " << e.what() << "\n";
    return kExitRegion;
  } catch (const RampUnresolvedError& e) {
    std::cerr << "schedule error: " << e.what() << "\n";
    return kExitRegion;
  }

  std::ofstream os(out_csv, std::ios::binary | std::ios::trunc);
  if (!os) {
    std::cerr << "cannot open " << out_csv << " for writing\n";
    return 1;
  }
  os << "t,level,r,excess,class,note\n";
  for (const auto& rows : results) {
    const bool allzero =
        std::all_of(rows.begin(), rows.end(),
                    [](const SweepRow& r) { return r.excess == 0.0; });
    for (const SweepRow& row : rows) {
      os << format_double17(row.t) << ',' << row.level << ','
         << format_double17(row.radius) << ',' << format_double17(row.excess)
         << ',' << to_string(row.label) << ','
         << (allzero ? "super-polynomial" : "") << "\n";
    }
  }
  std::cout << "wrote " << out_csv << "\n";
  return 0;
}

int cmd_fit(const std::string& csv_path, double initial_p) {
  std::ifstream is(csv_path);
  if (!is) {
    std::cerr << "cannot open " << csv_path << "\n";
    return 1;
  }
  std::string line;
  std::getline(is, line);  // header
  struct Entry {
    double t, r, excess;
    bool marked_zero;
  };
  std::vector<Entry> entries;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() < 4) continue;
    const bool marked = cells.size() >= 6 && cells[5] == "super-polynomial";
    entries.push_back(
        {std::stod(cells[0]), std::stod(cells[2]), std::stod(cells[3]), marked});
  }
  if (entries.empty()) {
    std::cerr << "no data rows in " << csv_path << "\n";
    return kExitInsufficient;
  }
  double t_max = entries.front().t;
  for (const Entry& e : entries) t_max = std::max(t_max, e.t);
  std::vector<std::pair<double, double>> points;
  for (const Entry& e : entries)
    if (e.t == t_max) points.push_back({e.r, e.marked_zero ? 0.0 : e.excess});

  try {
    const DecayOutcome out = fit_decay(
        points, initial_p > 0.0 ? std::optional<double>(initial_p) : std::nullopt);
    if (out.super_polynomial) {
      std::cout << "super-polynomial decay: all excess levels are zero; "
                   "no finite exponent\n";
      return 0;
    }
    std::cout << "beta = " << format_double17(out.fit.exponent) << "\n"
              << "intercept = " << format_double17(out.fit.intercept) << "\n"
              << "residual_rms = " << format_double17(out.fit.residual_rms) << "\n"
              << "sigma_x = " << format_double17(out.fit.exponent / 2.0) << "\n"
              << "levels_used = " << out.fit.points.size() << "\n"
              << "zero_levels_excluded = " << out.fit.zero_levels << "\n";
    if (out.fit.initial_data_exponent) {
      const double gamma = *out.fit.initial_data_exponent;
      std::cout << "gamma = " << format_double17(gamma) << "\n"
                << "beta_effective = "
                << format_double17(std::min(out.fit.exponent, gamma)) << "\n";
    }
    return 0;
  } catch (const InsufficientPointsError& e) {
    std::cerr << e.what() << "\n";
    return kExitInsufficient;
  }
}

int cmd_validate() {
  // resolve TMPDIR by hand so an unusable value surfaces as a failed check
  // rather than an upfront throw
  const char* tmp = std::getenv("TMPDIR");
  const fs::path scratch = fs::path(tmp && *tmp ? tmp : "/tmp") /
                           ("tfilm_validate_" + std::to_string(::getpid()));
  const auto results = run_selfchecks(scratch.string());
  bool all = true;
  for (const CheckResult& r : results) {
    std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.detail
              << "\n";
    all = all && r.pass;
  }
  std::error_code ec;
  fs::remove_all(scratch, ec);
  if (!all) {
    std::cout << "validation failed\n";
    return 1;
  }
  std::cout << "all checks passed\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"thin-film equation lab"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  CLI::App* run_cmd = app.add_subcommand("run", "simulate and write snapshots + diagnostics");
  run_cmd->add_option("--config", config_path, "experiment config file")->required();
  run_cmd->add_option("--out", out_dir, "output directory")->required();

  std::string snap_path, center_text;
  double radius = -1.0;
  bool all = false;
  CLI::App* diag_cmd = app.add_subcommand("diagnose", "functionals of one snapshot");
  diag_cmd->add_option("--snapshot", snap_path, "snapshot file")->required();
  diag_cmd->add_option("--center", center_text, "ball center x,y");
  diag_cmd->add_option("--radius", radius, "ball radius");
  diag_cmd->add_flag("--all", all, "include every inequality check");

  std::string traj_dir, sweep_center, sweep_out;
  double rmin = 0.0, rmax = 0.0, lambda = 2.0;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "dyadic excess sweep over a trajectory");
  sweep_cmd->add_option("--traj", traj_dir, "trajectory directory")->required();
  sweep_cmd->add_option("--center", sweep_center, "center x,y")->required();
  sweep_cmd->add_option("--rmin", rmin, "smallest radius")->required();
  sweep_cmd->add_option("--rmax", rmax, "largest radius")->required();
  sweep_cmd->add_option("--lambda", lambda, "dyadic ratio");
  sweep_cmd->add_option("--out", sweep_out, "output CSV")->required();

  std::string fit_csv;
  double initial_p = -1.0;
  CLI::App* fit_cmd = app.add_subcommand("fit", "decay exponent from a sweep CSV");
  fit_cmd->add_option("--csv", fit_csv, "sweep CSV")->required();
  fit_cmd->add_option("--p", initial_p, "initial-data integrability exponent");

  CLI::App* validate_cmd = app.add_subcommand("validate", "run built-in check suites");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return cmd_run(config_path, out_dir);
    if (diag_cmd->parsed()) return cmd_diagnose(snap_path, center_text, radius, all);
    if (sweep_cmd->parsed())
      return cmd_sweep(traj_dir, sweep_center, rmin, rmax, lambda, sweep_out);
    if (fit_cmd->parsed()) return cmd_fit(fit_csv, initial_p);
    if (validate_cmd->parsed()) return cmd_validate();
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
