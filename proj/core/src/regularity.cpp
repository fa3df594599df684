#include "tfilm/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "tfilm/stencil.hpp"

namespace tfilm {

RadiusSchedule::RadiusSchedule(double r_min_, double r_max_, double ratio_,
                               const Grid& g)
    : r_min(r_min_), r_max(r_max_), ratio(ratio_) {
  if (!(ratio > 1.0))
    throw ConstraintViolationError("sweep.lambda", "dyadic ratio must exceed 1");
  if (!(r_min >= 8.0 * g.spacing()))
    throw ConstraintViolationError("sweep.r_min",
                                   "must be at least 8 cells (8h) for resolvability");
  if (!(r_max <= g.length() / 4.0))
    throw ConstraintViolationError("sweep.r_max", "must not exceed L/4");
  if (!(r_min < r_max))
    throw ConstraintViolationError("sweep.r_min", "must be below sweep.r_max");
  levels_ = static_cast<int>(std::floor(std::log(r_max / r_min) / std::log(ratio) + 1e-12));
  if (levels_ < 3)
    throw ConstraintViolationError(
        "sweep.r_min", "schedule needs at least 3 dyadic levels between r_min and r_max");
}

std::vector<double> RadiusSchedule::radii() const {
  std::vector<double> out;
  double r = r_max;
  for (int k = 0; k <= levels_; ++k) {
    out.push_back(r);
    r /= ratio;
  }
  return out;
}

std::vector<SweepRow> excess_sweep(const Trajectory& traj, Vec2 center,
                                   const RadiusSchedule& sched, double t) {
  const std::size_t si = traj.snapshot_at(t);
  const Field& u = traj.fields[si];
  std::vector<SweepRow> rows;
  const std::vector<double> radii = sched.radii();
  for (int k = 0; k < static_cast<int>(radii.size()); ++k) {
    const double r = radii[k];
    const AnnulusAverages ref = smoothed_averages(u, r, center);
    const TiltExcessReport ex = tilt_excess(u, r, ref, center);
    const TimeClass cls = classify_time(u, Region::ball(center, r));
    rows.push_back({traj.records[si].t, k, r, ex.value, cls.label});
  }
  return rows;
}

DecayOutcome fit_decay(const std::vector<std::pair<double, double>>& points,
                       std::optional<double> initial_p) {
  DecayOutcome out;
  std::vector<std::pair<double, double>> kept;
  for (const auto& [r, e] : points) {
    if (!(r > 0.0))
      throw ConstraintViolationError("r", "fit_decay radii must be positive");
    if (e > 0.0)
      kept.push_back({r, e});
    else
      ++out.fit.zero_levels;
  }

  if (kept.empty() && out.fit.zero_levels > 0) {
    out.super_polynomial = true;
    return out;
  }
  if (kept.size() < 3)
    throw InsufficientPointsError(
        "fit_decay needs at least 3 positive-excess levels, got " +
        std::to_string(kept.size()));

  // centered least squares: exact zero slope on constant data
  const double n = static_cast<double>(kept.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [r, e] : kept) {
    mx += std::log(r);
    my += std::log(e);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [r, e] : kept) {
    const double dx = std::log(r) - mx, dy = std::log(e) - my;
    sxx += dx * dx;
    sxy += dx * dy;
  }
  out.fit.exponent = sxy / sxx;
  out.fit.intercept = my - out.fit.exponent * mx;

  double ss = 0.0;
  for (const auto& [r, e] : kept) {
    const double res = std::log(e) - (out.fit.intercept + out.fit.exponent * std::log(r));
    ss += res * res;
  }
  out.fit.residual_rms = std::sqrt(ss / n);
  out.fit.points = std::move(kept);

  if (initial_p) {
    if (!(*initial_p > 2.0))
      throw ConstraintViolationError("initial_p", "must exceed 2");
    out.fit.initial_data_exponent = 2.0 * (*initial_p - 2.0) / *initial_p;
  }
  return out;
}

std::vector<InequalityCheck> telescoping_check(const Trajectory& traj, double t,
                                               const RadiusSchedule& sched,
                                               Vec2 center) {
  const std::size_t si = traj.snapshot_at(t);
  const Field& u = traj.fields[si];
  const std::vector<double> radii = sched.radii();
  const double cap = u.grid().length() / 4.0;

  std::vector<AnnulusAverages> avgs(radii.size());
  for (std::size_t k = 0; k < radii.size(); ++k)
    avgs[k] = smoothed_averages(u, radii[k], center);

  std::vector<InequalityCheck> out;
  for (std::size_t k = 0; k + 1 < radii.size(); ++k) {
    const double r = radii[k];
    if (2.0 * r > cap) continue;  // enclosing tilt ball must stay within L/4
    const double excess = tilt_excess(u, 2.0 * r, avgs[k], center).value;
    const SymMat2 db = avgs[k].second_deriv - avgs[k + 1].second_deriv;
    const Vec2 dc = avgs[k].first_deriv - avgs[k + 1].first_deriv;
    const std::string lvl = std::to_string(k);
    out.push_back({"telescoping_b_L" + lvl,
                   frob2(db),
                   {{"excess_over_r4", excess / (r * r * r * r)}}});
    out.push_back({"telescoping_c_L" + lvl,
                   norm2(dc),
                   {{"excess_over_r2", excess / (r * r)}}});
  }
  return out;
}

namespace {

struct PairSample {
  std::vector<double> distances;  // physical separations
  std::vector<double> max_diff;   // max |u(x1)-u(x2)| at that separation
  std::size_t pair_count = 0;
};

PairSample collect_pairs(const Field& u) {
  const Grid& g = u.grid();
  const int nx = g.nx();
  const double h = g.spacing();
  const double d_lo = 2.0 * h, d_hi = g.length() / 4.0;

  struct Offset {
    int ox, oy;
    double dist;
  };
  std::vector<Offset> offsets;
  std::set<std::pair<int, int>> seen;
  const std::vector<std::pair<int, int>> dirs =
      g.one_dimensional()
          ? std::vector<std::pair<int, int>>{{1, 0}}
          : std::vector<std::pair<int, int>>{
                {1, 0}, {0, 1}, {1, 1}, {1, -1}, {2, 1}, {1, 2}, {2, -1}, {1, -2}};
  for (const auto& [dx, dy] : dirs) {
    const double step = std::sqrt(static_cast<double>(dx * dx + dy * dy));
    double target = 2.0;
    while (true) {
      const int m = std::max(1, static_cast<int>(std::lround(target / step)));
      const double dist = m * step * h;
      if (dist > d_hi) break;
      if (dist >= d_lo && seen.insert({m * dx, m * dy}).second)
        offsets.push_back({m * dx, m * dy, dist});
      target *= 1.25;
    }
  }
  std::sort(offsets.begin(), offsets.end(),
            [](const Offset& a, const Offset& b) { return a.dist < b.dist; });

  const std::size_t cells = g.cell_count();
  const std::size_t budget = 1000000;
  const std::size_t stride =
      std::max<std::size_t>(1, (cells * offsets.size() + budget - 1) / budget);

  PairSample s;
  s.distances.reserve(offsets.size());
  s.max_diff.assign(offsets.size(), 0.0);
  for (const Offset& o : offsets) s.distances.push_back(o.dist);

  const std::vector<double>& v = u.values();
  for (std::size_t base = 0; base < cells; base += stride) {
    const int i = static_cast<int>(base % nx);
    const int j = static_cast<int>(base / nx);
    for (std::size_t q = 0; q < offsets.size(); ++q) {
      const std::size_t partner = g.index(i + offsets[q].ox, j + offsets[q].oy);
      const double d = std::abs(v[base] - v[partner]);
      if (d > s.max_diff[q]) s.max_diff[q] = d;
      ++s.pair_count;
    }
  }
  return s;
}

}  // namespace

HolderEstimate spatial_holder(const Field& u,
                              const std::vector<double>& exponent_candidates) {
  if (exponent_candidates.empty())
    throw ConstraintViolationError("exponent_grid", "needs at least one candidate");
  std::vector<double> cand = exponent_candidates;
  std::sort(cand.begin(), cand.end());
  if (!(cand.front() > 0.0 && cand.back() <= 1.0))
    throw ConstraintViolationError("exponent_grid", "candidates must lie in (0, 1]");

  const Grid& g = u.grid();
  const double diam = g.one_dimensional()
                          ? 0.5 * g.length()
                          : 0.5 * std::sqrt(2.0) * g.length();
  const PairSample s = collect_pairs(u);

  auto seminorm = [&](double sigma) {
    double best = 0.0;
    for (std::size_t q = 0; q < s.distances.size(); ++q) {
      const double dn = s.distances[q] / diam;  // <= 1 by construction
      best = std::max(best, s.max_diff[q] / std::pow(dn, sigma));
    }
    return best;
  };

  // A candidate is stable when (a) the seminorm has not blown up against the
  // half exponent and (b) its growth from the previous candidate stays below
  // the midpoint of the two sampling-limited log-slopes log(1/d_min) and
  // log(1/d_max); beyond the true exponent the curve grows at the d_min slope.
  const double d_min_n = s.distances.front() / diam;
  const double d_max_n = s.distances.back() / diam;
  const double slope_threshold =
      0.5 * (std::log(1.0 / d_min_n) + std::log(1.0 / d_max_n));

  HolderEstimate out;
  out.pair_count = s.pair_count;
  double sigma_x = cand.front();
  double prev_sem = -1.0, prev_sigma = 0.0;
  bool stable = true;
  for (double sigma : cand) {
    const double sem = seminorm(sigma);
    out.curve.push_back({sigma, sem});
    if (stable) {
      bool ok = true;
      const double half = seminorm(0.5 * sigma);
      if (half > 0.0 && sem / half > 10.0) ok = false;
      if (prev_sem > 0.0 && sem > 0.0) {
        const double growth = std::log(sem / prev_sem) / (sigma - prev_sigma);
        if (growth > slope_threshold) ok = false;
      }
      if (ok)
        sigma_x = sigma;
      else
        stable = false;
    }
    prev_sem = sem;
    prev_sigma = sigma;
  }

  out.spatial_exponent = sigma_x;
  out.seminorm = seminorm(sigma_x);
  const double d = static_cast<double>(g.dim());
  out.temporal_exponent = sigma_x / (2.0 * (sigma_x + d + 1.0));
  return out;
}

TemporalHolderReport temporal_holder(const Trajectory& traj, Vec2 point,
                                     const std::vector<double>& r_grid) {
  if (traj.size() < 3)
    throw InsufficientSnapshotsError("temporal_holder needs at least 3 snapshots");
  const Grid& g = traj.fields.front().grid();
  const double h = g.spacing();
  const int ci = g.wrap_x(static_cast<int>(std::floor(point.x / h)));
  const int cj = g.one_dimensional()
                     ? 0
                     : g.wrap_y(static_cast<int>(std::floor(point.y / h)));

  std::vector<double> values, times;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    values.push_back(traj.fields[i].at(ci, cj));
    times.push_back(traj.records[i].t);
  }

  TemporalHolderReport rep;
  double scale = 0.0;
  for (double v : values) scale = std::max(scale, std::abs(v));

  // Upper envelope of |du| per dyadic dt bin, then a log-log slope.
  struct Bin {
    double dt = 0.0, diff = 0.0;
  };
  std::vector<Bin> bins;
  for (std::size_t a = 0; a < values.size(); ++a)
    for (std::size_t b = a + 1; b < values.size(); ++b) {
      const double dt = times[b] - times[a];
      if (!(dt > 0.0)) continue;
      const double d = std::abs(values[b] - values[a]);
      ++rep.pair_count;
      const double key = std::floor(std::log2(dt));
      bool found = false;
      for (Bin& bin : bins)
        if (std::floor(std::log2(bin.dt)) == key) {
          if (d > bin.diff) bin.diff = d;
          bin.dt = std::max(bin.dt, dt);
          found = true;
          break;
        }
      if (!found) bins.push_back({dt, d});
    }

  std::vector<std::pair<double, double>> pts;
  for (const Bin& b : bins)
    if (b.diff > 1e-15 * std::max(scale, 1.0)) pts.push_back({b.dt, b.diff});

  if (pts.size() < 2) {
    rep.empirical_exponent = 1.0;  // differences vanish: maximal regularity
    rep.max_quotient = 0.0;
  } else {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [dt, d] : pts) {
      const double x = std::log(dt), y = std::log(d);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double n = static_cast<double>(pts.size());
    rep.empirical_exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    double q = 0.0;
    for (const auto& [dt, d] : pts)
      q = std::max(q, d / std::pow(dt, rep.empirical_exponent));
    rep.max_quotient = q;
  }

  const std::vector<double> default_grid = {0.1, 0.2, 0.3, 0.4, 0.5,
                                            0.6, 0.7, 0.8, 0.9, 1.0};
  const HolderEstimate sp = spatial_holder(traj.fields.back(), default_grid);
  rep.spatial_exponent_used = sp.spatial_exponent;
  const double d = static_cast<double>(g.dim());
  rep.theoretical_exponent =
      sp.spatial_exponent / (2.0 * (sp.spatial_exponent + d + 1.0));

  const CutoffProfile cut(CutoffKind::BallCutoff);
  const Vec2 center{g.x_center(ci), g.y_center(cj)};
  for (double r : r_grid) {
    const Region ball = Region::ball(center, std::min(2.0 * r, g.length() / 4.0));
    for (std::size_t i = 0; i < traj.size(); ++i) {
      const Field& u = traj.fields[i];
      double wsum = 0.0, vsum = 0.0;
      detail::for_each_region_cell(g, ball, [&](std::size_t k, Vec2 rel) {
        const double w = cut.value_at(rel, r);
        wsum += w;
        vsum += w * u[k];
      });
      rep.samples.push_back(
          {times[i], r, wsum > 0.0 ? vsum / wsum : 0.0, values[i]});
    }
  }
  return rep;
}

RegimeDecision regime_gate(double n, bool strict) {
  RegimeDecision d;
  d.lower = regime_lower_bound();
  d.upper = 3.0;
  d.accepted = n > d.lower && n < d.upper;
  if (d.accepted) {
    d.message = "mobility exponent accepted";
  } else {
    d.message = "mobility exponent " + std::to_string(n) +
                " outside the open interval (1.1055728090000841, 3)";
    if (strict) throw RegimeViolationError(d.message);
  }
  return d;
}

}  // namespace tfilm
