#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tfilm/diagnostics.hpp"
#include "tfilm/grid.hpp"
#include "tfilm/solver.hpp"

namespace tfilm {

/// Geometric radius ladder r_k = r_max / ratio^k, k = 0..levels.
struct RadiusSchedule {
  double r_min = 0.0;
  double r_max = 0.0;
  double ratio = 2.0;

  RadiusSchedule(double r_min_, double r_max_, double ratio_, const Grid& g);

  int levels() const { return levels_; }          // floor(log_ratio(r_max/r_min))
  std::vector<double> radii() const;              // levels()+1 values, descending

 private:
  int levels_ = 0;
};

struct DecayFit {
  double exponent = 0.0;       // fitted slope of log E against log r
  double intercept = 0.0;
  double residual_rms = 0.0;
  std::vector<std::pair<double, double>> points;  // (r, E) actually fitted
  std::size_t zero_levels = 0;                    // excluded zero-excess levels
  std::optional<double> initial_data_exponent;    // 2(p-2)/p when p supplied
};

/// fit_decay outcome: either a fit, or the distinguished all-zero-excess case
/// (super-polynomial decay; no finite exponent is reported).
struct DecayOutcome {
  bool super_polynomial = false;
  DecayFit fit;
};

struct SweepRow {
  double t = 0.0;
  int level = 0;
  double radius = 0.0;
  double excess = 0.0;
  TimeLabel label = TimeLabel::Good;
};

struct HolderEstimate {
  double spatial_exponent = 0.0;    // sigma_x
  double temporal_exponent = 0.0;   // sigma_t
  double seminorm = 0.0;
  std::size_t pair_count = 0;
  std::vector<std::pair<double, double>> curve;  // (sigma, seminorm)
};

struct MollifiedSample {
  double t = 0.0;
  double r = 0.0;
  double smoothed = 0.0;   // unit-mass ball-kernel average around the point
  double center_value = 0.0;
};

struct TemporalHolderReport {
  double empirical_exponent = 0.0;
  double theoretical_exponent = 0.0;  // sigma_x / (2 (sigma_x + d + 1))
  double spatial_exponent_used = 0.0;
  double max_quotient = 0.0;
  std::size_t pair_count = 0;
  std::vector<MollifiedSample> samples;
};

struct RegimeDecision {
  bool accepted = false;
  double lower = 0.0;
  double upper = 3.0;
  std::string message;
};

/// Per-level tilt excess at reference radius r_k plus the classification of
/// (t, B_{r_k}).
std::vector<SweepRow> excess_sweep(const Trajectory& traj, Vec2 center,
                                   const RadiusSchedule& sched, double t);

/// Least-squares line on (log r, log E) over the positive-excess points.
/// p > 2, when given, adds the initial-data exponent 2(p-2)/p.
DecayOutcome fit_decay(const std::vector<std::pair<double, double>>& points,
                       std::optional<double> initial_p = std::nullopt);

/// Consecutive-level average-drift bounds (squared average differences
/// against r^-4 / r^-2 times the enclosing tilt excess).
std::vector<InequalityCheck> telescoping_check(const Trajectory& traj, double t,
                                               const RadiusSchedule& sched,
                                               Vec2 center);

/// Max-quotient Holder seminorm over a deterministic strided pair sample with
/// separations in [2h, L/4], distances normalized to the domain diameter.
HolderEstimate spatial_holder(const Field& u,
                              const std::vector<double>& exponent_candidates);

/// Empirical temporal exponent at a point from max-quotient fitting of
/// snapshot differences, alongside the theoretical exponent derived from the
/// measured spatial one.
TemporalHolderReport temporal_holder(const Trajectory& traj, Vec2 point,
                                     const std::vector<double>& r_grid);

/// Accepts exactly the open interval (2 - sqrt(4/5), 3); throws
/// RegimeViolationError in strict mode.
RegimeDecision regime_gate(double n, bool strict);

}  // namespace tfilm
