#pragma once

#include <cstdint>
#include <vector>

#include "tfilm/grid.hpp"

namespace tfilm {

/// Lower end of the admissible mobility-exponent interval, 2 - sqrt(4/5).
double regime_lower_bound();

/// Degenerate mobility u^n with a small regularization floor.
struct MobilityModel {
  double exponent = 2.0;
  double eps_floor = 1e-10;      // absolute floor (callers scale by max u0)
  bool enforce_regime = true;    // restrict exponent to (2 - sqrt(4/5), 3)

  MobilityModel() = default;
  MobilityModel(double n, double eps, bool strict = true);
};

enum class Scheme { Explicit, SemiImplicit };

struct SolverConfig {
  MobilityModel mobility;
  double dt_safety = 0.1;        // in (0, 1]
  double t_end = 0.0;
  double snapshot_every = 0.0;   // in (0, t_end]
  Scheme scheme = Scheme::Explicit;
  bool record_steps = true;      // per-step (dt, mass, energy) bookkeeping

  void validate() const;
};

struct SnapshotRecord {
  double t = 0.0;
  double mass = 0.0;
  double energy = 0.0;
  double dissipation = 0.0;  // whole-domain u^n |grad lap u|^2
};

struct StepRecord {
  double t = 0.0;   // time after the step
  double dt = 0.0;
  double mass = 0.0;
  double energy = 0.0;
};

/// Snapshot sequence at strictly increasing times; the first snapshot at
/// t = 0 equals the initial condition. Immutable once produced.
struct Trajectory {
  std::vector<Field> fields;
  std::vector<SnapshotRecord> records;
  std::vector<StepRecord> steps;
  SolverConfig config;

  std::size_t size() const { return fields.size(); }
  /// Index of the snapshot closest to time t (throws if none within tol).
  std::size_t snapshot_at(double t, double tol = -1.0) const;
};

/// Face mobility: arithmetic mean, clamped at zero, then the power; floored
/// at eps_floor^n when either neighbor is at or below eps_floor.
double face_mobility(double uL, double uR, const MobilityModel& m);

/// One explicit (or frozen-mobility semi-implicit) step in conservative flux
/// form. Returns the updated field and the dt actually used.
std::pair<Field, double> step(const Field& u, const SolverConfig& cfg);

/// Time-step until t_end, recording snapshots on the snapshot_every lattice
/// (nearest completed step). Throws NonFiniteError on NaN/Inf, DivergedError
/// when the cumulative energy increase exceeds 1e-3 * E(0).
Trajectory run(const Field& u0, const SolverConfig& cfg);

// ---- initial conditions -----------------------------------------------------

/// u = 1 + amplitude * sin(2 pi x / L).
Field make_mode(const Grid& g, double amplitude);

/// Compact smooth droplet: amplitude * cutoff((|x-c|)/width)^2, supported in
/// |x-c| <= 2*width.
Field make_droplet(const Grid& g, Vec2 center, double width, double amplitude);

/// Strictly positive seeded random field: 1 + amplitude * (low-mode noise
/// normalized to unit max amplitude). Deterministic for a given seed.
Field make_random(const Grid& g, std::uint64_t seed, double amplitude);

/// 1D receding-front profile: exact (x - x0)_+^(3/n) ramp over `width`, then
/// a C^3 blend to a plateau and a smooth descent back to zero before the
/// periodic seam.
Field make_travelwave1d(const Grid& g, double front_x, double width, double n);

}  // namespace tfilm
