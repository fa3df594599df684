#pragma once

#include <string>
#include <vector>

#include "tfilm/solver.hpp"

namespace tfilm {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Receding-front position estimate for a traveling-wave profile: the wet
/// cells near the front follow u = (x - x_f)^(3/n), so x_f = x - u^(n/3) at
/// the first cell above `level`.
double front_position(const Field& u, double n, double level);

/// Traveling-wave translation speed from the local wave relation -u_t/u_x,
/// averaged over cells that start band_lo..band_hi cells behind the front,
/// across the first `intervals` snapshot intervals. Any truncation of the
/// profile eventually floods the wedge, so the window must stay early.
double traveling_wave_speed(const Trajectory& traj, double front_x,
                            double band_lo_cells, double band_hi_cells,
                            std::size_t intervals);

/// Built-in validation suites: operator convergence, traveling wave,
/// persistence round trip, and conservation/classifier invariants.
std::vector<CheckResult> run_selfchecks(const std::string& scratch_dir);

}  // namespace tfilm
