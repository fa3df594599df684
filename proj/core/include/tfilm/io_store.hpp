#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "tfilm/grid.hpp"

namespace tfilm {

/// Binary snapshot layout (all little-endian):
///   magic "TFLM" (4 bytes) | version u32 = 1 | nx u32 | ny u32 |
///   h f64 | t f64 | n_exponent f64 | payload nx*ny f64, row-major.
struct Snapshot {
  Field field;
  double n_exponent = 0.0;
};

void write_snapshot(const Field& f, double n_exponent,
                    const std::filesystem::path& path);
Snapshot read_snapshot(const std::filesystem::path& path);

/// Formats a double with 17 significant digits (round-trip exact), C locale.
std::string format_double17(double v);

/// Fixed-schema per-snapshot diagnostics CSV. One row per snapshot; the
/// class_r{k}/excess_r{k} column pairs follow the radius schedule levels.
class DiagnosticsTable {
 public:
  explicit DiagnosticsTable(std::size_t schedule_levels);

  struct Row {
    double t = 0.0;
    double mass = 0.0;
    double energy = 0.0;
    double dissipation = 0.0;
    double entropy_a1 = 0.0;
    double entropy_rhs_a1 = 0.0;
    double bg_lhs = 0.0;
    double bg_rhs_diss = 0.0;
    double bg_rhs_cut = 0.0;
    double l3_gradnorm = 0.0;
    std::vector<std::string> classes;  // one per schedule level
    std::vector<double> excesses;      // one per schedule level
  };

  void append_row(const Row& row);
  const std::string& header() const { return header_; }
  std::string str() const;
  void save(const std::filesystem::path& path) const;

 private:
  std::size_t levels_;
  std::string header_;
  std::vector<std::string> rows_;
};

/// Plain-text key=value experiment configuration. Unknown keys are rejected
/// and all numeric values are validated at load.
struct ExperimentConfig {
  int nx = 128;
  double domain_size = 1.0;
  double n_exponent = 2.0;
  double dt_safety = 0.1;
  double t_end = 0.0;
  double snapshot_every = 0.0;
  std::string scheme = "explicit";  // explicit | semiimplicit
  std::string init = "constant";    // constant|mode|droplet|random|travelwave1d
  double init_amplitude = 1.0;
  double init_center_x = -1.0;  // < 0 resolves to the domain center
  double init_center_y = -1.0;
  double init_width = -1.0;     // < 0 resolves to L/8
  std::uint64_t seed = 0;
  double eps_floor = 1e-10;     // in units of max(u0)
  double sweep_r_min = -1.0;    // < 0 resolves to max(8h, r_max/16)
  double sweep_r_max = -1.0;    // < 0 resolves to L/4
  double sweep_lambda = 2.0;
  bool strict_regime = true;
  double initial_p = -1.0;      // optional; > 2 when present

  bool has_initial_p() const { return initial_p > 0.0; }
  double resolved_center_x() const {
    return init_center_x >= 0.0 ? init_center_x : 0.5 * domain_size;
  }
  double resolved_center_y() const {
    return init_center_y >= 0.0 ? init_center_y : 0.5 * domain_size;
  }
  double resolved_width() const {
    return init_width > 0.0 ? init_width : domain_size / 8.0;
  }
  double resolved_r_max() const {
    return sweep_r_max > 0.0 ? sweep_r_max : domain_size / 4.0;
  }
  double resolved_r_min() const {
    if (sweep_r_min > 0.0) return sweep_r_min;
    const double h = domain_size / nx;
    return std::max(8.0 * h, resolved_r_max() / 16.0);
  }
};

ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& text);

}  // namespace tfilm
