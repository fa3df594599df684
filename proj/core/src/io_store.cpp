#include "tfilm/io_store.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <sstream>

#include "tfilm/solver.hpp"

namespace tfilm {

namespace {

constexpr char kMagic[4] = {'T', 'F', 'L', 'M'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "snapshot IO assumes a little-endian host");

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
bool get(std::istream& is, T& v) {
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  return static_cast<bool>(is);
}

}  // namespace

void write_snapshot(const Field& f, double n_exponent,
                    const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoFailureError("cannot open for writing: " + path.string());
  os.write(kMagic, 4);
  put<std::uint32_t>(os, kVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(f.grid().nx()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(f.grid().ny()));
  put<double>(os, f.grid().spacing());
  put<double>(os, f.time());
  put<double>(os, n_exponent);
  os.write(reinterpret_cast<const char*>(f.values().data()),
           static_cast<std::streamsize>(f.values().size() * sizeof(double)));
  os.flush();
  if (!os) throw IoFailureError("write failed: " + path.string());
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoFailureError("cannot open for reading: " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw BadMagicError("bad snapshot magic in " + path.string());
  std::uint32_t version = 0, nx = 0, ny = 0;
  double h = 0.0, t = 0.0, n_exponent = 0.0;
  if (!get(is, version)) throw TruncatedPayloadError("truncated header", 40, 4);
  if (version != kVersion)
    throw VersionUnsupportedError("unsupported snapshot version " +
                                  std::to_string(version));
  if (!get(is, nx) || !get(is, ny) || !get(is, h) || !get(is, t) ||
      !get(is, n_exponent))
    throw TruncatedPayloadError("truncated snapshot header", 40, 8);

  const std::size_t count = static_cast<std::size_t>(nx) * ny;
  std::vector<double> values(count);
  is.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  const std::size_t got = static_cast<std::size_t>(is.gcount());
  if (got != count * sizeof(double))
    throw TruncatedPayloadError(
        "truncated snapshot payload: expected " +
            std::to_string(count * sizeof(double)) + " bytes, got " +
            std::to_string(got),
        count * sizeof(double), got);

  Grid grid(static_cast<int>(nx), static_cast<int>(ny), h * nx);
  return Snapshot{Field(grid, std::move(values), t), n_exponent};
}

std::string format_double17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

DiagnosticsTable::DiagnosticsTable(std::size_t schedule_levels)
    : levels_(schedule_levels) {
  std::ostringstream h;
  h << "t,mass,energy,dissipation,entropy_a1,entropy_rhs_a1,"
       "bg_lhs,bg_rhs_diss,bg_rhs_cut,l3_gradnorm";
  for (std::size_t k = 0; k < levels_; ++k) h << ",class_r" << k;
  for (std::size_t k = 0; k < levels_; ++k) h << ",excess_r" << k;
  header_ = h.str();
}

void DiagnosticsTable::append_row(const Row& row) {
  if (row.classes.size() != levels_ || row.excesses.size() != levels_)
    throw SchemaMismatchError("diagnostics row level count does not match schedule");
  std::ostringstream os;
  os << format_double17(row.t) << ',' << format_double17(row.mass) << ','
     << format_double17(row.energy) << ',' << format_double17(row.dissipation)
     << ',' << format_double17(row.entropy_a1) << ','
     << format_double17(row.entropy_rhs_a1) << ',' << format_double17(row.bg_lhs)
     << ',' << format_double17(row.bg_rhs_diss) << ','
     << format_double17(row.bg_rhs_cut) << ','
     << format_double17(row.l3_gradnorm);
  for (const std::string& c : row.classes) os << ',' << c;
  for (double e : row.excesses) os << ',' << format_double17(e);
  rows_.push_back(os.str());
}

std::string DiagnosticsTable::str() const {
  std::string out = header_;
  out += '\n';
  for (const std::string& r : rows_) {
    out += r;
    out += '\n';
  }
  return out;
}

void DiagnosticsTable::save(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoFailureError("cannot open for writing: " + path.string());
  os << str();
  os.flush();
  if (!os) throw IoFailureError("write failed: " + path.string());
}

namespace {

struct KeyHandler {
  const char* key;
  void (*apply)(ExperimentConfig&, const std::string&, const std::string&);
};

double parse_number(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw SchemaMismatchError("config key '" + key + "': not a number: " + v);
  }
  if (pos != v.size())
    throw SchemaMismatchError("config key '" + key + "': not a number: " + v);
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw SchemaMismatchError("config key '" + key + "': expected true/false, got " + v);
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  std::istringstream is(text);
  std::string line;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };

  while (std::getline(is, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw SchemaMismatchError("config line is not key=value: " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));

    if (key == "nx") {
      c.nx = static_cast<int>(parse_number(key, val));
    } else if (key == "domain_size") {
      c.domain_size = parse_number(key, val);
    } else if (key == "n_exponent") {
      c.n_exponent = parse_number(key, val);
    } else if (key == "dt_safety") {
      c.dt_safety = parse_number(key, val);
    } else if (key == "t_end") {
      c.t_end = parse_number(key, val);
    } else if (key == "snapshot_every") {
      c.snapshot_every = parse_number(key, val);
    } else if (key == "scheme") {
      c.scheme = val;
    } else if (key == "init") {
      c.init = val;
    } else if (key == "init.amplitude") {
      c.init_amplitude = parse_number(key, val);
    } else if (key == "init.center") {
      const auto comma = val.find(',');
      if (comma == std::string::npos) {
        c.init_center_x = parse_number(key, val);
        c.init_center_y = c.init_center_x;
      } else {
        c.init_center_x = parse_number(key, trim(val.substr(0, comma)));
        c.init_center_y = parse_number(key, trim(val.substr(comma + 1)));
      }
    } else if (key == "init.width") {
      c.init_width = parse_number(key, val);
    } else if (key == "seed") {
      c.seed = static_cast<std::uint64_t>(parse_number(key, val));
    } else if (key == "eps_floor") {
      c.eps_floor = parse_number(key, val);
    } else if (key == "sweep.r_min") {
      c.sweep_r_min = parse_number(key, val);
    } else if (key == "sweep.r_max") {
      c.sweep_r_max = parse_number(key, val);
    } else if (key == "sweep.lambda") {
      c.sweep_lambda = parse_number(key, val);
    } else if (key == "strict_regime") {
      c.strict_regime = parse_bool(key, val);
    } else if (key == "initial_p") {
      c.initial_p = parse_number(key, val);
    } else {
      throw UnknownKeyError(key);
    }
  }

  // Validate against module invariants.
  if (c.nx < 8) throw ConstraintViolationError("nx", "must be at least 8");
  if (!(c.domain_size > 0.0))
    throw ConstraintViolationError("domain_size", "must be positive");
  if (c.strict_regime) {
    const double lo = regime_lower_bound();
    if (!(c.n_exponent > lo && c.n_exponent < 3.0))
      throw ConstraintViolationError(
          "n_exponent",
          "strict_regime requires n in the open interval (1.1055728090000841, 3)");
  } else if (!(c.n_exponent > 0.0)) {
    throw ConstraintViolationError("n_exponent", "must be positive");
  }
  if (!(c.dt_safety > 0.0 && c.dt_safety <= 1.0))
    throw ConstraintViolationError("dt_safety", "must lie in (0, 1]");
  if (!(c.t_end > 0.0))
    throw ConstraintViolationError("t_end", "must be positive");
  if (!(c.snapshot_every > 0.0 && c.snapshot_every <= c.t_end))
    throw ConstraintViolationError("snapshot_every", "must lie in (0, t_end]");
  if (c.scheme != "explicit" && c.scheme != "semiimplicit")
    throw ConstraintViolationError("scheme", "must be explicit or semiimplicit");
  if (c.init != "constant" && c.init != "mode" && c.init != "droplet" &&
      c.init != "random" && c.init != "travelwave1d")
    throw ConstraintViolationError(
        "init", "must be one of constant|mode|droplet|random|travelwave1d");
  if (!(c.eps_floor >= 0.0))
    throw ConstraintViolationError("eps_floor", "must be >= 0");
  if (!(c.sweep_lambda > 1.0))
    throw ConstraintViolationError("sweep.lambda", "must exceed 1");
  const double h = c.domain_size / c.nx;
  if (c.sweep_r_min > 0.0 && c.sweep_r_min < 8.0 * h)
    throw ConstraintViolationError("sweep.r_min", "must be at least 8h");
  if (c.sweep_r_max > 0.0 && c.sweep_r_max > c.domain_size / 4.0)
    throw ConstraintViolationError("sweep.r_max", "must not exceed L/4");
  if (c.sweep_r_min > 0.0 && c.sweep_r_max > 0.0 &&
      !(c.sweep_r_min < c.sweep_r_max))
    throw ConstraintViolationError("sweep.r_min", "must be below sweep.r_max");
  if (c.initial_p > 0.0 && !(c.initial_p > 2.0))
    throw ConstraintViolationError("initial_p", "must exceed 2");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoFailureError("cannot open config: " + path.string());
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_config(buf.str());
}

}  // namespace tfilm
