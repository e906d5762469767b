#pragma once

// CLI/config parsing and result serialization.  Config files are flat
// `key = value` text with `#` comments; CLI flags override file values.
// CSV output is UTF-8, '.' decimal separator, 17 significant digits, LF
// line endings, and byte-identical across runs with identical inputs.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "purisim/cartan.hpp"
#include "purisim/closed_dynamics.hpp"
#include "purisim/model.hpp"
#include "purisim/purity_search.hpp"

namespace purisim {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Command {
  simulate_closed,
  simulate_open,
  sweep,
  grid,
  kak_scan,
  probe_opt
};

inline const char* command_name(Command c) {
  switch (c) {
    case Command::simulate_closed: return "simulate-closed";
    case Command::simulate_open: return "simulate-open";
    case Command::sweep: return "sweep";
    case Command::grid: return "grid";
    case Command::kak_scan: return "kak-scan";
    default: return "probe-opt";
  }
}

/// Inclusive axis specification `start:stop:step` (endpoints included
/// within half a step).
struct AxisSpec {
  double start = 0.0;
  double stop = 0.0;
  double step = 1.0;

  std::vector<double> values() const {
    const auto n = static_cast<std::size_t>(
                       std::floor((stop - start) / step + 0.5)) +
                   1;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
      out[i] = start + static_cast<double>(i) * step;
    return out;
  }
};

struct RunConfig {
  Command command = Command::sweep;
  ModelParams params;
  SearchSpec spec;
  std::optional<AxisSpec> omega_p_axis;
  std::optional<AxisSpec> g_axis;
  AxisSpec times_axis{0.0, 20.0, 0.05};
  std::optional<std::vector<double>> g_series;  // sweep series override
  int sphere_theta = 20;
  int sphere_phi = 40;
  double dt_max = 0.0;  // 0 = automatic
  double kak_tol = 1e-8;
  std::string out;
  long seed = 0;

  std::vector<double> sweep_series() const {
    return g_series ? *g_series : std::vector<double>{params.g};
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& text, const std::string& ctx) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    throw ConfigError(ctx + ": malformed number '" + text + "'");
  return v;
}

inline long parse_long(const std::string& text, const std::string& ctx) {
  long v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ConfigError(ctx + ": malformed integer '" + text + "'");
  return v;
}

inline bool parse_bool(const std::string& text, const std::string& ctx) {
  if (text == "1" || text == "true") return true;
  if (text == "0" || text == "false") return false;
  throw ConfigError(ctx + ": malformed boolean '" + text + "'");
}

inline std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (const char ch : text) {
    if (ch == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  parts.push_back(cur);
  return parts;
}

inline AxisSpec parse_axis(const std::string& text, const std::string& ctx) {
  const auto parts = split(text, ':');
  if (parts.size() != 3)
    throw ConfigError(ctx + ": expected start:stop:step, got '" + text + "'");
  AxisSpec axis;
  axis.start = parse_double(trim(parts[0]), ctx);
  axis.stop = parse_double(trim(parts[1]), ctx);
  axis.step = parse_double(trim(parts[2]), ctx);
  if (!(axis.step > 0.0)) throw ConfigError(ctx + ": step must be positive");
  if (axis.start > axis.stop) throw ConfigError(ctx + ": start exceeds stop");
  return axis;
}

inline Bloch parse_triple(const std::string& text, const std::string& ctx) {
  const auto parts = split(text, ',');
  if (parts.size() != 3)
    throw ConfigError(ctx + ": expected x,y,z, got '" + text + "'");
  return Bloch(parse_double(trim(parts[0]), ctx),
               parse_double(trim(parts[1]), ctx),
               parse_double(trim(parts[2]), ctx));
}

inline Bloch parse_unit_axis(const std::string& text, const std::string& ctx) {
  Bloch v = parse_triple(text, ctx);
  const double n = v.norm();
  if (!(n > 0.0)) throw ConfigError(ctx + ": axis must be nonzero");
  return v / n;
}

/// Applies one key = value setting; shared by config files and CLI flags.
inline void apply_key(RunConfig& cfg, const std::string& key,
                      const std::string& value, const std::string& ctx) {
  if (key == "omega_s") {
    cfg.params.omega_s = parse_double(value, ctx);
  } else if (key == "omega_p") {
    if (value.find(':') != std::string::npos)
      cfg.omega_p_axis = parse_axis(value, ctx);
    else
      cfg.params.omega_p = parse_double(value, ctx);
  } else if (key == "g") {
    if (value.find(':') != std::string::npos) {
      cfg.g_axis = parse_axis(value, ctx);
    } else if (value.find(',') != std::string::npos) {
      std::vector<double> series;
      for (const auto& part : split(value, ','))
        series.push_back(parse_double(trim(part), ctx));
      cfg.g_series = series;
    } else {
      cfg.params.g = parse_double(value, ctx);
      cfg.g_series.reset();
    }
  } else if (key == "gamma_s") {
    cfg.params.gamma_s = parse_double(value, ctx);
  } else if (key == "gamma_p") {
    cfg.params.gamma_p = parse_double(value, ctx);
  } else if (key == "probe") {
    cfg.params.probe = parse_triple(value, ctx);
  } else if (key == "n_axis") {
    cfg.params.n_axis = parse_unit_axis(value, ctx);
  } else if (key == "m_axis") {
    cfg.params.m_axis = parse_unit_axis(value, ctx);
  } else if (key == "horizon") {
    cfg.spec.fixed_horizon = parse_double(value, ctx);
    if (cfg.spec.fixed_horizon < 0.0)
      throw ConfigError(ctx + ": horizon must be >= 0");
  } else if (key == "slow_periods") {
    cfg.spec.slow_periods = static_cast<int>(parse_long(value, ctx));
  } else if (key == "samples_per_period") {
    cfg.spec.samples_per_fast_period = static_cast<int>(parse_long(value, ctx));
  } else if (key == "refine") {
    cfg.spec.refine = parse_bool(value, ctx);
  } else if (key == "times") {
    cfg.times_axis = parse_axis(value, ctx);
  } else if (key == "sphere") {
    const auto parts = split(value, ',');
    if (parts.size() != 2)
      throw ConfigError(ctx + ": expected n_theta,n_phi");
    cfg.sphere_theta = static_cast<int>(parse_long(trim(parts[0]), ctx));
    cfg.sphere_phi = static_cast<int>(parse_long(trim(parts[1]), ctx));
  } else if (key == "dt_max") {
    cfg.dt_max = parse_double(value, ctx);
    if (cfg.dt_max < 0.0) throw ConfigError(ctx + ": dt_max must be >= 0");
  } else if (key == "tol") {
    cfg.kak_tol = parse_double(value, ctx);
    if (!(cfg.kak_tol > 0.0)) throw ConfigError(ctx + ": tol must be > 0");
  } else if (key == "out") {
    if (value.empty()) throw ConfigError(ctx + ": output path is empty");
    cfg.out = value;
  } else if (key == "seed") {
    cfg.seed = parse_long(value, ctx);
  } else {
    throw ConfigError(ctx + ": unknown key '" + key + "'");
  }
}

inline void load_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const std::string ctx = path + ":" + std::to_string(lineno);
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError(ctx + ": expected key = value");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty()) throw ConfigError(ctx + ": empty key");
    apply_key(cfg, key, value, ctx);
  }
}

inline std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// Parses `purisim <command> [--flag value]...`, args excluding argv[0].
/// A --config file is applied first, then the remaining flags override it.
inline RunConfig parse_config(const std::vector<std::string>& args) {
  if (args.empty())
    throw ConfigError(
        "usage: purisim <simulate-closed|simulate-open|sweep|grid|kak-scan|"
        "probe-opt> [--flag value]...");
  RunConfig cfg;
  const std::string& cmd = args[0];
  if (cmd == "simulate-closed")
    cfg.command = Command::simulate_closed;
  else if (cmd == "simulate-open")
    cfg.command = Command::simulate_open;
  else if (cmd == "sweep")
    cfg.command = Command::sweep;
  else if (cmd == "grid")
    cfg.command = Command::grid;
  else if (cmd == "kak-scan")
    cfg.command = Command::kak_scan;
  else if (cmd == "probe-opt")
    cfg.command = Command::probe_opt;
  else
    throw ConfigError("unknown command '" + cmd + "'");

  // Paper-canonical defaults: omega_s = 1, resonant probe frequency, weak
  // coupling; open-system simulation defaults to gamma_s = gamma_p = 0.01.
  cfg.params.g = 0.01;
  if (cfg.command == Command::simulate_open) {
    cfg.params.gamma_s = 0.01;
    cfg.params.gamma_p = 0.01;
  }
  cfg.out = std::string(command_name(cfg.command)) + ".csv";

  std::vector<std::pair<std::string, std::string>> flags;
  std::string config_path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    std::string key = args[i];
    if (key.rfind("--", 0) != 0)
      throw ConfigError("expected --flag, got '" + key + "'");
    key = key.substr(2);
    for (auto& ch : key)
      if (ch == '-') ch = '_';
    if (i + 1 >= args.size())
      throw ConfigError("--" + args[i].substr(2) + ": missing value");
    const std::string value = args[++i];
    if (key == "config")
      config_path = value;
    else
      flags.emplace_back(key, value);
  }

  if (!config_path.empty()) detail::load_config_file(cfg, config_path);
  for (const auto& [key, value] : flags)
    detail::apply_key(cfg, key, value, "--" + key);

  if (cfg.command == Command::sweep && !cfg.omega_p_axis)
    throw ConfigError("sweep: missing required grid --omega-p start:stop:step");
  if (cfg.command == Command::grid) {
    if (!cfg.g_axis)
      throw ConfigError("grid: missing required grid --g start:stop:step");
    if (!cfg.omega_p_axis)
      throw ConfigError("grid: missing required grid --omega-p start:stop:step");
  }
  if (cfg.out.empty()) throw ConfigError("output path is empty");
  try {
    validate_params(cfg.params);
    validate_spec(cfg.spec);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid parameters: ") + e.what());
  }
  return cfg;
}

/// Renders a config as `key = value` text that parse_config reads back.
inline std::string render_config(const RunConfig& cfg) {
  using detail::format_g17;
  std::ostringstream out;
  out << "# purisim " << command_name(cfg.command) << " configuration\n";
  out << "omega_s = " << format_g17(cfg.params.omega_s) << "\n";
  if (cfg.omega_p_axis) {
    const auto& a = *cfg.omega_p_axis;
    out << "omega_p = " << format_g17(a.start) << ":" << format_g17(a.stop)
        << ":" << format_g17(a.step) << "\n";
  } else {
    out << "omega_p = " << format_g17(cfg.params.omega_p) << "\n";
  }
  if (cfg.g_axis) {
    const auto& a = *cfg.g_axis;
    out << "g = " << format_g17(a.start) << ":" << format_g17(a.stop) << ":"
        << format_g17(a.step) << "\n";
  } else if (cfg.g_series) {
    out << "g = ";
    for (std::size_t i = 0; i < cfg.g_series->size(); ++i)
      out << (i ? "," : "") << format_g17((*cfg.g_series)[i]);
    out << "\n";
  } else {
    out << "g = " << format_g17(cfg.params.g) << "\n";
  }
  out << "gamma_s = " << format_g17(cfg.params.gamma_s) << "\n";
  out << "gamma_p = " << format_g17(cfg.params.gamma_p) << "\n";
  const auto triple = [&](const Bloch& v) {
    return format_g17(v.x()) + "," + format_g17(v.y()) + "," +
           format_g17(v.z());
  };
  out << "probe = " << triple(cfg.params.probe) << "\n";
  out << "n_axis = " << triple(cfg.params.n_axis) << "\n";
  out << "m_axis = " << triple(cfg.params.m_axis) << "\n";
  out << "horizon = " << format_g17(cfg.spec.fixed_horizon) << "\n";
  out << "slow_periods = " << cfg.spec.slow_periods << "\n";
  out << "samples_per_period = " << cfg.spec.samples_per_fast_period << "\n";
  out << "refine = " << (cfg.spec.refine ? 1 : 0) << "\n";
  out << "times = " << format_g17(cfg.times_axis.start) << ":"
      << format_g17(cfg.times_axis.stop) << ":"
      << format_g17(cfg.times_axis.step) << "\n";
  out << "sphere = " << cfg.sphere_theta << "," << cfg.sphere_phi << "\n";
  out << "dt_max = " << format_g17(cfg.dt_max) << "\n";
  out << "tol = " << format_g17(cfg.kak_tol) << "\n";
  out << "out = " << cfg.out << "\n";
  out << "seed = " << cfg.seed << "\n";
  return out.str();
}

namespace detail {

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path)
      : out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw ConfigError("cannot open output file '" + path + "'");
  }

  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << fields[i];
    }
    out_ << '\n';
  }

  void close(const std::string& path) {
    out_.flush();
    if (!out_) throw ConfigError("write failed for '" + path + "'");
  }

 private:
  std::ofstream out_;
};

}  // namespace detail

inline void emit_csv(const SweepResult& result, const std::string& path) {
  if (result.points.empty())
    throw std::invalid_argument("emit_csv: empty sweep result");
  detail::CsvWriter csv(path);
  csv.row({"omega_p", "g", "pi_max", "t_at_max", "horizon", "effective"});
  for (const auto& pt : result.points)
    csv.row({detail::format_g17(pt.omega_p), detail::format_g17(pt.g),
             detail::format_g17(pt.pi_max), detail::format_g17(pt.t_at_max),
             detail::format_g17(pt.horizon), pt.effective ? "1" : "0"});
  csv.close(path);
}

inline void emit_csv(const GridResult& result, const std::string& path) {
  if (result.points.empty())
    throw std::invalid_argument("emit_csv: empty grid result");
  detail::CsvWriter csv(path);
  csv.row({"g", "omega_p", "pi_max", "t_at_max"});
  for (const auto& pt : result.points)
    csv.row({detail::format_g17(pt.g), detail::format_g17(pt.omega_p),
             detail::format_g17(pt.pi_max), detail::format_g17(pt.t_at_max)});
  csv.close(path);
}

inline void emit_csv(const PurityTrace& trace, const std::string& path) {
  if (trace.times.empty())
    throw std::invalid_argument("emit_csv: empty trace");
  detail::CsvWriter csv(path);
  csv.row({"t", "pi", "s_x", "s_y", "s_z"});
  for (std::size_t i = 0; i < trace.times.size(); ++i)
    csv.row({detail::format_g17(trace.times[i]),
             detail::format_g17(trace.purities[i]),
             detail::format_g17(trace.bloch[i].x()),
             detail::format_g17(trace.bloch[i].y()),
             detail::format_g17(trace.bloch[i].z())});
  csv.close(path);
}

inline void emit_csv(const std::vector<CapabilityPoint>& scan,
                     const std::string& path) {
  if (scan.empty()) throw std::invalid_argument("emit_csv: empty kak scan");
  detail::CsvWriter csv(path);
  csv.row({"t", "c_x", "c_y", "c_z", "can_purify"});
  for (const auto& pt : scan)
    csv.row({detail::format_g17(pt.t), detail::format_g17(pt.c(0)),
             detail::format_g17(pt.c(1)), detail::format_g17(pt.c(2)),
             pt.purifying ? "1" : "0"});
  csv.close(path);
}

inline void emit_csv(const ProbeSearchResult& result, const std::string& path) {
  detail::CsvWriter csv(path);
  csv.row({"p_x", "p_y", "p_z", "pi_max", "t_at_max"});
  csv.row({detail::format_g17(result.best_probe.x()),
           detail::format_g17(result.best_probe.y()),
           detail::format_g17(result.best_probe.z()),
           detail::format_g17(result.pi_max),
           detail::format_g17(result.t_at_max)});
  csv.close(path);
}

namespace detail {

inline std::ofstream open_script(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open output file '" + path + "'");
  return out;
}

}  // namespace detail

/// Gnuplot script drawing pi_M resonance curves, one series per g value.
inline void emit_plot_script(const SweepResult& result,
                             const std::string& path,
                             const std::string& csv_name) {
  if (result.points.empty())
    throw std::invalid_argument("emit_plot_script: empty sweep result");
  std::vector<double> series;
  for (const auto& pt : result.points)
    if (series.empty() || series.back() != pt.g) series.push_back(pt.g);
  auto out = detail::open_script(path);
  out << "set datafile separator \",\"\n";
  out << "set xlabel \"omega_p\"\nset ylabel \"pi_M\"\nset key top right\n";
  out << "plot \\\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const std::string g = detail::format_g17(series[i]);
    out << "  \"" << csv_name << "\" skip 1 using 1:(abs($2 - (" << g
        << ")) < 1e-12 ? $3 : 1/0) with lines title \"g = " << g << "\""
        << (i + 1 < series.size() ? ", \\\n" : "\n");
  }
  out.flush();
  if (!out) throw ConfigError("write failed for '" + path + "'");
}

/// Gnuplot contour map of pi_M over the (g, omega_p) plane.
inline void emit_plot_script(const GridResult& result, const std::string& path,
                             const std::string& csv_name) {
  if (result.points.empty())
    throw std::invalid_argument("emit_plot_script: empty grid result");
  auto out = detail::open_script(path);
  out << "set datafile separator \",\"\n";
  out << "set xlabel \"omega_p\"\nset ylabel \"g\"\n";
  out << "set dgrid3d " << result.g_values.size() << ","
      << result.omega_p_values.size() << "\n";
  out << "set contour base\nset view map\nset pm3d\n";
  out << "splot \"" << csv_name
      << "\" skip 1 using 2:1:3 with pm3d title \"pi_M\"\n";
  out.flush();
  if (!out) throw ConfigError("write failed for '" + path + "'");
}

inline void emit_plot_script(const PurityTrace& trace, const std::string& path,
                             const std::string& csv_name) {
  if (trace.times.empty())
    throw std::invalid_argument("emit_plot_script: empty trace");
  auto out = detail::open_script(path);
  out << "set datafile separator \",\"\n";
  out << "set xlabel \"t\"\nset ylabel \"pi\"\n";
  out << "plot \"" << csv_name << "\" skip 1 using 1:2 with lines title "
      << "\"pi(t)\"\n";
  out.flush();
  if (!out) throw ConfigError("write failed for '" + path + "'");
}

inline void emit_plot_script(const std::vector<CapabilityPoint>& scan,
                             const std::string& path,
                             const std::string& csv_name) {
  if (scan.empty()) throw std::invalid_argument("emit_plot_script: empty scan");
  auto out = detail::open_script(path);
  out << "set datafile separator \",\"\n";
  out << "set xlabel \"t\"\nset ylabel \"c_i\"\nset key top right\n";
  out << "plot \"" << csv_name << "\" skip 1 using 1:2 with lines title "
      << "\"c_x\", \\\n  \"" << csv_name << "\" skip 1 using 1:3 with lines "
      << "title \"c_y\", \\\n  \"" << csv_name << "\" skip 1 using 1:4 with "
      << "lines title \"c_z\"\n";
  out.flush();
  if (!out) throw ConfigError("write failed for '" + path + "'");
}

}  // namespace purisim
