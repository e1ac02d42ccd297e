#pragma once

// Trajectory CSV export/import and generation of a matplotlib script that
// plots states and inputs from one or two CSV files.
//
// Numbers are written in the shortest decimal form that parses back to the
// same double (std::to_chars), so a read-back is bit-exact.

#include <array>
#include <cerrno>
#include <charconv>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "coop/errors.hpp"
#include "coop/simulation.hpp"

namespace coop {

inline constexpr std::string_view kCsvHeader =
    "t,x,x_dot,alpha,alpha_dot,beta,beta_dot,u1,u2,u3,u1_cmd,u2_cmd,u3_cmd,ref_x,ref_alpha";
inline constexpr std::size_t kCsvColumns = 15;

namespace detail {

inline void append_number(std::string& line, double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  line.append(buf.data(), res.ptr);
}

[[noreturn]] inline void throw_io(const std::filesystem::path& path, const char* action) {
  throw std::system_error(errno, std::generic_category(), std::string(action) + " " + path.string());
}

}  // namespace detail

inline std::array<double, kCsvColumns> csv_row(const Sample& s) {
  return {s.t,          s.state.x,          s.state.x_dot,      s.state.alpha,      s.state.alpha_dot,
          s.state.beta, s.state.beta_dot,   s.input.u1,         s.input.u2,         s.input.u3,
          s.debug.u1_pre_clamp, s.debug.u2_pre_clamp, s.debug.u3_pre_clamp, s.applied.x_ref, s.applied.alpha_ref};
}

inline void write_csv(std::ostream& os, const Trajectory& traj) {
  os << kCsvHeader << '\n';
  std::string line;
  for (const Sample& s : traj.samples) {
    line.clear();
    const auto row = csv_row(s);
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) line.push_back(',');
      detail::append_number(line, row[i]);
    }
    line.push_back('\n');
    os << line;
  }
}

inline void export_csv(const Trajectory& traj, const std::filesystem::path& path) {
  errno = 0;
  std::ofstream out(path);
  if (!out) detail::throw_io(path, "cannot open for writing");
  write_csv(out, traj);
  out.flush();
  if (!out) detail::throw_io(path, "write failed on");
}

/// Parses a file written by `export_csv` back into rows of numbers.
inline std::vector<std::array<double, kCsvColumns>> read_csv(const std::filesystem::path& path) {
  errno = 0;
  std::ifstream in(path);
  if (!in) detail::throw_io(path, "cannot open for reading");
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw Error(path.string() + ": unexpected CSV header");
  std::vector<std::array<double, kCsvColumns>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    std::array<double, kCsvColumns> row{};
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (std::size_t i = 0; i < kCsvColumns; ++i) {
      const auto res = std::from_chars(p, end, row[i]);
      if (res.ec != std::errc{}) throw Error(path.string() + ":" + std::to_string(lineno) + ": bad number");
      p = res.ptr;
      if (i + 1 < kCsvColumns) {
        if (p == end || *p != ',') throw Error(path.string() + ":" + std::to_string(lineno) + ": missing column");
        ++p;
      }
    }
    if (p != end) throw Error(path.string() + ":" + std::to_string(lineno) + ": trailing data");
    rows.push_back(row);
  }
  return rows;
}

/// One curve set on the generated plot.
struct PlotSeries {
  std::filesystem::path csv;
  std::string label;
  std::string style;  // matplotlib format string, e.g. "b-" or "r--"
};

/// Writes a standalone Python/matplotlib script with two panels: states
/// (x, alpha, theta = beta - alpha) and inputs (u1, u2, u3). Each series is
/// overlaid with its own line style.
inline void emit_plot_script(const std::vector<PlotSeries>& series, const std::filesystem::path& out_path,
                             const std::filesystem::path& image_path = {}) {
  if (series.empty()) throw Error("emit_plot_script: no CSV given");
  for (const auto& s : series) {
    if (!std::filesystem::exists(s.csv)) {
      throw std::filesystem::filesystem_error("trajectory CSV not found", s.csv,
                                              std::make_error_code(std::errc::no_such_file_or_directory));
    }
  }

  std::ostringstream py;
  py << "#!/usr/bin/env python3\n"
        "# Generated plot of states and inputs.\n"
        "import csv\n"
        "import sys\n\n"
        "import matplotlib\n"
        "matplotlib.use('Agg' if '--save' in sys.argv else matplotlib.get_backend())\n"
        "import matplotlib.pyplot as plt\n\n"
        "SERIES = [\n";
  for (const auto& s : series) {
    py << "    (" << std::filesystem::absolute(s.csv) << ", '" << s.label << "', '" << s.style << "'),\n";
  }
  py << "]\n\n"
        "def load(path):\n"
        "    with open(path, newline='') as f:\n"
        "        rows = list(csv.DictReader(f))\n"
        "    return {k: [float(r[k]) for r in rows] for k in rows[0]} if rows else {}\n\n"
        "fig, (ax_s, ax_u) = plt.subplots(2, 1, sharex=True, figsize=(8, 7))\n"
        "single = len(SERIES) == 1\n"
        "for path, label, style in SERIES:\n"
        "    d = load(path)\n"
        "    if not d:\n"
        "        continue\n"
        "    t = d['t']\n"
        "    theta = [b - a for a, b in zip(d['alpha'], d['beta'])]\n"
        "    for ax, curves in ((ax_s, (('x', d['x']), ('alpha', d['alpha']), ('theta', theta))),\n"
        "                       (ax_u, (('u1', d['u1']), ('u2', d['u2']), ('u3', d['u3'])))):\n"
        "        for i, (name, y) in enumerate(curves):\n"
        "            kw = {'color': 'C%d' % i} if single else {'alpha': 1.0 - 0.25 * i}\n"
        "            ax.plot(t, y, style, label=name + ' ' + label, **kw)\n"
        "ax_s.set_ylabel('states [m, rad]')\n"
        "ax_u.set_ylabel('inputs [N, N m]')\n"
        "ax_u.set_xlabel('t [s]')\n"
        "for ax in (ax_s, ax_u):\n"
        "    ax.grid(True)\n"
        "    ax.legend(loc='best', fontsize='small')\n"
        "fig.tight_layout()\n";
  if (!image_path.empty()) {
    py << "fig.savefig(" << std::filesystem::absolute(image_path) << ")\n";
  }
  py << "if '--save' not in sys.argv:\n"
        "    plt.show()\n";

  errno = 0;
  std::ofstream out(out_path);
  if (!out) detail::throw_io(out_path, "cannot open for writing");
  out << py.str();
  out.flush();
  if (!out) detail::throw_io(out_path, "write failed on");
}

}  // namespace coop
