#include "mcmplan/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>

namespace mcmplan::io {
namespace {

constexpr const char* kTrajectoryHeader = "vehicle_id,t_s,x_m,y_m,psi_rad,r_rad_s,rudder_rad";
constexpr const char* kCoverageHeader = "cell_x_m,cell_y_m,exposure,seen,valid";

std::string format_message(const std::string& path, std::size_t row, std::size_t column, const std::string& what) {
  std::ostringstream os;
  os << path;
  if (row > 0) os << ": row " << row;
  if (column > 0) {
    os << ", column " << column;
    static const char* const names[] = {"vehicle_id", "t_s", "x_m", "y_m", "psi_rad", "r_rad_s", "rudder_rad"};
    if (column <= std::size(names)) os << " (" << names[column - 1] << ")";
  }
  os << ": " << what;
  return os.str();
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

void append_number(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

}  // namespace

FormatError::FormatError(const std::string& path, std::size_t row, std::size_t column, const std::string& what)
    : std::runtime_error(format_message(path, row, column, what)), row_(row), column_(column) {}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

void write_trajectories(const std::string& path, const std::vector<Trajectory>& trajs) {
  std::string out = kTrajectoryHeader;
  out += '\n';
  for (std::size_t v = 0; v < trajs.size(); ++v) {
    const Trajectory& t = trajs[v];
    for (std::size_t i = 0; i < t.states.size(); ++i) {
      const VehicleState& s = t.states[i];
      out += std::to_string(v);
      for (const double x : {static_cast<double>(i) * t.dt, s.x, s.y, s.psi, s.r,
                             t.rudder.empty() ? 0.0 : t.rudder[i]}) {
        out += ',';
        append_number(out, x);
      }
      out += '\n';
    }
  }
  write_text(path, out);
}

std::vector<Trajectory> read_trajectories(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw FormatError(path, 0, 0, "cannot open file");
  std::string line;
  if (!std::getline(f, line)) throw FormatError(path, 0, 0, "empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTrajectoryHeader) throw FormatError(path, 1, 0, std::string("expected header '") + kTrajectoryHeader + "'");

  std::vector<Trajectory> trajs;
  std::vector<std::vector<double>> times;
  std::size_t row = 1;
  while (std::getline(f, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split(line);
    if (cells.size() != 7) {
      throw FormatError(path, row, 0, "expected 7 columns, found " + std::to_string(cells.size()));
    }
    double v[7];
    for (std::size_t c = 0; c < 7; ++c) {
      const char* begin = cells[c].c_str();
      char* end = nullptr;
      errno = 0;
      v[c] = std::strtod(begin, &end);
      if (cells[c].empty() || *end != '\0' || errno == ERANGE || !std::isfinite(v[c])) {
        throw FormatError(path, row, c + 1, "not a finite number: '" + cells[c] + "'");
      }
    }
    if (v[0] < 0.0 || v[0] != std::floor(v[0])) throw FormatError(path, row, 1, "vehicle id must be a non-negative integer");
    const auto id = static_cast<std::size_t>(v[0]);
    if (id == trajs.size()) {
      trajs.emplace_back();
      times.emplace_back();
    } else if (id + 1 != trajs.size()) {
      throw FormatError(path, row, 1, "vehicle ids must be consecutive starting at 0");
    }
    if (times[id].empty() && v[1] != 0.0) throw FormatError(path, row, 2, "first sample of a vehicle must be at t = 0");
    if (!times[id].empty() && !(v[1] > times[id].back())) throw FormatError(path, row, 2, "time must increase");
    times[id].push_back(v[1]);
    trajs[id].states.push_back({v[2], v[3], v[4], v[5]});
    trajs[id].rudder.push_back(v[6]);
  }
  if (trajs.empty()) throw FormatError(path, 0, 0, "no samples");

  for (std::size_t id = 0; id < trajs.size(); ++id) {
    const std::vector<double>& t = times[id];
    if (t.size() < 2) continue;
    const double dt = t[1];
    for (std::size_t i = 2; i < t.size(); ++i) {
      if (std::abs(t[i] - static_cast<double>(i) * dt) > 1e-9 * std::max(1.0, t[i])) {
        throw FormatError(path, 0, 2, "vehicle " + std::to_string(id) + " is not sampled uniformly");
      }
    }
    trajs[id].dt = dt;
  }
  return trajs;
}

void write_coverage(const std::string& path, const CoverageGrid& grid) {
  std::string out = kCoverageHeader;
  out += '\n';
  for (std::size_t c = 0; c < grid.exposure.size(); ++c) {
    append_number(out, grid.center_x[c]);
    out += ',';
    append_number(out, grid.center_y[c]);
    out += ',';
    append_number(out, grid.exposure[c]);
    out += grid.seen[c] ? ",1" : ",0";
    out += grid.valid[c] ? ",1\n" : ",0\n";
  }
  write_text(path, out);
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace mcmplan::io
