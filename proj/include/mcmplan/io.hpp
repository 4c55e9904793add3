#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcmplan/dynamics.hpp"
#include "mcmplan/risk.hpp"

namespace mcmplan::io {

/// Malformed input table. row and column are 1-based; 0 means "whole file"
/// or "whole row".
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& path, std::size_t row, std::size_t column, const std::string& what);
  std::size_t row() const { return row_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

/// Comma-separated table with header
/// vehicle_id,t_s,x_m,y_m,psi_rad,r_rad_s,rudder_rad and one row per sample.
/// Values are printed with 17 significant digits so that reading the file
/// back reproduces every state bit for bit.
void write_trajectories(const std::string& path, const std::vector<Trajectory>& trajs);

/// Reads a table written by write_trajectories. Vehicle ids must be 0..k-1 in
/// order, each with uniformly spaced times starting at 0. Throws FormatError.
std::vector<Trajectory> read_trajectories(const std::string& path);

/// Header cell_x_m,cell_y_m,exposure,seen,valid; one row per cell, x fastest.
void write_coverage(const std::string& path, const CoverageGrid& grid);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

/// 64-bit FNV-1a, printed as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace mcmplan::io
