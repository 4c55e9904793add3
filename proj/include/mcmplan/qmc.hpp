#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mcmplan/geometry.hpp"

namespace mcmplan {

/// R randomly shifted copies of an N-point rank-1 lattice, mapped into a
/// domain. Point j of shift r is stored at index r * n + j of the
/// structure-of-arrays vectors.
struct QmcPointSet {
  std::size_t n = 0;
  std::size_t shifts = 0;
  std::uint64_t seed = 0;
  std::uint64_t generator = 1;  // lattice generating vector (1, generator)
  std::vector<Vec2> shift_vectors;
  std::vector<double> unit_x, unit_y;
  std::vector<double> x, y;

  std::size_t size() const { return n * shifts; }
  static constexpr const char* construction = "rank-1 Korobov lattice, Cranley-Patterson shifts";
};

namespace qmc {

/// Korobov parameter a in [1, n/2] coprime to n minimizing the P_2 figure of
/// merit of the lattice generated by (1, a).
std::uint64_t korobov_generator(std::size_t n);

/// Throws std::invalid_argument when n < 16 or shifts < 1.
QmcPointSet generate_points(std::size_t n, std::size_t shifts, std::uint64_t seed, const Domain& d);

/// The first m shifts of a point set (all of them when m is 0 or too large).
QmcPointSet first_shifts(const QmcPointSet& pts, std::size_t m);

}  // namespace qmc

inline QmcPointSet generate_qmc_points(std::size_t n, std::size_t shifts, std::uint64_t seed, const Domain& d) {
  return qmc::generate_points(n, shifts, seed, d);
}

}  // namespace mcmplan
