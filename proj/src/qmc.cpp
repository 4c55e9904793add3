#include "mcmplan/qmc.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

namespace mcmplan::qmc {
namespace {

double p2_criterion(std::size_t n, std::uint64_t a) {
  const double c = 2.0 * std::numbers::pi * std::numbers::pi;
  const auto b2 = [](double x) { return x * x - x + 1.0 / 6.0; };
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double u = static_cast<double>((k * a) % n) / static_cast<double>(n);
    const double v = static_cast<double>(k) / static_cast<double>(n);
    sum += (1.0 + c * b2(v)) * (1.0 + c * b2(u));
  }
  return sum / static_cast<double>(n) - 1.0;
}

}  // namespace

std::uint64_t korobov_generator(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, std::uint64_t> cache;
  {
    std::lock_guard lock(mu);
    if (auto it = cache.find(n); it != cache.end()) return it->second;
  }
  std::uint64_t best = 1;
  double best_p2 = p2_criterion(n, 1);
  for (std::uint64_t a = 2; a <= n / 2; ++a) {
    if (std::gcd(a, static_cast<std::uint64_t>(n)) != 1) continue;
    const double p2 = p2_criterion(n, a);
    if (p2 < best_p2) {
      best_p2 = p2;
      best = a;
    }
  }
  std::lock_guard lock(mu);
  cache[n] = best;
  return best;
}

QmcPointSet generate_points(std::size_t n, std::size_t shifts, std::uint64_t seed, const Domain& d) {
  if (n < 16) throw std::invalid_argument("qmc: need at least 16 points per shift");
  if (shifts < 1) throw std::invalid_argument("qmc: need at least one shift");

  QmcPointSet pts;
  pts.n = n;
  pts.shifts = shifts;
  pts.seed = seed;
  pts.generator = korobov_generator(n);

  // Shifts are drawn from the top 53 bits so the values do not depend on the
  // standard library's distribution implementation.
  std::mt19937_64 rng(seed);
  const auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  pts.shift_vectors.reserve(shifts);
  for (std::size_t r = 0; r < shifts; ++r) {
    const double sx = uniform();
    const double sy = uniform();
    pts.shift_vectors.push_back({sx, sy});
  }

  const std::size_t total = n * shifts;
  pts.unit_x.resize(total);
  pts.unit_y.resize(total);
  pts.x.resize(total);
  pts.y.resize(total);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t r = 0; r < shifts; ++r) {
    const Vec2 s = pts.shift_vectors[r];
    for (std::size_t j = 0; j < n; ++j) {
      double ux = static_cast<double>(j) * inv_n + s.x;
      double uy = static_cast<double>((j * pts.generator) % n) * inv_n + s.y;
      ux -= std::floor(ux);
      uy -= std::floor(uy);
      // Guard against rounding up to exactly 1.
      if (ux >= 1.0) ux = std::nextafter(1.0, 0.0);
      if (uy >= 1.0) uy = std::nextafter(1.0, 0.0);
      const std::size_t idx = r * n + j;
      pts.unit_x[idx] = ux;
      pts.unit_y[idx] = uy;
      const Vec2 p = map_unit_square(d, {ux, uy});
      pts.x[idx] = p.x;
      pts.y[idx] = p.y;
    }
  }
  return pts;
}

QmcPointSet first_shifts(const QmcPointSet& pts, std::size_t m) {
  if (m == 0 || m >= pts.shifts) return pts;
  QmcPointSet out;
  out.n = pts.n;
  out.shifts = m;
  out.seed = pts.seed;
  out.generator = pts.generator;
  out.shift_vectors.assign(pts.shift_vectors.begin(), pts.shift_vectors.begin() + static_cast<std::ptrdiff_t>(m));
  const auto total = static_cast<std::ptrdiff_t>(pts.n * m);
  out.unit_x.assign(pts.unit_x.begin(), pts.unit_x.begin() + total);
  out.unit_y.assign(pts.unit_y.begin(), pts.unit_y.begin() + total);
  out.x.assign(pts.x.begin(), pts.x.begin() + total);
  out.y.assign(pts.y.begin(), pts.y.begin() + total);
  return out;
}

}  // namespace mcmplan::qmc
