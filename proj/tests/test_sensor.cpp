#include <doctest.h>

#include <random>

#include "mcmplan/exposure_kernel.hpp"
#include "mcmplan/sensor.hpp"
#include "support.hpp"

using namespace mcmplan;

namespace {

// Bisection on the transmission loss, used as an independent root finder.
double range_for_loss(double target, const SensorParams& p) {
  double lo = 1.0;
  double hi = 1e6;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double tl = 20.0 * std::log10(mid) + p.attenuation / 1000.0 * mid;
    (tl < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_SUITE("sensor") {
  const SensorParams p{};

  TEST_CASE("transmission loss arithmetic") {
    CHECK(sensor::transmission_loss(1.0, p) == doctest::Approx(0.0052).epsilon(1e-12));
    CHECK(sensor::transmission_loss(1000.0, p) == doctest::Approx(65.2).epsilon(1e-12));
    SensorParams q = p;
    q.attenuation = 0.0;
    CHECK(sensor::transmission_loss(10.0, q) == doctest::Approx(20.0).epsilon(1e-12));
    CHECK_THROWS_AS(sensor::transmission_loss(0.0, p), std::domain_error);
    CHECK_THROWS_AS(sensor::transmission_loss(-1.0, p), std::domain_error);
    double prev = sensor::transmission_loss(1.0, p);
    for (double r = 1.5; r < 1e5; r *= 1.5) {
      const double tl = sensor::transmission_loss(r, p);
      CHECK(tl > prev);
      prev = tl;
    }
  }

  TEST_CASE("detection probability at TL = FOM and TL = FOM - sigma") {
    const double r_half = range_for_loss(p.fom, p);
    CHECK(std::abs(sensor::detection_probability(r_half, p) - 0.5) <= 1e-9);
    const double r_one = range_for_loss(p.fom - p.sigma, p);
    CHECK(sensor::detection_probability(r_one, p) == doctest::Approx(0.8413447460685429).epsilon(1e-9));
  }

  TEST_CASE("detection probability is non-increasing in range") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 5000.0);
    for (int i = 0; i < 10000; ++i) {
      double a = u(rng);
      double b = u(rng);
      if (a > b) std::swap(a, b);
      CHECK(sensor::detection_probability(a, p) >= sensor::detection_probability(b, p));
    }
  }

  TEST_CASE("body-frame offsets") {
    const Vec2 a = sensor::body_frame_offsets({0, 0, 0, 0}, {3, 0});
    CHECK(a.x == 3.0);
    CHECK(a.y == 0.0);
    const Vec2 b = sensor::body_frame_offsets({0, 0, std::numbers::pi / 2, 0}, {0, 5});
    CHECK(b.x == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(std::abs(b.y) < 1e-15);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    for (int i = 0; i < 1000; ++i) {
      const VehicleState s{u(rng), u(rng), u(rng), 0.0};
      const Vec2 w{u(rng), u(rng)};
      const Vec2 o = sensor::body_frame_offsets(s, w);
      CHECK(norm(o) == doctest::Approx(norm(w - Vec2{s.x, s.y})).epsilon(1e-12));
    }
  }

  TEST_CASE("bearing conventions and frame invariance") {
    CHECK(sensor::bearing({0, 0, 0, 0}, {10, 0}) == 0.0);
    CHECK(sensor::bearing({0, 0, 0, 0}, {0, 10}) == doctest::Approx(std::numbers::pi / 2));
    CHECK(sensor::bearing({1, 1, 0.3, 0}, {1, 1}) == 0.0);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    for (int i = 0; i < 1000; ++i) {
      const VehicleState s{u(rng), u(rng), u(rng), 0.0};
      const Vec2 w{u(rng), u(rng)};
      const double th = u(rng);
      const Vec2 rel = w - Vec2{s.x, s.y};
      const Vec2 rot{std::cos(th) * rel.x - std::sin(th) * rel.y, std::sin(th) * rel.x + std::cos(th) * rel.y};
      const VehicleState s2{s.x, s.y, s.psi + th, 0.0};
      const double a = sensor::bearing(s, w);
      const double b = sensor::bearing(s2, Vec2{s.x, s.y} + rot);
      CHECK(std::abs(std::remainder(a - b, 2.0 * std::numbers::pi)) < 1e-9);
      CHECK(a > -std::numbers::pi);
      CHECK(a <= std::numbers::pi);
    }
  }

  TEST_CASE("horizontal gate: centre, half points, symmetry") {
    const double expected = 1.0 - 2.0 * std::exp(-p.p_alpha * p.alpha_fov / 2);
    CHECK(std::abs(sensor::horizontal_gate(0.0, p) - expected) < 1e-10);
    const double half = sensor::horizontal_gate(p.alpha_fov / 2, p);
    CHECK(half == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(sensor::horizontal_gate(-p.alpha_fov / 2, p) == doctest::Approx(half).epsilon(1e-15));
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    for (int i = 0; i < 1000; ++i) {
      const double x = u(rng);
      CHECK(sensor::horizontal_gate(x, p) == doctest::Approx(sensor::horizontal_gate(-x, p)).epsilon(1e-14));
      CHECK(sensor::horizontal_gate(x, p) <= sensor::horizontal_gate(0.0, p));
    }
  }

  TEST_CASE("depression angle") {
    CHECK(sensor::depression({0, 0, 0, 0}, {20, 0}, p) == doctest::Approx(-std::numbers::pi / 4));
    const double r6 = 20.0 / std::tan(deg_to_rad(6.0));
    CHECK(r6 == doctest::Approx(190.29).epsilon(1e-4));
    CHECK(sensor::depression({0, 0, 0, 0}, {r6, 0}, p) == doctest::Approx(p.eps_de).epsilon(1e-12));
    const double far = sensor::depression({0, 0, 0, 0}, {1e9, 0}, p);
    CHECK(far < 0.0);
    CHECK(far > -1e-7);
    CHECK(sensor::depression({0, 0, 0, 0}, {0, 0}, p) == doctest::Approx(std::atan(-p.height / p.r_min)));
  }

  TEST_CASE("vertical gate: centre, half points, symmetry") {
    const double top = sensor::vertical_gate(p.eps_de, p);
    CHECK(top == doctest::Approx(1.0 - 2.0 * std::exp(-p.p_eps * p.eps_fov / 2)).epsilon(1e-12));
    CHECK(top > 0.999);
    CHECK(sensor::vertical_gate(p.eps_de + p.eps_fov / 2, p) == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(sensor::vertical_gate(p.eps_de - p.eps_fov / 2, p) == doctest::Approx(0.5).epsilon(1e-6));
    for (double x = 0.0; x < 0.5; x += 0.003) {
      CHECK(sensor::vertical_gate(p.eps_de + x, p) == doctest::Approx(sensor::vertical_gate(p.eps_de - x, p)).epsilon(1e-12));
      CHECK(sensor::vertical_gate(p.eps_de + x, p) <= top);
    }
  }

  TEST_CASE("detection rate: factor product, gate centre, behind the vehicle") {
    const double r6 = 20.0 / std::tan(deg_to_rad(6.0));
    const double g = sensor::detection_rate({0, 0, 0, 0}, {r6, 0}, p);
    CHECK(g == doctest::Approx(p.lambda * sensor::detection_probability(r6, p)).epsilon(1e-6));
    for (double r = 1.0; r < 2000.0; r *= 1.3) {
      CHECK(sensor::detection_rate({0, 0, 0, 0}, {-r, 0}, p) < p.lambda * 1e-6);
    }
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-400.0, 400.0);
    for (int i = 0; i < 1000; ++i) {
      const VehicleState s{u(rng), u(rng), u(rng) / 50.0, 0.0};
      const Vec2 w{u(rng), u(rng)};
      const double rate = sensor::detection_rate(s, w, p);
      const double prod = p.lambda * sensor::detection_probability(std::max(norm(w - Vec2{s.x, s.y}), p.r_min), p) *
                          sensor::horizontal_gate(sensor::bearing(s, w), p) *
                          sensor::vertical_gate(sensor::depression(s, w, p), p);
      CHECK(rate == doctest::Approx(prod).epsilon(1e-12));
      // The reference uses the sum form of the gates, exact only to about lambda * 1e-15.
      const double ref = testing::ref_rate(s.x, s.y, s.psi, w.x, w.y, p);
      CHECK(std::abs(rate - ref) <= 1e-8 * ref + 1e-14 * p.lambda);
    }
  }

  TEST_CASE("detection rate is continuous") {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> u(-300.0, 300.0);
    for (int i = 0; i < 500; ++i) {
      const VehicleState s{u(rng), u(rng), u(rng), 0.0};
      const Vec2 w{u(rng), u(rng)};
      const double a = sensor::detection_rate(s, w, p);
      const double b = sensor::detection_rate({s.x + 1e-7, s.y - 1e-7, s.psi + 1e-9, 0.0}, w, p);
      CHECK(std::abs(a - b) < 1e-4);
    }
  }

  TEST_CASE("static vehicle field is a forward sector") {
    // Vehicle at the square's centre heading +x: the strongest cells lie in
    // the forward wedge inside the detection annulus, nothing behind.
    const VehicleState s{1500, 1500, 0, 0};
    double ahead = 0.0;
    double behind = 0.0;
    for (double r = 100.0; r <= 400.0; r += 10.0) {
      for (double a = -0.8; a <= 0.8; a += 0.05) {
        ahead = std::max(ahead, sensor::detection_rate(s, {s.x + r * std::cos(a), s.y + r * std::sin(a)}, p));
        behind = std::max(behind, sensor::detection_rate(s, {s.x - r * std::cos(a), s.y + r * std::sin(a)}, p));
      }
    }
    CHECK(ahead > 0.5 * p.lambda);
    CHECK(behind < 1e-6 * p.lambda);
    CHECK(sensor::detection_rate(s, {s.x + 30.0, s.y}, p) < 1e-3 * p.lambda);  // too steep below the beam
  }

  TEST_CASE("vectorized kernel matches the scalar model") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-600.0, 600.0);
    std::vector<double> xs(997), ys(997), rates(997);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      xs[i] = u(rng);
      ys[i] = u(rng);
    }
    xs[5] = 10.0;
    ys[5] = -20.0;  // coincident with the vehicle
    const VehicleState s{10.0, -20.0, 0.7, 0.0};
    kernel::evaluate_rates(p, xs.data(), ys.data(), xs.size(), {s.x, s.y, std::cos(s.psi), std::sin(s.psi)},
                           rates.data());
    const DetectionModel model(p);
    std::vector<double> coeff(xs.size());
    double gx = 0, gy = 0, gpsi = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double ref = sensor::detection_rate(s, {xs[i], ys[i]}, p);
      CHECK(rates[i] == doctest::Approx(ref).epsilon(1e-11).scale(1e-300));
      coeff[i] = std::sin(0.1 * static_cast<double>(i));
      const auto part = model.rate_and_partials(xs[i] - s.x, ys[i] - s.y, std::cos(s.psi), std::sin(s.psi));
      gx += coeff[i] * part.d_x;
      gy += coeff[i] * part.d_y;
      gpsi += coeff[i] * part.d_psi;
    }
    const kernel::PoseGradient g = kernel::weighted_rate_gradient(p, xs.data(), ys.data(), coeff.data(), xs.size(),
                                                                  {s.x, s.y, std::cos(s.psi), std::sin(s.psi)});
    CHECK(g.x == doctest::Approx(gx).epsilon(1e-9));
    CHECK(g.y == doctest::Approx(gy).epsilon(1e-9));
    CHECK(g.psi == doctest::Approx(gpsi).epsilon(1e-9));
  }

  TEST_CASE("pose partials agree with central differences") {
    const DetectionModel model(p);
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> u(-350.0, 350.0);
    for (int i = 0; i < 200; ++i) {
      const double dx = u(rng), dy = u(rng), psi = u(rng) / 100.0;
      const auto part = model.rate_and_partials(dx, dy, std::cos(psi), std::sin(psi));
      const double h = 1e-5;
      // Moving the vehicle by +h shifts the relative offset by -h.
      const double fx = (model.rate(dx - h, dy, std::cos(psi), std::sin(psi)) -
                         model.rate(dx + h, dy, std::cos(psi), std::sin(psi))) / (2 * h);
      const double fy = (model.rate(dx, dy - h, std::cos(psi), std::sin(psi)) -
                         model.rate(dx, dy + h, std::cos(psi), std::sin(psi))) / (2 * h);
      const double fp = (model.rate(dx, dy, std::cos(psi + h), std::sin(psi + h)) -
                         model.rate(dx, dy, std::cos(psi - h), std::sin(psi - h))) / (2 * h);
      // Central-difference round-off is about eps * rate / h.
      const double floor = 1e-9 * std::max(1.0, part.rate);
      CHECK(std::abs(part.d_x - fx) <= 1e-5 * std::abs(fx) + floor);
      CHECK(std::abs(part.d_y - fy) <= 1e-5 * std::abs(fy) + floor);
      CHECK(std::abs(part.d_psi - fp) <= 1e-5 * std::abs(fp) + floor);
    }
  }
}
