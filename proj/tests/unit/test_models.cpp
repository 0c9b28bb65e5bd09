#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "mapflux/errors.hpp"
#include "mapflux/models.hpp"
#include "mapflux/stats.hpp"

using namespace mapflux;
using namespace mapflux::models;

namespace {

// Drift of the modulator computed from scratch, for comparison with the library.
Vec2 reference_drift(const ModelSpec& model, double x, double y) {
  if (std::holds_alternative<FreeBessel2D>(model)) return {1.0 / x - 2.5 * x, 1.0 / y - 2.5 * y};
  const auto& d = std::get<RadialDunkl>(model);
  double a1 = 0.0, a2 = 0.0;
  for (const auto& r : d.root_system.positive_roots()) {
    const double p = r[0] * x + r[1] * y;
    a1 += d.k * r[0] / p;
    a2 += d.k * r[1] / p;
  }
  const double ta = x * a1 + y * a2;
  return {a1 - x * ta - x / 2.0, a2 - y * ta - y / 2.0};
}

// b . grad V + (1/2) sigma : Hess V worked out by hand for the two Lyapunov functions.
double reference_LV(const ModelSpec& model, double x, double y) {
  const auto b = reference_drift(model, x, y);
  const double w = x * x * x + y * y * y;
  const double lin = 3.0 * x * x * b[0] + 3.0 * y * y * b[1];
  const double quad = 3.0 * x * y * (x + y);
  const auto* d = std::get_if<RadialDunkl>(&model);
  if (d != nullptr && d->root_system.kind() == RootKind::D2) {
    const double tangential = 3.0 * x * y * (y - x);
    return 2.0 * w * lin + tangential * tangential + 2.0 * w * quad;
  }
  return lin + quad;
}

std::vector<ModelSpec> continuous_models() {
  return {FreeBessel2D{}, RadialDunkl{RootSystem(RootKind::A1), 0.5},
          RadialDunkl{RootSystem(RootKind::B2), 0.5}, RadialDunkl{RootSystem(RootKind::C2), 0.5},
          RadialDunkl{RootSystem(RootKind::D2), 0.5}, RadialDunkl{RootSystem(RootKind::A1), 1.5}};
}

}  // namespace

TEST_SUITE("models") {

TEST_CASE("Bessel modulator coefficients") {
  const double s = 1.0 / std::sqrt(2.0);
  auto c = bessel_modulator_coeffs(UnitVector(s, s));
  CHECK(c.drift[0] == doctest::Approx(-std::sqrt(2.0) / 4.0));
  CHECK(c.drift[1] == doctest::Approx(-0.353553).epsilon(1e-6));
  CHECK(c.diffusion[0][0] == doctest::Approx(0.5));
  CHECK(c.diffusion[0][1] == doctest::Approx(-0.5));

  c = bessel_modulator_coeffs(UnitVector(0.6, 0.8));
  CHECK(c.drift[0] == doctest::Approx(0.1666667).epsilon(1e-6));
  CHECK(c.drift[1] == doctest::Approx(-0.75));
  CHECK(c.diffusion[0][0] == doctest::Approx(0.64));
  CHECK(c.diffusion[0][1] == doctest::Approx(-0.48));
  CHECK(c.diffusion[1][1] == doctest::Approx(0.36));

  try {
    bessel_modulator_coeffs(UnitVector(1.0, 0.0));
    FAIL("expected a wall error");
  } catch (const WallError& e) {
    CHECK(e.root() == 1);
    CHECK(e.value() == 0.0);
  }
}

TEST_CASE("Dunkl A vector and drifts") {
  const RootSystem a1(RootKind::A1);
  auto A = dunkl_A(UnitVector(0.8, 0.6), a1, 0.5);
  CHECK(A[0] == doctest::Approx(2.5));
  CHECK(A[1] == doctest::Approx(-2.5));
  A = dunkl_A(UnitVector(1.0, 0.0), a1, 0.5);
  CHECK(A[0] == doctest::Approx(0.5));
  CHECK(A[1] == doctest::Approx(-0.5));
  const double s = 1.0 / std::sqrt(2.0);
  try {
    dunkl_A(UnitVector(s, s), a1, 0.7);
    FAIL("expected a wall error");
  } catch (const WallError& e) {
    CHECK(e.root() == 0);
  }

  auto d = dunkl_modulator_drift(UnitVector(1.0, 0.0), a1, 0.5);
  CHECK(d[0] == doctest::Approx(-0.5));
  CHECK(d[1] == doctest::Approx(-0.5));
  d = dunkl_modulator_drift(UnitVector(0.8, 0.6), a1, 0.5);
  CHECK(d[0] == doctest::Approx(1.7));
  CHECK(d[1] == doctest::Approx(-3.1));

  CHECK(dunkl_ordinate_drift(UnitVector(0.8, 0.6), a1, 0.5) == doctest::Approx(0.5));
  CHECK(dunkl_ordinate_drift(UnitVector(0.8, 0.6), a1, 1.0) == doctest::Approx(1.0));
  CHECK(dunkl_ordinate_drift(UnitVector(1.0, 0.0), a1, 0.5) == doctest::Approx(0.5));
  CHECK_THROWS_AS(dunkl_ordinate_drift(UnitVector(1.0, 0.0), a1, 0.5, 3), ValidationError);
}

TEST_CASE("<theta, A> equals gamma on every chamber") {
  // Each root contributes k <alpha, theta> / <alpha, theta> = k.
  for (auto kind : {RootKind::A1, RootKind::B2, RootKind::C2, RootKind::D2}) {
    const RootSystem rs(kind);
    const ModelSpec m = RadialDunkl{rs, 0.8};
    for (const auto& u : arc_points(m, 50, 1e-3)) {
      CHECK(dunkl_ordinate_drift(u, rs, 0.8) == doctest::Approx(rs.gamma(0.8)));
    }
  }
}

TEST_CASE("library drift matches the hand-written formula") {
  for (const auto& m : continuous_models()) {
    for (const auto& u : arc_points(m, 40, 1e-3)) {
      const auto c = modulator_coeffs(m, u);
      const auto ref = reference_drift(m, u[0], u[1]);
      CHECK(c.drift[0] == doctest::Approx(ref[0]).epsilon(1e-12));
      CHECK(c.drift[1] == doctest::Approx(ref[1]).epsilon(1e-12));
    }
  }
}

TEST_CASE("sphere preservation on random arc points") {
  for (const auto& m : continuous_models()) {
    for (const auto& u : arc_points(m, 2000, 1e-4)) {
      const auto c = modulator_coeffs(m, u);
      const auto& s = c.diffusion;
      CHECK(std::abs(s[0][0] * u[0] + s[0][1] * u[1]) <= 1e-12);
      CHECK(std::abs(s[1][0] * u[0] + s[1][1] * u[1]) <= 1e-12);
      const double identity = 2.0 * (u[0] * c.drift[0] + u[1] * c.drift[1]) + s[0][0] + s[1][1];
      CHECK(std::abs(identity) <= 1e-12 * (1.0 + std::abs(c.drift[0]) + std::abs(c.drift[1])));
    }
  }
}

TEST_CASE("arc points stay inside the arc") {
  for (const auto& m : continuous_models()) {
    const auto arc = modulator_arc(m);
    for (const auto& u : arc_points(m, 300, 0.01)) {
      CHECK(u.angle() > arc[0] + 0.0099);
      CHECK(u.angle() < arc[1] - 0.0099);
      CHECK(wall_margin(m, u[0], u[1]) > 0.0);
    }
  }
}

TEST_CASE("printed Lyapunov expressions at the worked points") {
  const double s = 1.0 / std::sqrt(2.0);
  CHECK(lyapunov_LV_analytic(FreeBessel2D{}, UnitVector(s, s)) ==
        doctest::Approx(3.0 * std::sqrt(2.0)));
  CHECK(lyapunov_LV_analytic(FreeBessel2D{}, UnitVector(0.6, 0.8)) == doctest::Approx(3.444));
  CHECK(lyapunov_LV_analytic(RadialDunkl{RootSystem(RootKind::A1), 0.5}, UnitVector(1.0, 0.0)) ==
        doctest::Approx(-4.5));
}

TEST_CASE("exact generator of V agrees with the hand derivation") {
  for (const auto& m : continuous_models()) {
    for (const auto& u : arc_points(m, 100, 1e-2)) {
      const double ref = reference_LV(m, u[0], u[1]);
      CHECK(lyapunov_LV_exact(m, u) == doctest::Approx(ref).epsilon(1e-10));
      const double fd = apply_generator(
          m, [&](double x, double y) { return lyapunov_V(m, x, y); }, u, 1e-5);
      CHECK(std::abs(fd - ref) / (1.0 + std::abs(ref)) <= 1e-5);
    }
  }
  // Bessel closed form (1/2)(x + y)(-9 + 21xy).
  CHECK(lyapunov_LV_exact(FreeBessel2D{}, UnitVector(0.6, 0.8)) ==
        doctest::Approx(0.5 * 1.4 * (-9.0 + 21.0 * 0.48)));
}

TEST_CASE("generator kills constants and reproduces the drift on linear functions") {
  for (const auto& m : continuous_models()) {
    for (const auto& u : arc_points(m, 10, 0.05)) {
      CHECK(apply_generator(m, [](double, double) { return 3.0; }, u, 1e-4) ==
            doctest::Approx(0.0));
      const auto b = modulator_coeffs(m, u).drift;
      CHECK(apply_generator(m, [](double x, double) { return x; }, u, 1e-4) ==
            doctest::Approx(b[0]).epsilon(1e-7));
    }
  }
  CHECK_THROWS_AS(apply_generator(FreeBessel2D{}, [](double, double) { return 0.0; },
                                  UnitVector(0.6, 0.8), 0.0),
                  ValidationError);
  CHECK_THROWS_AS(apply_generator(FreeBessel2D{}, [](double x, double) { return x; },
                                  UnitVector::from_angle(1e-3), 0.01),
                  WallError);
}

TEST_CASE("simulation rejects starts outside the state space") {
  SimulationConfig c;
  c.dt = 1e-3;
  c.t_max = 0.1;
  CHECK_THROWS_AS(simulate_bessel_map(c, UnitVector(1.0, 0.0), 0), ValidationError);
  c.model = RadialDunkl{RootSystem(RootKind::A1), 1.0};
  const double s = 1.0 / std::sqrt(2.0);
  CHECK_THROWS_AS(simulate_dunkl_map(c, UnitVector(s, s), 0), ValidationError);
  CHECK_THROWS_AS(simulate_ssmp_path(c, {1.0, 1.0}, 0), ValidationError);
}

TEST_CASE("simulated MAP paths stay on the sphere and inside the arc") {
  for (const auto& m : continuous_models()) {
    SimulationConfig c;
    c.model = m;
    c.dt = 1e-3;
    c.t_max = 5.0;
    c.master_seed = 4;
    const auto p = simulate_map_path(c, arc_midpoint(m), 0);
    CHECK(validate_map_path(p).pass);
    CHECK_FALSE(p.kill_index);
    for (std::size_t i = 0; i < p.size(); ++i) {
      const auto th = p.theta_at(i);
      CHECK(wall_margin(m, th[0], th[1]) > 0.0);
    }
  }
}

TEST_CASE("record_every thins the stored path without changing it") {
  SimulationConfig c;
  c.dt = 1e-3;
  c.t_max = 1.0;
  c.master_seed = 2;
  const auto full = simulate_map_path(c, UnitVector::from_angle(0.5), 0);
  c.record_every = 10;
  const auto thin = simulate_map_path(c, UnitVector::from_angle(0.5), 0);
  REQUIRE(thin.size() == 101);
  for (std::size_t i = 0; i < thin.size(); ++i) {
    CHECK(thin.xi[i] == full.xi[10 * i]);
    CHECK(thin.grid[i] == doctest::Approx(full.grid[10 * i]));
  }
}

TEST_CASE("Bessel ordinate at time 1 is Normal(2, 1)") {
  SimulationConfig c;
  c.dt = 1e-3;
  c.t_max = 1.0;
  c.master_seed = 21;
  c.n_paths = 2000;
  std::vector<double> xi1;
  for (const auto& p : simulate_map_paths(c, UnitVector::from_angle(0.4), 1)) {
    xi1.push_back(p.xi.back());
  }
  auto r = stats::ks_one_sample(
      xi1, [](double x) { return 0.5 * std::erfc(-(x - 2.0) / std::sqrt(2.0)); });
  CHECK(r.statistic < 0.04);
}

TEST_CASE("free Bessel ssMp starts at x0 and has the dimension-6 radial mean") {
  SimulationConfig c;
  c.dt = 0.25;
  c.t_max = 1.0;
  c.master_seed = 5;
  std::vector<double> r2;
  for (std::size_t i = 0; i < 4000; ++i) {
    auto p = simulate_free_bessel_ssmp(c, {1.0, 1.0}, i);
    CHECK(p.x_at(0)[0] == 1.0);
    CHECK(p.x_at(0)[1] == 1.0);
    const auto x = p.x_at(p.size() - 1);
    r2.push_back(x[0] * x[0] + x[1] * x[1]);
  }
  auto ci = stats::mc_mean_ci(r2, 0.999);
  CHECK(std::abs(ci.mean - 8.0) <= ci.half_width);
}

TEST_CASE("Dunkl A1 ssMp has the dimension 2 + 2 gamma radial mean") {
  SimulationConfig c;
  c.model = RadialDunkl{RootSystem(RootKind::A1), 1.0};
  c.dt = 1e-3;
  c.t_max = 1.0;
  c.master_seed = 6;
  std::vector<double> r2;
  for (std::size_t i = 0; i < 2000; ++i) {
    auto p = simulate_dunkl_ssmp(c, {2.0, 1.0}, i);
    const auto x = p.x_at(p.size() - 1);
    r2.push_back(x[0] * x[0] + x[1] * x[1]);
    CHECK(x[0] > x[1]);
  }
  auto ci = stats::mc_mean_ci(r2, 0.999);
  CHECK(std::abs(ci.mean - 9.0) <= ci.half_width + 0.05);
}

}  // TEST_SUITE
