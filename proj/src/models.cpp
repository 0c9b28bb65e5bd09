#include "mapflux/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "mapflux/errors.hpp"
#include "mapflux/parallel.hpp"

namespace mapflux::models {

namespace {

void require_2d(const UnitVector& theta) {
  if (theta.dim() != 2) throw ValidationError("only two-dimensional models are supported");
}

struct Drift {
  double bx;
  double by;
  double xi;
};

// Modulator of the free Bessel MAP on the open quarter circle.
struct BesselModulator {
  Drift drift(double x, double y) const {
    return {1.0 / x - 2.5 * x, 1.0 / y - 2.5 * y, 2.0};
  }
  double margin(double x, double y) const { return std::min(x, y); }
};

// Modulator of a radial Dunkl MAP; `margin` is the smallest root pairing.
struct DunklModulator {
  std::vector<std::array<double, 2>> roots;
  double k;

  Drift drift(double x, double y) const {
    double a1 = 0.0;
    double a2 = 0.0;
    for (const auto& r : roots) {
      const double c = k / (r[0] * x + r[1] * y);
      a1 += c * r[0];
      a2 += c * r[1];
    }
    const double proj = x * a1 + y * a2;
    return {a1 - x * proj - 0.5 * x, a2 - y * proj - 0.5 * y, proj};
  }
  double margin(double x, double y) const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& r : roots) m = std::min(m, r[0] * x + r[1] * y);
    return m;
  }
};

struct StepContext {
  double wall_delta;
  std::size_t path_index;
  double time;
  std::size_t* rejections;
};

[[noreturn]] void exhausted(const StepContext& ctx) {
  std::ostringstream msg;
  msg << "wall retries exhausted on path " << ctx.path_index << " near t = " << ctx.time;
  throw NumericalError(msg.str());
}

// Advances (x, y) over a step of length h with Brownian increment (dwx, dwy)
// and returns the ordinate increment accumulated over the (sub)steps.
template <class Modulator>
double advance_map(const Modulator& m, double& x, double& y, double h, double dwx, double dwy,
                   int depth, Rng& rng, const StepContext& ctx) {
  const Drift d = m.drift(x, y);
  double nx = x + d.bx * h + (y * y * dwx - x * y * dwy);
  double ny = y + d.by * h + (-x * y * dwx + x * x * dwy);
  const double norm = std::hypot(nx, ny);
  nx /= norm;
  ny /= norm;
  if (std::isfinite(nx) && std::isfinite(ny) && m.margin(nx, ny) > ctx.wall_delta) {
    const double inc = x * dwx + y * dwy + d.xi * h;
    x = nx;
    y = ny;
    return inc;
  }
  if (depth >= kMaxHalvings) exhausted(ctx);
  ++*ctx.rejections;
  const double s = std::sqrt(h / 4.0);
  const double zx = s * standard_normal(rng);
  const double zy = s * standard_normal(rng);
  double inc = advance_map(m, x, y, h / 2.0, dwx / 2.0 + zx, dwy / 2.0 + zy, depth + 1, rng, ctx);
  inc += advance_map(m, x, y, h / 2.0, dwx / 2.0 - zx, dwy / 2.0 - zy, depth + 1, rng, ctx);
  return inc;
}

TimeGrid recorded_grid(const SimulationConfig& c) {
  const std::size_t n = c.steps();
  const std::size_t rec = n / c.record_every;
  std::vector<double> times(rec + 1);
  for (std::size_t j = 0; j <= rec; ++j) {
    times[j] = static_cast<double>(j * c.record_every) * c.dt;
  }
  return TimeGrid(std::move(times));
}

template <class Modulator>
MapPath run_map(const Modulator& m, const SimulationConfig& c, const UnitVector& theta0, Rng& rng,
                std::size_t path_index) {
  MapPath path;
  path.grid = recorded_grid(c);
  path.dim = 2;
  path.xi.reserve(path.grid.size());
  path.theta.reserve(2 * path.grid.size());
  double x = theta0[0];
  double y = theta0[1];
  double xi = 0.0;
  path.xi.push_back(xi);
  path.theta.push_back(x);
  path.theta.push_back(y);
  const std::size_t n = c.steps();
  const double sdt = std::sqrt(c.dt);
  StepContext ctx{c.wall_delta, path_index, 0.0, &path.wall_rejections};
  for (std::size_t i = 1; i <= n; ++i) {
    ctx.time = static_cast<double>(i - 1) * c.dt;
    const double dwx = sdt * standard_normal(rng);
    const double dwy = sdt * standard_normal(rng);
    xi += advance_map(m, x, y, c.dt, dwx, dwy, 0, rng, ctx);
    if (i % c.record_every == 0) {
      path.xi.push_back(xi);
      path.theta.push_back(x);
      path.theta.push_back(y);
    }
  }
  if (!std::isfinite(xi)) {
    throw NumericalError("non-finite ordinate on path " + std::to_string(path_index));
  }
  return path;
}

DunklModulator dunkl_modulator(const RadialDunkl& d) {
  return DunklModulator{d.root_system.positive_roots(), d.k};
}

void require_inside(const ModelSpec& model, double x, double y, double wall_delta,
                    const char* what) {
  if (!(wall_margin(model, x, y) > wall_delta)) {
    throw ValidationError(std::string(what) + " is not strictly inside the state space of " +
                          model_name(model));
  }
}

}  // namespace

Mat2 sphere_diffusion(const UnitVector& theta) {
  require_2d(theta);
  const double x = theta[0];
  const double y = theta[1];
  return {{{y * y, -x * y}, {-x * y, x * x}}};
}

CoefficientPair bessel_modulator_coeffs(const UnitVector& theta, double wall_delta) {
  require_2d(theta);
  for (std::size_t i = 0; i < 2; ++i) {
    if (!(theta[i] > wall_delta)) {
      std::ostringstream msg;
      msg << "Bessel modulator coordinate " << i << " = " << theta[i] << " within "
          << wall_delta << " of the wall";
      throw WallError(msg.str(), theta[i], i);
    }
  }
  const Drift d = BesselModulator{}.drift(theta[0], theta[1]);
  return {{d.bx, d.by}, sphere_diffusion(theta)};
}

Vec2 dunkl_A(const UnitVector& theta, const RootSystem& rs, double k, double wall_delta) {
  require_2d(theta);
  Vec2 a{0.0, 0.0};
  const auto& roots = rs.positive_roots();
  for (std::size_t r = 0; r < roots.size(); ++r) {
    const double pairing = roots[r][0] * theta[0] + roots[r][1] * theta[1];
    if (!(std::abs(pairing) > wall_delta)) {
      std::ostringstream msg;
      msg << rs.name() << " root (" << roots[r][0] << "," << roots[r][1]
          << ") pairs to " << pairing << " with theta";
      throw WallError(msg.str(), pairing, r);
    }
    a[0] += k * roots[r][0] / pairing;
    a[1] += k * roots[r][1] / pairing;
  }
  return a;
}

Vec2 dunkl_modulator_drift(const UnitVector& theta, const RootSystem& rs, double k,
                           double wall_delta) {
  const Vec2 a = dunkl_A(theta, rs, k, wall_delta);
  const double proj = theta[0] * a[0] + theta[1] * a[1];
  return {a[0] - theta[0] * proj - theta[0] / 2.0, a[1] - theta[1] * proj - theta[1] / 2.0};
}

double dunkl_ordinate_drift(const UnitVector& theta, const RootSystem& rs, double k, int n,
                            double wall_delta) {
  if (n != 2) throw ValidationError("radial Dunkl models are implemented for n = 2 only");
  const Vec2 a = dunkl_A(theta, rs, k, wall_delta);
  return theta[0] * a[0] + theta[1] * a[1] + static_cast<double>(n) - 2.0;
}

CoefficientPair modulator_coeffs(const ModelSpec& model, const UnitVector& theta,
                                 double wall_delta) {
  if (std::holds_alternative<FreeBessel2D>(model)) return bessel_modulator_coeffs(theta, wall_delta);
  if (const auto* d = std::get_if<RadialDunkl>(&model)) {
    return {dunkl_modulator_drift(theta, d->root_system, d->k, wall_delta),
            sphere_diffusion(theta)};
  }
  throw ValidationError("the discrete oracle has no diffusion coefficients");
}

double ordinate_drift(const ModelSpec& model, const UnitVector& theta, double wall_delta) {
  if (std::holds_alternative<FreeBessel2D>(model)) {
    bessel_modulator_coeffs(theta, wall_delta);
    return 2.0;
  }
  if (const auto* d = std::get_if<RadialDunkl>(&model)) {
    return dunkl_ordinate_drift(theta, d->root_system, d->k, 2, wall_delta);
  }
  throw ValidationError("the discrete oracle has no ordinate drift");
}

double wall_margin(const ModelSpec& model, double x, double y) {
  const double norm = std::hypot(x, y);
  if (!(norm > 0.0)) return -1.0;
  x /= norm;
  y /= norm;
  if (std::holds_alternative<FreeBessel2D>(model)) return BesselModulator{}.margin(x, y);
  if (const auto* d = std::get_if<RadialDunkl>(&model)) return dunkl_modulator(*d).margin(x, y);
  throw ValidationError("the discrete oracle has no walls");
}

UnitVector arc_midpoint(const ModelSpec& model) {
  const auto arc = modulator_arc(model);
  return UnitVector::from_angle(0.5 * (arc[0] + arc[1]));
}

std::vector<UnitVector> arc_points(const ModelSpec& model, std::size_t n, double margin) {
  const auto arc = modulator_arc(model);
  const double lo = arc[0] + margin;
  const double width = arc[1] - arc[0] - 2.0 * margin;
  if (!(width > 0.0)) throw ValidationError("arc margin leaves no interior");
  const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
  std::vector<UnitVector> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = std::fmod(0.5 + golden * static_cast<double>(i), 1.0);
    pts.push_back(UnitVector::from_angle(lo + u * width));
  }
  return pts;
}

MapPath simulate_map(const SimulationConfig& config, const UnitVector& theta0, Rng& rng,
                     std::size_t path_index) {
  validate_config(config);
  require_2d(theta0);
  require_inside(config.model, theta0[0], theta0[1], config.wall_delta, "theta0");
  if (std::holds_alternative<FreeBessel2D>(config.model)) {
    return run_map(BesselModulator{}, config, theta0, rng, path_index);
  }
  if (const auto* d = std::get_if<RadialDunkl>(&config.model)) {
    return run_map(dunkl_modulator(*d), config, theta0, rng, path_index);
  }
  throw ValidationError("use oracle::simulate_discrete_map for the discrete oracle");
}

MapPath simulate_map_path(const SimulationConfig& config, const UnitVector& theta0,
                          std::size_t path_index) {
  Rng rng = seed_stream(config.master_seed, path_index);
  return simulate_map(config, theta0, rng, path_index);
}

std::vector<MapPath> simulate_map_paths(const SimulationConfig& config, const UnitVector& theta0,
                                        std::size_t workers) {
  validate_config(config);
  std::vector<MapPath> out(config.n_paths);
  parallel_for(config.n_paths, workers,
               [&](std::size_t i) { out[i] = simulate_map_path(config, theta0, i); });
  return out;
}

MapPath simulate_bessel_map(const SimulationConfig& config, const UnitVector& theta0,
                            std::size_t path_index) {
  SimulationConfig c = config;
  c.model = FreeBessel2D{};
  return simulate_map_path(c, theta0, path_index);
}

MapPath simulate_dunkl_map(const SimulationConfig& config, const UnitVector& theta0,
                           std::size_t path_index) {
  if (!std::holds_alternative<RadialDunkl>(config.model)) {
    throw ValidationError("simulate_dunkl_map needs a radial Dunkl model");
  }
  return simulate_map_path(config, theta0, path_index);
}

SsmpPath simulate_free_bessel_ssmp(const SimulationConfig& config, const Vec2& x0, Rng& rng) {
  validate_config(config);
  if (!(x0[0] > 0.0 && x0[1] > 0.0)) {
    throw ValidationError("free Bessel start must lie in the open first quadrant");
  }
  SsmpPath path;
  path.grid = recorded_grid(config);
  path.dim = 2;
  path.x.reserve(2 * path.grid.size());
  // three-dimensional Brownian motions whose norms are the two coordinates
  std::array<std::array<double, 3>, 2> b{{{x0[0], 0.0, 0.0}, {x0[1], 0.0, 0.0}}};
  path.x.push_back(x0[0]);
  path.x.push_back(x0[1]);
  const double sdt = std::sqrt(config.dt);
  const std::size_t n = config.steps();
  for (std::size_t i = 1; i <= n; ++i) {
    for (auto& comp : b) {
      for (double& v : comp) v += sdt * standard_normal(rng);
    }
    if (i % config.record_every == 0) {
      for (const auto& comp : b) path.x.push_back(std::hypot(comp[0], comp[1], comp[2]));
    }
  }
  return path;
}

SsmpPath simulate_free_bessel_ssmp(const SimulationConfig& config, const Vec2& x0,
                                   std::size_t path_index) {
  Rng rng = seed_stream(config.master_seed, path_index);
  return simulate_free_bessel_ssmp(config, x0, rng);
}

namespace {

double advance_dunkl_ssmp(const DunklModulator& m, double& x, double& y, double h, double dwx,
                          double dwy, int depth, Rng& rng, const StepContext& ctx) {
  double dx = 0.0;
  double dy = 0.0;
  for (const auto& r : m.roots) {
    const double c = m.k / (r[0] * x + r[1] * y);
    dx += c * r[0];
    dy += c * r[1];
  }
  const double nx = x + dx * h + dwx;
  const double ny = y + dy * h + dwy;
  const double norm = std::hypot(nx, ny);
  if (std::isfinite(nx) && std::isfinite(ny) && norm > 0.0 &&
      m.margin(nx / norm, ny / norm) > ctx.wall_delta) {
    x = nx;
    y = ny;
    return 0.0;
  }
  if (depth >= kMaxHalvings) exhausted(ctx);
  ++*ctx.rejections;
  const double s = std::sqrt(h / 4.0);
  const double zx = s * standard_normal(rng);
  const double zy = s * standard_normal(rng);
  advance_dunkl_ssmp(m, x, y, h / 2.0, dwx / 2.0 + zx, dwy / 2.0 + zy, depth + 1, rng, ctx);
  advance_dunkl_ssmp(m, x, y, h / 2.0, dwx / 2.0 - zx, dwy / 2.0 - zy, depth + 1, rng, ctx);
  return 0.0;
}

}  // namespace

SsmpPath simulate_dunkl_ssmp(const SimulationConfig& config, const Vec2& x0, Rng& rng,
                             std::size_t path_index) {
  validate_config(config);
  const auto* d = std::get_if<RadialDunkl>(&config.model);
  if (d == nullptr) throw ValidationError("simulate_dunkl_ssmp needs a radial Dunkl model");
  require_inside(config.model, x0[0], x0[1], config.wall_delta, "x0");
  const DunklModulator m = dunkl_modulator(*d);
  SsmpPath path;
  path.grid = recorded_grid(config);
  path.dim = 2;
  path.x.reserve(2 * path.grid.size());
  double x = x0[0];
  double y = x0[1];
  path.x.push_back(x);
  path.x.push_back(y);
  const double sdt = std::sqrt(config.dt);
  const std::size_t n = config.steps();
  StepContext ctx{config.wall_delta, path_index, 0.0, &path.wall_rejections};
  for (std::size_t i = 1; i <= n; ++i) {
    ctx.time = static_cast<double>(i - 1) * config.dt;
    const double dwx = sdt * standard_normal(rng);
    const double dwy = sdt * standard_normal(rng);
    advance_dunkl_ssmp(m, x, y, config.dt, dwx, dwy, 0, rng, ctx);
    if (i % config.record_every == 0) {
      path.x.push_back(x);
      path.x.push_back(y);
    }
  }
  return path;
}

SsmpPath simulate_dunkl_ssmp(const SimulationConfig& config, const Vec2& x0,
                             std::size_t path_index) {
  Rng rng = seed_stream(config.master_seed, path_index);
  return simulate_dunkl_ssmp(config, x0, rng, path_index);
}

SsmpPath simulate_ssmp_path(const SimulationConfig& config, const Vec2& x0,
                            std::size_t path_index) {
  if (std::holds_alternative<FreeBessel2D>(config.model)) {
    return simulate_free_bessel_ssmp(config, x0, path_index);
  }
  return simulate_dunkl_ssmp(config, x0, path_index);
}

double lyapunov_V(const ModelSpec& model, double x, double y) {
  const double v = x * x * x + y * y * y;
  if (const auto* d = std::get_if<RadialDunkl>(&model); d && d->root_system.kind() == RootKind::D2) {
    return v * v;
  }
  return v;
}

double lyapunov_LV_analytic(const ModelSpec& model, const UnitVector& theta) {
  require_2d(theta);
  const double x = theta[0];
  const double y = theta[1];
  const double s = x + y;
  const double p = x * y;
  const double tail = s * (12.0 * p - 3.0);
  if (std::holds_alternative<FreeBessel2D>(model)) {
    bessel_modulator_coeffs(theta, 0.0);
    return 0.5 * s * (-21.0 + 54.0 * p);
  }
  const auto* d = std::get_if<RadialDunkl>(&model);
  if (d == nullptr) throw ValidationError("no Lyapunov function for the discrete oracle");
  dunkl_A(theta, d->root_system, d->k, 0.0);
  const double k = d->k;
  switch (d->root_system.kind()) {
    case RootKind::A1:
      return 1.5 * s * ((4.0 * k + 2.0) * p - 1.0) + tail;
    case RootKind::B2:
      return 6.0 * k / s * (8.0 * p * p - 1.0) - 1.5 * s * (x - y) * (x - y) + tail;
    case RootKind::C2:
      return 12.0 * k / s * (6.0 * p * p - 1.0) - 1.5 * (x - y) * (x - y) * s + tail;
    case RootKind::D2:
      return 48.0 * k * p * p * (1.0 - p) + 3.0 * (4.0 * p * p - 1.0) * (1.0 - p) +
             6.0 * s * s * (1.0 - p) * (4.0 * p - 1.0) + tail;
  }
  return 0.0;
}

double lyapunov_LV_exact(const ModelSpec& model, const UnitVector& theta) {
  const CoefficientPair c = modulator_coeffs(model, theta, 0.0);
  const double x = theta[0];
  const double y = theta[1];
  double gx = 3.0 * x * x;
  double gy = 3.0 * y * y;
  double hxx = 6.0 * x;
  double hyy = 6.0 * y;
  double hxy = 0.0;
  if (const auto* d = std::get_if<RadialDunkl>(&model); d && d->root_system.kind() == RootKind::D2) {
    const double v = x * x * x + y * y * y;
    hxx = 18.0 * x * x * x * x + 12.0 * x * v;
    hyy = 18.0 * y * y * y * y + 12.0 * y * v;
    hxy = 18.0 * x * x * y * y;
    gx *= 2.0 * v;
    gy *= 2.0 * v;
  }
  const auto& a = c.diffusion;
  return c.drift[0] * gx + c.drift[1] * gy +
         0.5 * (a[0][0] * hxx + 2.0 * a[0][1] * hxy + a[1][1] * hyy);
}

double apply_generator(const ModelSpec& model, const std::function<double(double, double)>& V,
                       const UnitVector& theta, double h, double wall_delta) {
  if (!(h > 0.0)) throw ValidationError("finite-difference step must be positive");
  const CoefficientPair c = modulator_coeffs(model, theta, wall_delta);
  const auto& s = c.diffusion;
  // a = sigma sigma^T must reduce to sigma
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double ss = s[i][0] * s[j][0] + s[i][1] * s[j][1];
      if (std::abs(ss - s[i][j]) > 1e-12) {
        throw NumericalError("diffusion matrix is not idempotent at the requested point");
      }
    }
  }
  const double x = theta[0];
  const double y = theta[1];
  if (!(wall_margin(model, x + h, y + h) > 0.0 && wall_margin(model, x - h, y - h) > 0.0 &&
        wall_margin(model, x + h, y - h) > 0.0 && wall_margin(model, x - h, y + h) > 0.0)) {
    throw WallError("finite-difference stencil crosses a wall", h, 0);
  }
  const double f0 = V(x, y);
  const double fxp = V(x + h, y);
  const double fxm = V(x - h, y);
  const double fyp = V(x, y + h);
  const double fym = V(x, y - h);
  const double dx = (fxp - fxm) / (2.0 * h);
  const double dy = (fyp - fym) / (2.0 * h);
  const double dxx = (fxp - 2.0 * f0 + fxm) / (h * h);
  const double dyy = (fyp - 2.0 * f0 + fym) / (h * h);
  const double dxy = (V(x + h, y + h) - V(x + h, y - h) - V(x - h, y + h) + V(x - h, y - h)) /
                     (4.0 * h * h);
  return c.drift[0] * dx + c.drift[1] * dy + 0.5 * (s[0][0] * dxx + 2.0 * s[0][1] * dxy + s[1][1] * dyy);
}

}  // namespace mapflux::models
