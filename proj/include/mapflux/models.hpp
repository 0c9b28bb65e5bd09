#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

#include "mapflux/config.hpp"
#include "mapflux/core.hpp"
#include "mapflux/model_spec.hpp"
#include "mapflux/random.hpp"

namespace mapflux::models {

using Vec2 = std::array<double, 2>;
using Mat2 = std::array<std::array<double, 2>, 2>;

struct CoefficientPair {
  Vec2 drift{};
  Mat2 diffusion{};
};

/// Maximum number of Brownian-bridge halvings of a rejected Euler step.
inline constexpr int kMaxHalvings = 20;

/// sigma(theta) = [[y^2, -xy], [-xy, x^2]], the tangential projection shared by both models.
Mat2 sphere_diffusion(const UnitVector& theta);

/// b = (1/x - 5x/2, 1/y - 5y/2). Throws WallError when min(x, y) <= wall_delta.
CoefficientPair bessel_modulator_coeffs(const UnitVector& theta, double wall_delta = 1e-6);

/// A_i = sum_alpha k alpha_i / <alpha, theta>. Throws WallError when some
/// |<alpha, theta>| <= wall_delta; `root()` of the error is the root index.
Vec2 dunkl_A(const UnitVector& theta, const RootSystem& rs, double k, double wall_delta = 1e-6);

/// A_i - theta_i <theta, A> - theta_i / 2.
Vec2 dunkl_modulator_drift(const UnitVector& theta, const RootSystem& rs, double k,
                           double wall_delta = 1e-6);

/// <theta, A> + n - 2. Only n == 2 is supported.
double dunkl_ordinate_drift(const UnitVector& theta, const RootSystem& rs, double k, int n = 2,
                            double wall_delta = 1e-6);

/// Drift and diffusion of the modulator for either continuous model.
CoefficientPair modulator_coeffs(const ModelSpec& model, const UnitVector& theta,
                                 double wall_delta = 1e-6);

/// Drift of the ordinate: 2 for the free Bessel MAP, <theta, A> for radial Dunkl.
double ordinate_drift(const ModelSpec& model, const UnitVector& theta, double wall_delta = 1e-6);

/// Smallest wall pairing of a direction: min(x, y) for the Bessel quadrant,
/// min_alpha <alpha, u> / |u| for a Weyl chamber. Positive inside.
double wall_margin(const ModelSpec& model, double x, double y);

/// Midpoint of the modulator arc.
UnitVector arc_midpoint(const ModelSpec& model);

/// `n` points of the open arc from a golden-ratio sequence, kept `margin`
/// radians away from both ends.
std::vector<UnitVector> arc_points(const ModelSpec& model, std::size_t n, double margin);

// --- MAP simulation ------------------------------------------------------

/// Euler-Maruyama for (xi, Theta) with renormalisation of Theta after each
/// step; xi and Theta share the Gaussian increments. Rejected steps are split
/// by a Brownian bridge (at most kMaxHalvings times). `path_index` only labels
/// error messages.
MapPath simulate_map(const SimulationConfig& config, const UnitVector& theta0, Rng& rng,
                     std::size_t path_index = 0);

/// One path drawn from seed_stream(config.master_seed, path_index).
MapPath simulate_map_path(const SimulationConfig& config, const UnitVector& theta0,
                          std::size_t path_index);

/// config.n_paths paths in index order; identical for any worker count.
std::vector<MapPath> simulate_map_paths(const SimulationConfig& config, const UnitVector& theta0,
                                        std::size_t workers);

/// simulate_map_path with the model forced to FreeBessel2D.
MapPath simulate_bessel_map(const SimulationConfig& config, const UnitVector& theta0,
                            std::size_t path_index);
/// simulate_map_path for a RadialDunkl config.
MapPath simulate_dunkl_map(const SimulationConfig& config, const UnitVector& theta0,
                           std::size_t path_index);

// --- ssMp simulation -----------------------------------------------------

/// Each coordinate is the norm of an exactly sampled 3-d Brownian motion started at (x0_i, 0, 0).
SsmpPath simulate_free_bessel_ssmp(const SimulationConfig& config, const Vec2& x0, Rng& rng);
SsmpPath simulate_free_bessel_ssmp(const SimulationConfig& config, const Vec2& x0,
                                   std::size_t path_index);

/// Euler-Maruyama for dX = dW + sum_alpha k alpha / <alpha, X> dt with step halving near walls.
SsmpPath simulate_dunkl_ssmp(const SimulationConfig& config, const Vec2& x0, Rng& rng,
                             std::size_t path_index = 0);
SsmpPath simulate_dunkl_ssmp(const SimulationConfig& config, const Vec2& x0,
                             std::size_t path_index);

SsmpPath simulate_ssmp_path(const SimulationConfig& config, const Vec2& x0,
                            std::size_t path_index);

// --- generator / Lyapunov ------------------------------------------------

/// V = x^3 + y^3 (Bessel, A1, B2, C2) or (x^3 + y^3)^2 (D2).
double lyapunov_V(const ModelSpec& model, double x, double y);

/// Closed-form LV expressions exactly as printed in the source derivation.
/// They do not agree with the generator applied to V; see lyapunov_LV_exact.
double lyapunov_LV_analytic(const ModelSpec& model, const UnitVector& theta);

/// b . grad V + (1/2) sigma : Hess V with closed-form derivatives of V.
double lyapunov_LV_exact(const ModelSpec& model, const UnitVector& theta);

/// Central finite differences of V at theta combined with the model's b and
/// a = sigma. Checks sigma sigma^T == sigma to 1e-12 before using it.
double apply_generator(const ModelSpec& model, const std::function<double(double, double)>& V,
                       const UnitVector& theta, double h, double wall_delta = 1e-6);

}  // namespace mapflux::models
