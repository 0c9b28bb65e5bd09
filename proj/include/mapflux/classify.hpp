#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mapflux/config.hpp"
#include "mapflux/core.hpp"

namespace mapflux::classify {

enum class Verdict { DriftsPlus, DriftsMinus, Oscillates, Inconclusive };

std::string verdict_name(Verdict v);

/// Reduced per-path evidence; the path itself can be discarded afterwards.
struct PathSummary {
  double horizon = 0.0;
  double burn_in = 0.0;
  double xi_burn = 0.0;
  double xi_end = 0.0;
  /// g_bar / g_under at each horizon of the ladder (last entry = horizon).
  std::vector<double> horizons;
  std::vector<double> g_bar;
  std::vector<double> g_under;
};

/// Reads the path at burn_in, at every horizon and at its final instant.
PathSummary summarize_path(const MapPath& path, std::span<const double> horizons, double burn_in,
                           double eps);

/// Summary of (-xi, Theta): ordinate values negated, g_bar and g_under swapped.
PathSummary negate(PathSummary s);

struct SlopeEstimate {
  double slope = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t n_paths = 0;
};

inline constexpr std::size_t kMinPaths = 30;

/// Mean and normal-approximation interval of (xi_T - xi_burn) / (T - burn_in).
SlopeEstimate slln_slope(std::span<const PathSummary> summaries, double level = 0.99);
SlopeEstimate slln_slope(std::span<const MapPath> paths, double burn_in, double level = 0.99);

struct Thresholds {
  double near_one = 0.9;
  double near_zero = 0.1;
  double proxy_tolerance = 0.1;
  double level = 0.99;
  /// Both ratios must exceed this for an oscillation verdict.
  double oscillation_floor = 0.1;
};

struct Classification {
  Verdict verdict = Verdict::Inconclusive;
  double slope = 0.0;
  double slope_lo = 0.0;
  double slope_hi = 0.0;
  double gbar_ratio = 0.0;
  double gunder_ratio = 0.0;
  double proxy_up = 0.0;
  double proxy_down = 0.0;
  /// Proxies agree with the verdict within the proxy tolerance.
  bool consistent = false;
  std::vector<double> lambdas;
  /// proxy_up_matrix[i][j] = mean exp(-lambdas[i] g_bar at horizons[j]); likewise for g_under.
  std::vector<std::vector<double>> proxy_up_matrix;
  std::vector<std::vector<double>> proxy_down_matrix;
  std::vector<double> horizons;
  std::size_t n_paths = 0;
};

/// Slope decides the sign; the ratios at the final horizon must corroborate:
///   DriftsPlus   slope CI > 0, gbar_ratio >= near_one, gunder_ratio <= near_zero
///   DriftsMinus  mirror image
///   Oscillates   slope CI contains 0, both ratios > oscillation_floor
/// Proxies use the smallest lambda and the largest horizon.
Classification trichotomy(std::span<const PathSummary> summaries, std::span<const double> lambdas,
                          const Thresholds& thresholds = {});

/// Simulates config.n_paths paths (continuous model from the arc midpoint, or
/// the discrete oracle), summarizes each as it is produced and classifies.
/// `negate_ordinate` classifies (-xi, Theta) instead.
Classification classify_model(const SimulationConfig& config, std::span<const double> horizons,
                              std::span<const double> lambdas, double eps, bool negate_ordinate,
                              std::size_t workers, const Thresholds& thresholds = {});

}  // namespace mapflux::classify
