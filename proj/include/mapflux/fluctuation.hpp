#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mapflux/core.hpp"
#include "mapflux/random.hpp"

namespace mapflux::fluctuation {

struct Extrema {
  ScalarPath sup;
  ScalarPath inf;
};

Extrema running_extrema(const ScalarPath& path);

/// U_t = sup_{s<=t} xi_s - xi_t.
ScalarPath reflected_process(const ScalarPath& path);

/// xi_t - inf_{s<=t} xi_s, the reflection used for the infimum.
ScalarPath reflected_at_infimum(const ScalarPath& path);

/// Largest grid time s <= t with U_s <= eps.
double last_time_at_supremum(const ScalarPath& path, double t, double eps);
double last_time_at_infimum(const ScalarPath& path, double t, double eps);

struct ExcursionRecord {
  double start_time = 0.0;
  std::optional<double> end_time;
  double max_height = 0.0;
  std::optional<double> lifetime;
  bool censored = false;
};

/// Maximal runs of U > eps. Each run starts at the zero-set instant just before
/// it and ends at the first zero-set instant after; a run reaching the horizon
/// is kept as censored.
std::vector<ExcursionRecord> excursions(const ScalarPath& reflected, double eps);

struct LadderEntry {
  /// Number of completed excursions before this instant.
  double local_time = 0.0;
  double time = 0.0;
  double xi_plus = 0.0;
  std::vector<double> theta_plus;
};

struct LadderSample {
  std::vector<LadderEntry> entries;
};

/// One entry per grid instant of the eps-zero set of the reflected ordinate.
LadderSample ladder_samples(const MapPath& path, double eps);

struct FluctuationSummary {
  double g_bar = 0.0;
  double g_under = 0.0;
  double sup = 0.0;
  double inf = 0.0;
  double horizon = 0.0;
};

/// All four functionals at time t in one pass.
FluctuationSummary summarize(const ScalarPath& path, double t, double eps);

/// (g_bar_T, g_under_T) for each T in `horizons` (nondecreasing) in one pass.
struct HorizonProfile {
  std::vector<double> g_bar;
  std::vector<double> g_under;
};
HorizonProfile horizon_profile(const ScalarPath& path, std::span<const double> horizons, double eps);

struct ExponentialSample {
  double e_q = 0.0;
  double g_bar = 0.0;
  double g_under = 0.0;
  double after_sup = 0.0;  // e_q - g_bar
};

struct ExponentialSamples {
  std::vector<ExponentialSample> samples;
  std::size_t rejections = 0;
};

/// For each path draws e_q ~ Exp(q); e_q beyond the horizon is rejected and
/// counted, otherwise the functionals are read at the last grid instant <= e_q.
/// Every path horizon must be at least 10 / q.
ExponentialSamples sample_g_at_exponential(std::span<const MapPath> paths, double q, double eps,
                                           Rng& rng);

struct LaplaceEstimate {
  double lambda = 0.0;
  double q = 0.0;
  double estimate = 1.0;
  double stderr_ = 0.0;
  std::size_t n_samples = 0;
  std::size_t rejection_count = 0;
};

/// Sample mean of exp(-lambda s) and its standard error.
LaplaceEstimate laplace_estimate(std::span<const double> samples, double lambda, double q = 0.0,
                                 std::size_t rejections = 0);

struct FinalExcursionMass {
  std::vector<double> lambdas;
  std::vector<double> horizons;
  /// estimate[i][j] = mean exp(-lambdas[i] g_bar_{horizons[j]}).
  std::vector<std::vector<double>> estimate;
  std::vector<std::vector<double>> stderr_;
  bool monotone_in_lambda = true;
  bool monotone_in_horizon = true;
  /// Value at the smallest lambda and the largest horizon.
  double proxy = 1.0;
};

/// Builds the (lambda, T) matrix from per-path g_bar values; g_bar[p][j] is
/// path p at horizons[j]. lambdas must be strictly decreasing and positive,
/// horizons strictly increasing.
FinalExcursionMass final_excursion_mass_estimate(const std::vector<std::vector<double>>& g_bar,
                                                 std::span<const double> lambdas,
                                                 std::span<const double> horizons);

/// Same, computing g_bar from the paths.
FinalExcursionMass final_excursion_mass_estimate(std::span<const MapPath> paths,
                                                 std::span<const double> lambdas,
                                                 std::span<const double> horizons, double eps);

/// Two-dimensional histogram over (angle of theta_plus, xi_plus); masses row-major by angle.
struct OccupationHistogram {
  std::vector<double> angle_edges;
  std::vector<double> height_edges;
  std::vector<double> masses;

  static OccupationHistogram uniform(double angle_lo, double angle_hi, std::size_t angle_bins,
                                     double height_lo, double height_hi, std::size_t height_bins);
  double& at(std::size_t a, std::size_t h) { return masses[a * (height_edges.size() - 1) + h]; }
  double at(std::size_t a, std::size_t h) const {
    return masses[a * (height_edges.size() - 1) + h];
  }
  void add(double angle, double height, double weight);
  double total() const;
};

/// Deposits each clock increment between consecutive ladder entries at the
/// state of the earlier entry. Values outside the edges are clamped.
void accumulate_occupation(OccupationHistogram& hist, const LadderSample& ladder);

OccupationHistogram occupation_measure(std::span<const LadderSample> ladders,
                                       OccupationHistogram bins);

}  // namespace mapflux::fluctuation
