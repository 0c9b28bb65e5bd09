#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mapflux/config.hpp"
#include "mapflux/core.hpp"
#include "mapflux/random.hpp"
#include "mapflux/stats.hpp"

namespace mapflux::duality {

/// s -> (xi_{t-s} - xi_t, Theta_{t-s}) for s in [0, t] on the reversed grid.
/// t is snapped to the last grid instant at or before it.
MapPath time_reverse(const MapPath& path, double t);

/// Histogram of modulator angles over the recorded instants after burn_in.
void add_angle_occupation(stats::Histogram& hist, const MapPath& path, double burn_in);

/// Draws initial directions from a normalized angle histogram: first a bin
/// proportional to its mass, then a uniform angle inside it.
class StationaryInitializer {
 public:
  explicit StationaryInitializer(stats::Histogram angles);

  const stats::Histogram& histogram() const noexcept { return hist_; }
  double sample_angle(Rng& rng) const;
  UnitVector sample(Rng& rng) const { return UnitVector::from_angle(sample_angle(rng)); }

 private:
  stats::Histogram hist_;
  std::vector<double> cdf_;
};

struct StationaryOptions {
  std::size_t chains = 256;
  double run_time = 100.0;
  double burn_in = 50.0;
  double dt = 1e-3;
  std::size_t bins = 256;
  std::size_t record_every = 10;
};

/// Occupation histogram of `chains` modulator runs from the arc midpoint,
/// each run for burn_in + run_time, counted after burn_in. Chain i uses
/// seed_stream(config.master_seed, i); only model, wall_delta and master_seed
/// of `config` are used.
StationaryInitializer build_stationary_initializer(const SimulationConfig& config,
                                                   const StationaryOptions& options,
                                                   std::size_t workers);

/// TV distance between the histogram and its mirror image about the arc
/// midpoint, after merging groups of `coarsen` bins.
double mirror_tv(const stats::Histogram& hist, std::size_t coarsen);

struct InvarianceReport {
  double tv = 0.0;
  std::size_t samples = 0;
  double evolve_time = 0.0;
  bool pass = false;
};

/// Draws `samples` angles from pi-hat, evolves each modulator for
/// `evolve_time`, re-histograms on the same bins and compares after merging
/// groups of `coarsen` bins; pass iff TV < threshold.
InvarianceReport invariance_check(const SimulationConfig& config, const StationaryInitializer& init,
                                  std::size_t samples, double evolve_time, std::size_t coarsen,
                                  double threshold, std::size_t workers);

struct ReversalReport {
  double t = 0.0;
  std::size_t n = 0;
  double ks_stat = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

/// Simulates 2n stationary-start paths up to t with config.dt: the first n
/// give g_under_t, the other n give t - g_bar_t (exact grid arg-extrema, eps =
/// config.epsilon_zero). Path i uses seed_stream(config.master_seed, i) for
/// both its start angle and its increments.
ReversalReport reversal_check(const SimulationConfig& config, const StationaryInitializer& init,
                              double t, std::size_t n, std::size_t workers);

/// KS comparison of two ready-made samples.
ReversalReport reversal_from_samples(double t, const std::vector<double>& g_under,
                                     const std::vector<double>& t_minus_g_bar);

}  // namespace mapflux::duality
