#include "mapflux/duality.hpp"

#include <algorithm>
#include <cmath>

#include "mapflux/errors.hpp"
#include "mapflux/fluctuation.hpp"
#include "mapflux/models.hpp"
#include "mapflux/parallel.hpp"

namespace mapflux::duality {

namespace {

// Seed families kept apart from the reversal paths, which use master_seed itself.
constexpr std::uint64_t kChainSalt = 0x5354'4154'494f'4e00ULL;
constexpr std::uint64_t kInvarianceSalt = 0x494e'5641'5249'414eULL;

stats::Histogram arc_histogram(const ModelSpec& model, std::size_t bins) {
  const auto arc = modulator_arc(model);
  return stats::Histogram::uniform(arc[0], arc[1], bins);
}

double angle_of(std::span<const double> th) { return std::atan2(th[1], th[0]); }

}  // namespace

MapPath time_reverse(const MapPath& path, double t) {
  if (path.size() == 0) throw ValidationError("cannot reverse an empty path");
  const std::size_t end = path.grid.index_at_or_before(t);
  if (end >= path.size()) throw OutOfRangeError("reversal time beyond the alive part of the path");
  MapPath out;
  out.dim = path.dim;
  std::vector<double> times(end + 1);
  out.xi.resize(end + 1);
  out.theta.resize((end + 1) * path.dim);
  for (std::size_t j = 0; j <= end; ++j) {
    times[j] = path.grid[end] - path.grid[end - j];
    out.xi[j] = path.xi[end - j] - path.xi[end];
    auto th = path.theta_at(end - j);
    std::copy(th.begin(), th.end(), out.theta.begin() + static_cast<long>(j * path.dim));
  }
  times[0] = 0.0;
  out.grid = TimeGrid(std::move(times));
  return out;
}

void add_angle_occupation(stats::Histogram& hist, const MapPath& path, double burn_in) {
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (path.grid[i] >= burn_in) hist.add(angle_of(path.theta_at(i)));
  }
}

StationaryInitializer::StationaryInitializer(stats::Histogram angles) : hist_(std::move(angles)) {
  const double total = hist_.total();
  if (!(total > 0.0)) throw ValidationError("stationary initializer needs a nonempty histogram");
  cdf_.resize(hist_.masses.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < cdf_.size(); ++i) {
    if (hist_.masses[i] < 0.0) throw ValidationError("histogram masses must be nonnegative");
    acc += hist_.masses[i];
    cdf_[i] = acc / total;
  }
  cdf_.back() = 1.0;
}

double StationaryInitializer::sample_angle(Rng& rng) const {
  const double u = uniform01(rng);
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  auto bin = static_cast<std::size_t>(std::distance(cdf_.begin(), it));
  bin = std::min(bin, cdf_.size() - 1);
  while (hist_.masses[bin] == 0.0 && bin > 0) --bin;
  const double lo = hist_.edges[bin];
  const double hi = hist_.edges[bin + 1];
  return lo + (hi - lo) * uniform01(rng);
}

StationaryInitializer build_stationary_initializer(const SimulationConfig& config,
                                                   const StationaryOptions& options,
                                                   std::size_t workers) {
  if (options.chains == 0) throw ValidationError("need at least one chain");
  SimulationConfig c = config;
  c.dt = options.dt;
  c.t_max = options.burn_in + options.run_time;
  c.burn_in = 0.0;
  c.record_every = options.record_every;
  c.master_seed = config.master_seed ^ kChainSalt;
  validate_config(c);
  const UnitVector start = models::arc_midpoint(c.model);
  std::vector<stats::Histogram> per_chain(options.chains);
  parallel_for(options.chains, workers, [&](std::size_t i) {
    stats::Histogram h = arc_histogram(c.model, options.bins);
    add_angle_occupation(h, models::simulate_map_path(c, start, i), options.burn_in);
    per_chain[i] = std::move(h);
  });
  stats::Histogram merged = arc_histogram(c.model, options.bins);
  for (const auto& h : per_chain) {
    for (std::size_t b = 0; b < h.masses.size(); ++b) merged.masses[b] += h.masses[b];
  }
  return StationaryInitializer(std::move(merged));
}

double mirror_tv(const stats::Histogram& hist, std::size_t coarsen) {
  const stats::Histogram h = hist.coarsen(coarsen);
  std::vector<double> mirrored(h.masses.rbegin(), h.masses.rend());
  return stats::tv_distance(h.masses, mirrored);
}

InvarianceReport invariance_check(const SimulationConfig& config, const StationaryInitializer& init,
                                  std::size_t samples, double evolve_time, std::size_t coarsen,
                                  double threshold, std::size_t workers) {
  if (samples == 0) throw ValidationError("invariance check needs samples");
  SimulationConfig c = config;
  c.t_max = evolve_time;
  c.burn_in = 0.0;
  c.master_seed = config.master_seed ^ kInvarianceSalt;
  c.record_every = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(evolve_time / c.dt)));
  validate_config(c);
  std::vector<double> end_angle(samples);
  parallel_for(samples, workers, [&](std::size_t i) {
    Rng rng = seed_stream(c.master_seed, i);
    const UnitVector theta0 = init.sample(rng);
    const MapPath p = models::simulate_map(c, theta0, rng, i);
    end_angle[i] = angle_of(p.theta_at(p.size() - 1));
  });
  stats::Histogram evolved = init.histogram();
  std::fill(evolved.masses.begin(), evolved.masses.end(), 0.0);
  for (double a : end_angle) evolved.add(a);
  InvarianceReport r;
  r.samples = samples;
  r.evolve_time = c.record_every * c.dt;
  r.tv = stats::tv_distance(evolved.coarsen(coarsen), init.histogram().coarsen(coarsen));
  r.pass = r.tv < threshold;
  return r;
}

ReversalReport reversal_from_samples(double t, const std::vector<double>& g_under,
                                     const std::vector<double>& t_minus_g_bar) {
  const stats::KsResult ks = stats::ks_two_sample(g_under, t_minus_g_bar);
  ReversalReport r;
  r.t = t;
  r.n = std::min(g_under.size(), t_minus_g_bar.size());
  r.ks_stat = ks.statistic;
  r.threshold = ks.critical_value;
  r.pass = r.ks_stat < r.threshold;
  return r;
}

ReversalReport reversal_check(const SimulationConfig& config, const StationaryInitializer& init,
                              double t, std::size_t n, std::size_t workers) {
  if (n < 500) throw ValidationError("reversal check needs at least 500 paths per side");
  SimulationConfig c = config;
  c.t_max = t;
  c.burn_in = 0.0;
  c.record_every = 1;
  validate_config(c);
  std::vector<double> values(2 * n);
  double horizon = 0.0;
  parallel_for(2 * n, workers, [&](std::size_t i) {
    Rng rng = seed_stream(c.master_seed, i);
    const UnitVector theta0 = init.sample(rng);
    const MapPath p = models::simulate_map(c, theta0, rng, i);
    const auto s = fluctuation::summarize(ordinate(p), p.grid.back(), c.epsilon_zero);
    // Both sides live on the step lattice; rounding keeps t - g_bar from
    // landing a few ulps off the lattice point that g_under hits exactly.
    const double v = i < n ? s.g_under : s.horizon - s.g_bar;
    values[i] = std::round(v / c.dt) * c.dt;
  });
  horizon = c.steps() * c.dt;
  std::vector<double> a(values.begin(), values.begin() + static_cast<long>(n));
  std::vector<double> b(values.begin() + static_cast<long>(n), values.end());
  return reversal_from_samples(horizon, a, b);
}

}  // namespace mapflux::duality
