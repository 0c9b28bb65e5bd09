#include "mapflux/classify.hpp"

#include <algorithm>
#include <cmath>

#include "mapflux/errors.hpp"
#include "mapflux/fluctuation.hpp"
#include "mapflux/models.hpp"
#include "mapflux/oracle.hpp"
#include "mapflux/parallel.hpp"
#include "mapflux/stats.hpp"

namespace mapflux::classify {

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::DriftsPlus:
      return "DriftsPlus";
    case Verdict::DriftsMinus:
      return "DriftsMinus";
    case Verdict::Oscillates:
      return "Oscillates";
    case Verdict::Inconclusive:
      return "Inconclusive";
  }
  return "Inconclusive";
}

PathSummary summarize_path(const MapPath& path, std::span<const double> horizons, double burn_in,
                           double eps) {
  if (path.size() < 2) throw ValidationError("path too short to summarize");
  const ScalarPath xi = ordinate(path);
  PathSummary s;
  s.horizon = xi.grid.back();
  if (!(burn_in >= 0.0 && burn_in < s.horizon)) {
    throw ValidationError("burn-in must lie in [0, horizon)");
  }
  s.burn_in = xi.grid[xi.grid.index_at_or_before(burn_in)];
  s.xi_burn = xi.values[xi.grid.index_at_or_before(burn_in)];
  s.xi_end = xi.values.back();
  s.horizons.assign(horizons.begin(), horizons.end());
  if (s.horizons.empty() || s.horizons.back() < s.horizon) s.horizons.push_back(s.horizon);
  const auto prof = fluctuation::horizon_profile(xi, s.horizons, eps);
  s.g_bar = prof.g_bar;
  s.g_under = prof.g_under;
  return s;
}

PathSummary negate(PathSummary s) {
  s.xi_burn = -s.xi_burn;
  s.xi_end = -s.xi_end;
  std::swap(s.g_bar, s.g_under);
  return s;
}

SlopeEstimate slln_slope(std::span<const PathSummary> summaries, double level) {
  if (summaries.size() < kMinPaths) {
    throw ValidationError("slope estimate needs at least " + std::to_string(kMinPaths) + " paths");
  }
  std::vector<double> slopes;
  slopes.reserve(summaries.size());
  for (const auto& s : summaries) {
    slopes.push_back((s.xi_end - s.xi_burn) / (s.horizon - s.burn_in));
  }
  const stats::MeanCi ci = stats::mc_mean_ci(slopes, level);
  return {ci.mean, ci.mean - ci.half_width, ci.mean + ci.half_width, summaries.size()};
}

SlopeEstimate slln_slope(std::span<const MapPath> paths, double burn_in, double level) {
  std::vector<PathSummary> s;
  s.reserve(paths.size());
  for (const auto& p : paths) s.push_back(summarize_path(p, {}, burn_in, 1e-9));
  return slln_slope(s, level);
}

Classification trichotomy(std::span<const PathSummary> summaries, std::span<const double> lambdas,
                          const Thresholds& th) {
  const SlopeEstimate slope = slln_slope(summaries, th.level);
  Classification c;
  c.slope = slope.slope;
  c.slope_lo = slope.lo;
  c.slope_hi = slope.hi;
  c.n_paths = summaries.size();
  c.horizons = summaries.front().horizons;
  for (const auto& s : summaries) {
    if (s.horizons != c.horizons) throw ValidationError("summaries use different horizon ladders");
    c.gbar_ratio += s.g_bar.back() / s.horizon;
    c.gunder_ratio += s.g_under.back() / s.horizon;
  }
  c.gbar_ratio /= static_cast<double>(summaries.size());
  c.gunder_ratio /= static_cast<double>(summaries.size());

  std::vector<std::vector<double>> up;
  std::vector<std::vector<double>> down;
  for (const auto& s : summaries) {
    up.push_back(s.g_bar);
    down.push_back(s.g_under);
  }
  const auto up_mass = fluctuation::final_excursion_mass_estimate(up, lambdas, c.horizons);
  const auto down_mass = fluctuation::final_excursion_mass_estimate(down, lambdas, c.horizons);
  c.lambdas.assign(lambdas.begin(), lambdas.end());
  c.proxy_up_matrix = up_mass.estimate;
  c.proxy_down_matrix = down_mass.estimate;
  c.proxy_up = up_mass.proxy;
  c.proxy_down = down_mass.proxy;

  if (c.slope_lo > 0.0 && c.gbar_ratio >= th.near_one && c.gunder_ratio <= th.near_zero) {
    c.verdict = Verdict::DriftsPlus;
    c.consistent = c.proxy_down >= 1.0 - th.proxy_tolerance;
  } else if (c.slope_hi < 0.0 && c.gunder_ratio >= th.near_one && c.gbar_ratio <= th.near_zero) {
    c.verdict = Verdict::DriftsMinus;
    c.consistent = c.proxy_up >= 1.0 - th.proxy_tolerance;
  } else if (c.slope_lo <= 0.0 && c.slope_hi >= 0.0 && c.gbar_ratio > th.oscillation_floor &&
             c.gunder_ratio > th.oscillation_floor) {
    c.verdict = Verdict::Oscillates;
    c.consistent = c.proxy_up <= th.proxy_tolerance && c.proxy_down <= th.proxy_tolerance;
  } else {
    c.verdict = Verdict::Inconclusive;
    c.consistent = true;
  }
  return c;
}

Classification classify_model(const SimulationConfig& config, std::span<const double> horizons,
                              std::span<const double> lambdas, double eps, bool negate_ordinate,
                              std::size_t workers, const Thresholds& thresholds) {
  validate_config(config);
  std::vector<PathSummary> summaries(config.n_paths);
  const auto* oracle_model = std::get_if<DiscreteOracle>(&config.model);
  std::optional<UnitVector> theta0;
  if (oracle_model == nullptr) theta0 = models::arc_midpoint(config.model);
  parallel_for(config.n_paths, workers, [&](std::size_t i) {
    MapPath path;
    if (oracle_model != nullptr) {
      Rng rng = seed_stream(config.master_seed, i);
      path = oracle::simulate_discrete_path(oracle_model->spec, rng);
    } else {
      path = models::simulate_map_path(config, *theta0, i);
    }
    PathSummary s = summarize_path(path, horizons, config.burn_in, eps);
    summaries[i] = negate_ordinate ? negate(std::move(s)) : std::move(s);
  });
  return trichotomy(summaries, lambdas, thresholds);
}

}  // namespace mapflux::classify
