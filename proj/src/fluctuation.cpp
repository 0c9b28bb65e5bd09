#include "mapflux/fluctuation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mapflux/errors.hpp"

namespace mapflux::fluctuation {

namespace {

void require_nonempty(const ScalarPath& path) {
  if (path.values.empty()) throw ValidationError("path is empty");
  if (path.values.size() > path.grid.size()) {
    throw ValidationError("path has more values than grid instants");
  }
}

void require_eps(double eps) {
  if (!(eps > 0.0)) throw ValidationError("epsilon_zero must be positive");
}

std::size_t index_for(const ScalarPath& path, double t) {
  const std::size_t i = path.grid.index_at_or_before(t);
  if (i >= path.values.size()) throw OutOfRangeError("time beyond the alive part of the path");
  return i;
}

}  // namespace

Extrema running_extrema(const ScalarPath& path) {
  require_nonempty(path);
  Extrema e{path, path};
  for (std::size_t i = 1; i < path.values.size(); ++i) {
    e.sup.values[i] = std::max(e.sup.values[i - 1], path.values[i]);
    e.inf.values[i] = std::min(e.inf.values[i - 1], path.values[i]);
  }
  return e;
}

ScalarPath reflected_process(const ScalarPath& path) {
  ScalarPath u = running_extrema(path).sup;
  for (std::size_t i = 0; i < u.values.size(); ++i) u.values[i] -= path.values[i];
  return u;
}

ScalarPath reflected_at_infimum(const ScalarPath& path) {
  ScalarPath u = running_extrema(path).inf;
  for (std::size_t i = 0; i < u.values.size(); ++i) u.values[i] = path.values[i] - u.values[i];
  return u;
}

FluctuationSummary summarize(const ScalarPath& path, double t, double eps) {
  require_nonempty(path);
  require_eps(eps);
  const std::size_t end = index_for(path, t);
  double sup = path.values[0];
  double inf = path.values[0];
  std::size_t g_bar = 0;
  std::size_t g_under = 0;
  for (std::size_t i = 1; i <= end; ++i) {
    const double v = path.values[i];
    sup = std::max(sup, v);
    inf = std::min(inf, v);
    if (sup - v <= eps) g_bar = i;
    if (v - inf <= eps) g_under = i;
  }
  return {path.grid[g_bar], path.grid[g_under], sup, inf, path.grid[end]};
}

double last_time_at_supremum(const ScalarPath& path, double t, double eps) {
  return summarize(path, t, eps).g_bar;
}

double last_time_at_infimum(const ScalarPath& path, double t, double eps) {
  return summarize(path, t, eps).g_under;
}

HorizonProfile horizon_profile(const ScalarPath& path, std::span<const double> horizons,
                               double eps) {
  require_nonempty(path);
  require_eps(eps);
  HorizonProfile out;
  out.g_bar.reserve(horizons.size());
  out.g_under.reserve(horizons.size());
  double sup = path.values[0];
  double inf = path.values[0];
  std::size_t g_bar = 0;
  std::size_t g_under = 0;
  std::size_t i = 0;
  for (std::size_t h = 0; h < horizons.size(); ++h) {
    if (h > 0 && horizons[h] < horizons[h - 1]) {
      throw ValidationError("horizons must be nondecreasing");
    }
    const std::size_t end = index_for(path, horizons[h]);
    for (; i < end; ) {
      ++i;
      const double v = path.values[i];
      sup = std::max(sup, v);
      inf = std::min(inf, v);
      if (sup - v <= eps) g_bar = i;
      if (v - inf <= eps) g_under = i;
    }
    out.g_bar.push_back(path.grid[g_bar]);
    out.g_under.push_back(path.grid[g_under]);
  }
  return out;
}

std::vector<ExcursionRecord> excursions(const ScalarPath& reflected, double eps) {
  require_nonempty(reflected);
  require_eps(eps);
  std::vector<ExcursionRecord> out;
  const auto& u = reflected.values;
  std::size_t last_zero = 0;
  bool inside = false;
  ExcursionRecord cur;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] < 0.0) throw ValidationError("reflected process must be nonnegative");
    if (u[i] <= eps) {
      if (inside) {
        cur.end_time = reflected.grid[i];
        cur.lifetime = *cur.end_time - cur.start_time;
        out.push_back(cur);
        inside = false;
      }
      last_zero = i;
    } else {
      if (!inside) {
        cur = ExcursionRecord{};
        cur.start_time = reflected.grid[last_zero];
        inside = true;
      }
      cur.max_height = std::max(cur.max_height, u[i]);
    }
  }
  if (inside) {
    cur.censored = true;
    out.push_back(cur);
  }
  return out;
}

LadderSample ladder_samples(const MapPath& path, double eps) {
  require_eps(eps);
  LadderSample out;
  if (path.size() == 0) return out;
  double sup = path.xi[0];
  double clock = 0.0;
  bool away = false;
  for (std::size_t i = 0; i < path.size(); ++i) {
    sup = std::max(sup, path.xi[i]);
    if (sup - path.xi[i] <= eps) {
      if (away) clock += 1.0;
      away = false;
      auto th = path.theta_at(i);
      out.entries.push_back({clock, path.grid[i], path.xi[i], {th.begin(), th.end()}});
    } else {
      away = true;
    }
  }
  return out;
}

ExponentialSamples sample_g_at_exponential(std::span<const MapPath> paths, double q, double eps,
                                           Rng& rng) {
  if (!(q > 0.0)) throw ValidationError("q must be positive");
  require_eps(eps);
  for (const auto& p : paths) {
    if (p.size() == 0) throw ValidationError("empty path");
    const double horizon = p.grid[p.size() - 1];
    if (horizon < 10.0 / q) {
      throw ValidationError("path horizon is shorter than 10 / q");
    }
  }
  ExponentialSamples out;
  out.samples.reserve(paths.size());
  for (const auto& p : paths) {
    const double e = exponential(rng, q);
    const double horizon = p.grid[p.size() - 1];
    if (e > horizon) {
      ++out.rejections;
      continue;
    }
    const FluctuationSummary s = summarize(ordinate(p), e, eps);
    out.samples.push_back({e, s.g_bar, s.g_under, e - s.g_bar});
  }
  return out;
}

LaplaceEstimate laplace_estimate(std::span<const double> samples, double lambda, double q,
                                 std::size_t rejections) {
  if (!(lambda >= 0.0)) throw ValidationError("lambda must be nonnegative");
  LaplaceEstimate out;
  out.lambda = lambda;
  out.q = q;
  out.n_samples = samples.size();
  out.rejection_count = rejections;
  if (samples.empty()) throw ValidationError("Laplace estimate of an empty sample");
  const double n = static_cast<double>(samples.size());
  double sum = 0.0;
  double sum2 = 0.0;
  for (double s : samples) {
    const double v = std::exp(-lambda * s);
    sum += v;
    sum2 += v * v;
  }
  out.estimate = sum / n;
  if (samples.size() > 1) {
    const double var = std::max(0.0, (sum2 - n * out.estimate * out.estimate) / (n - 1.0));
    out.stderr_ = std::sqrt(var / n);
  }
  return out;
}

FinalExcursionMass final_excursion_mass_estimate(const std::vector<std::vector<double>>& g_bar,
                                                 std::span<const double> lambdas,
                                                 std::span<const double> horizons) {
  if (lambdas.empty() || horizons.empty()) {
    throw ValidationError("lambda grid and horizon ladder must be nonempty");
  }
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > 0.0)) throw ValidationError("lambda grid must be positive");
    if (i > 0 && !(lambdas[i] < lambdas[i - 1])) {
      throw ValidationError("lambda grid must be strictly decreasing");
    }
  }
  for (std::size_t j = 1; j < horizons.size(); ++j) {
    if (!(horizons[j] > horizons[j - 1])) {
      throw ValidationError("horizons must be strictly increasing");
    }
  }
  if (g_bar.empty()) throw ValidationError("no paths");
  FinalExcursionMass out;
  out.lambdas.assign(lambdas.begin(), lambdas.end());
  out.horizons.assign(horizons.begin(), horizons.end());
  std::vector<double> column(g_bar.size());
  for (double lambda : lambdas) {
    std::vector<double> row;
    std::vector<double> err;
    for (std::size_t j = 0; j < horizons.size(); ++j) {
      for (std::size_t p = 0; p < g_bar.size(); ++p) {
        if (g_bar[p].size() != horizons.size()) {
          throw ValidationError("g_bar rows must match the horizon ladder");
        }
        column[p] = g_bar[p][j];
      }
      const LaplaceEstimate est = laplace_estimate(column, lambda);
      row.push_back(est.estimate);
      err.push_back(est.stderr_);
    }
    out.estimate.push_back(std::move(row));
    out.stderr_.push_back(std::move(err));
  }
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    for (std::size_t j = 0; j < horizons.size(); ++j) {
      if (i > 0 && out.estimate[i][j] < out.estimate[i - 1][j]) out.monotone_in_lambda = false;
      if (j > 0 && out.estimate[i][j] > out.estimate[i][j - 1]) out.monotone_in_horizon = false;
    }
  }
  out.proxy = std::clamp(out.estimate.back().back(), 0.0, 1.0);
  return out;
}

FinalExcursionMass final_excursion_mass_estimate(std::span<const MapPath> paths,
                                                 std::span<const double> lambdas,
                                                 std::span<const double> horizons, double eps) {
  std::vector<std::vector<double>> g_bar;
  g_bar.reserve(paths.size());
  for (const auto& p : paths) g_bar.push_back(horizon_profile(ordinate(p), horizons, eps).g_bar);
  return final_excursion_mass_estimate(g_bar, lambdas, horizons);
}

OccupationHistogram OccupationHistogram::uniform(double angle_lo, double angle_hi,
                                                 std::size_t angle_bins, double height_lo,
                                                 double height_hi, std::size_t height_bins) {
  if (angle_bins == 0 || height_bins == 0 || !(angle_hi > angle_lo) || !(height_hi > height_lo)) {
    throw ValidationError("occupation histogram needs nonempty increasing bins");
  }
  OccupationHistogram h;
  for (std::size_t i = 0; i <= angle_bins; ++i) {
    h.angle_edges.push_back(angle_lo + (angle_hi - angle_lo) * static_cast<double>(i) /
                                           static_cast<double>(angle_bins));
  }
  for (std::size_t i = 0; i <= height_bins; ++i) {
    h.height_edges.push_back(height_lo + (height_hi - height_lo) * static_cast<double>(i) /
                                             static_cast<double>(height_bins));
  }
  h.masses.assign(angle_bins * height_bins, 0.0);
  return h;
}

namespace {

std::size_t bin_of(const std::vector<double>& edges, double x) {
  auto it = std::upper_bound(edges.begin(), edges.end(), x);
  const auto raw = std::distance(edges.begin(), it) - 1;
  return static_cast<std::size_t>(
      std::clamp<std::ptrdiff_t>(raw, 0, static_cast<std::ptrdiff_t>(edges.size()) - 2));
}

}  // namespace

void OccupationHistogram::add(double angle, double height, double weight) {
  at(bin_of(angle_edges, angle), bin_of(height_edges, height)) += weight;
}

double OccupationHistogram::total() const {
  return std::accumulate(masses.begin(), masses.end(), 0.0);
}

void accumulate_occupation(OccupationHistogram& hist, const LadderSample& ladder) {
  for (std::size_t i = 1; i < ladder.entries.size(); ++i) {
    const auto& prev = ladder.entries[i - 1];
    const double inc = ladder.entries[i].local_time - prev.local_time;
    if (inc == 0.0) continue;
    if (prev.theta_plus.size() != 2) {
      throw ValidationError("occupation histogram needs two-dimensional modulator values");
    }
    hist.add(std::atan2(prev.theta_plus[1], prev.theta_plus[0]), prev.xi_plus, inc);
  }
}

OccupationHistogram occupation_measure(std::span<const LadderSample> ladders,
                                       OccupationHistogram bins) {
  std::fill(bins.masses.begin(), bins.masses.end(), 0.0);
  for (const auto& l : ladders) accumulate_occupation(bins, l);
  return bins;
}

}  // namespace mapflux::fluctuation
