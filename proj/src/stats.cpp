#include "mapflux/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/normal.hpp>

#include "mapflux/errors.hpp"

namespace mapflux::stats {

Ecdf::Ecdf(std::vector<double> samples) : values_(std::move(samples)) {
  if (values_.empty()) throw ValidationError("ECDF of an empty sample");
  std::sort(values_.begin(), values_.end());
  const double n = static_cast<double>(values_.size());
  fractions_.resize(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) fractions_[i] = static_cast<double>(i + 1) / n;
}

double Ecdf::operator()(double x) const {
  auto it = std::upper_bound(values_.begin(), values_.end(), x);
  return static_cast<double>(std::distance(values_.begin(), it)) /
         static_cast<double>(values_.size());
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ValidationError("KS test needs two nonempty samples");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size());
  const double nb = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return {d, 1.358 * std::sqrt((na + nb) / (na * nb))};
}

KsResult ks_one_sample(std::span<const double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw ValidationError("KS test needs a nonempty sample");
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return {d, 1.358 / std::sqrt(n)};
}

double two_sided_z(double level) {
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("confidence level must lie in (0,1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), 0.5 + level / 2.0);
}

MeanCi mc_mean_ci(std::span<const double> samples, double level) {
  if (samples.size() < 2) throw ValidationError("confidence interval needs at least 2 samples");
  const double n = static_cast<double>(samples.size());
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  return {mean, two_sided_z(level) * sd / std::sqrt(n), sd, samples.size()};
}

Histogram Histogram::uniform(double lo, double hi, std::size_t bins) {
  if (bins == 0 || !(hi > lo)) throw ValidationError("histogram needs bins > 0 and hi > lo");
  Histogram h;
  h.edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) {
    h.edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
  }
  h.masses.assign(bins, 0.0);
  return h;
}

void Histogram::add(double x, double weight) {
  auto it = std::upper_bound(edges.begin(), edges.end(), x);
  std::ptrdiff_t bin = std::distance(edges.begin(), it) - 1;
  bin = std::clamp<std::ptrdiff_t>(bin, 0, static_cast<std::ptrdiff_t>(masses.size()) - 1);
  masses[static_cast<std::size_t>(bin)] += weight;
}

double Histogram::total() const { return std::accumulate(masses.begin(), masses.end(), 0.0); }

std::vector<double> Histogram::normalized() const {
  const double t = total();
  if (!(t > 0.0)) throw ValidationError("cannot normalise an empty histogram");
  std::vector<double> p(masses);
  for (double& v : p) v /= t;
  return p;
}

Histogram Histogram::coarsen(std::size_t factor) const {
  if (factor == 0 || masses.size() % factor != 0) {
    throw ValidationError("coarsening factor must divide the bin count");
  }
  Histogram h;
  for (std::size_t i = 0; i < edges.size(); i += factor) h.edges.push_back(edges[i]);
  h.masses.assign(masses.size() / factor, 0.0);
  for (std::size_t i = 0; i < masses.size(); ++i) h.masses[i / factor] += masses[i];
  return h;
}

double tv_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ValidationError("TV distance needs matching bins");
  const double ta = std::accumulate(a.begin(), a.end(), 0.0);
  const double tb = std::accumulate(b.begin(), b.end(), 0.0);
  if (!(ta > 0.0) || !(tb > 0.0)) throw ValidationError("TV distance of an empty histogram");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] / ta - b[i] / tb);
  return std::min(1.0, 0.5 * s);
}

double tv_distance(const Histogram& a, const Histogram& b) {
  if (a.edges != b.edges) throw ValidationError("TV distance needs identical bin edges");
  return tv_distance(a.masses, b.masses);
}

}  // namespace mapflux::stats
