#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace mapflux::stats {

/// Empirical distribution function of a finite sample.
class Ecdf {
 public:
  explicit Ecdf(std::vector<double> samples);

  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  /// fractions()[i] == (i + 1) / n for the sorted sample.
  std::span<const double> fractions() const noexcept { return fractions_; }
  /// Fraction of samples <= x.
  double operator()(double x) const;

 private:
  std::vector<double> values_;
  std::vector<double> fractions_;
};

struct KsResult {
  double statistic = 0.0;
  double critical_value = 0.0;  // asymptotic 5% level
  bool reject() const { return !(statistic < critical_value); }
};

/// Two-sample Kolmogorov-Smirnov D over the merged support; ties are handled
/// by stepping both ECDFs past equal values together.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// One-sample D against a continuous reference CDF; critical value 1.358 / sqrt(n).
KsResult ks_one_sample(std::span<const double> samples, const std::function<double(double)>& cdf);

struct MeanCi {
  double mean = 0.0;
  double half_width = 0.0;
  double stddev = 0.0;
  std::size_t n = 0;
};

/// Normal-approximation interval: half_width = z(level) * s / sqrt(n), with
/// s the unbiased sample standard deviation. Requires n >= 2.
MeanCi mc_mean_ci(std::span<const double> samples, double level);

/// Two-sided standard normal quantile z with P(|Z| <= z) = level.
double two_sided_z(double level);

/// Binned masses over fixed edges.
struct Histogram {
  std::vector<double> edges;
  std::vector<double> masses;

  static Histogram uniform(double lo, double hi, std::size_t bins);
  /// Adds `weight` to the bin containing x; values outside [lo, hi] are clamped
  /// into the outer bins.
  void add(double x, double weight = 1.0);
  double total() const;
  std::vector<double> normalized() const;
  /// Merges groups of `factor` adjacent bins (bins must divide evenly).
  Histogram coarsen(std::size_t factor) const;
};

/// (1/2) sum |p_i - q_i| of the normalised masses; bin edges must agree.
double tv_distance(const Histogram& a, const Histogram& b);
double tv_distance(std::span<const double> a, std::span<const double> b);

}  // namespace mapflux::stats
