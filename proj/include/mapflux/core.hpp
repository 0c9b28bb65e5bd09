#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mapflux {

/// Strictly increasing sampling instants starting at 0.
class TimeGrid {
 public:
  TimeGrid() : times_{0.0} {}
  /// Throws ValidationError unless times[0] == 0, all finite and strictly increasing.
  explicit TimeGrid(std::vector<double> times);

  std::size_t size() const noexcept { return times_.size(); }
  double operator[](std::size_t i) const { return times_[i]; }
  double back() const { return times_.back(); }
  std::span<const double> times() const noexcept { return times_; }

  /// Largest index i with times[i] <= t (up to a relative tolerance of 1e-12).
  /// Throws OutOfRangeError for t < 0 or t beyond the last instant.
  std::size_t index_at_or_before(double t) const;

  /// Prefix of the grid containing the first `n` instants.
  TimeGrid prefix(std::size_t n) const;

 private:
  std::vector<double> times_;
};

/// Uniform grid {0, dt, 2dt, ...} up to the largest multiple of dt <= t_max.
TimeGrid make_time_grid(double dt, double t_max);

struct ScalarPath {
  TimeGrid grid;
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
};

/// Point of the unit sphere; components are renormalised on construction.
class UnitVector {
 public:
  static constexpr double kNormTolerance = 1e-9;

  explicit UnitVector(std::vector<double> components);
  UnitVector(double x, double y) : UnitVector(std::vector<double>{x, y}) {}

  static UnitVector from_angle(double phi);

  std::size_t dim() const noexcept { return c_.size(); }
  double operator[](std::size_t i) const { return c_[i]; }
  std::span<const double> components() const noexcept { return c_; }
  /// Polar angle in (-pi, pi]; two-dimensional vectors only.
  double angle() const;

 private:
  std::vector<double> c_;
};

/// Sampled trajectory of the Markov additive pair (xi, Theta).
///
/// `theta` is stored row-major with `dim` entries per instant. When
/// `kill_index` is set the path is absent from that grid index on and
/// `xi.size() == *kill_index`.
struct MapPath {
  TimeGrid grid;
  std::vector<double> xi;
  std::size_t dim = 2;
  std::vector<double> theta;
  std::optional<std::size_t> kill_index;
  std::size_t wall_rejections = 0;

  std::size_t size() const noexcept { return xi.size(); }
  std::span<const double> theta_at(std::size_t i) const {
    return std::span<const double>(theta).subspan(i * dim, dim);
  }
  double time(std::size_t i) const { return grid[i]; }
};

/// Sampled trajectory of a self-similar process in R^d \ {0}.
struct SsmpPath {
  TimeGrid grid;
  std::size_t dim = 2;
  std::vector<double> x;
  std::optional<std::size_t> kill_index;
  std::size_t wall_rejections = 0;

  std::size_t size() const noexcept { return dim == 0 ? 0 : x.size() / dim; }
  std::span<const double> x_at(std::size_t i) const {
    return std::span<const double>(x).subspan(i * dim, dim);
  }
};

/// Ordinate of a MAP path as a scalar path on the alive part of the grid.
ScalarPath ordinate(const MapPath& path);

/// Path with xi replaced by -xi (descending ladder quantities via the ascending code path).
MapPath negate_ordinate(MapPath path);

struct ValidationReport {
  bool pass = true;
  double max_norm_deviation = 0.0;
  std::optional<std::size_t> first_bad_index;
  std::vector<std::string> issues;
};

/// Pure report: unit-norm deviation of theta, non-finite values, grid and length mismatches.
ValidationReport validate_map_path(const MapPath& path);
ValidationReport validate_ssmp_path(const SsmpPath& path);

}  // namespace mapflux
