#include "mapflux/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mapflux/errors.hpp"

namespace mapflux {

TimeGrid::TimeGrid(std::vector<double> times) : times_(std::move(times)) {
  if (times_.empty() || times_.front() != 0.0) {
    throw ValidationError("time grid must start at 0");
  }
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (!std::isfinite(times_[i])) {
      throw ValidationError("time grid contains a non-finite instant at index " +
                            std::to_string(i));
    }
    if (i > 0 && !(times_[i] > times_[i - 1])) {
      throw ValidationError("time grid is not strictly increasing at index " +
                            std::to_string(i));
    }
  }
}

std::size_t TimeGrid::index_at_or_before(double t) const {
  const double tol = 1e-12 * std::max(1.0, std::abs(times_.back()));
  if (!(t >= -tol) || t > times_.back() + tol) {
    std::ostringstream msg;
    msg << "time " << t << " outside grid [0, " << times_.back() << "]";
    throw OutOfRangeError(msg.str());
  }
  auto it = std::upper_bound(times_.begin(), times_.end(), t + tol);
  return static_cast<std::size_t>(std::distance(times_.begin(), it)) - 1;
}

TimeGrid TimeGrid::prefix(std::size_t n) const {
  n = std::clamp<std::size_t>(n, 1, times_.size());
  return TimeGrid(std::vector<double>(times_.begin(), times_.begin() + static_cast<long>(n)));
}

TimeGrid make_time_grid(double dt, double t_max) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt must be positive and finite");
  if (!(t_max > 0.0) || !std::isfinite(t_max)) {
    throw ValidationError("t_max must be positive and finite");
  }
  if (dt > t_max) throw ValidationError("dt must not exceed t_max");
  // relative slack so that e.g. 0.3 / 0.1 counts three whole steps
  const auto steps = static_cast<std::size_t>(std::floor(t_max / dt * (1.0 + 1e-12)));
  std::vector<double> times(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) times[i] = static_cast<double>(i) * dt;
  return TimeGrid(std::move(times));
}

UnitVector::UnitVector(std::vector<double> components) : c_(std::move(components)) {
  if (c_.empty()) throw ValidationError("unit vector needs at least one component");
  double norm2 = 0.0;
  for (double v : c_) {
    if (!std::isfinite(v)) throw ValidationError("unit vector has a non-finite component");
    norm2 += v * v;
  }
  if (!(norm2 > 0.0)) throw ValidationError("cannot normalise the zero vector");
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& v : c_) v *= inv;
}

UnitVector UnitVector::from_angle(double phi) { return UnitVector(std::cos(phi), std::sin(phi)); }

double UnitVector::angle() const {
  if (c_.size() != 2) throw ValidationError("angle() is defined for two-dimensional vectors");
  return std::atan2(c_[1], c_[0]);
}

ScalarPath ordinate(const MapPath& path) {
  return ScalarPath{path.grid.prefix(path.size()), path.xi};
}

MapPath negate_ordinate(MapPath path) {
  for (double& v : path.xi) v = -v;
  return path;
}

namespace {

void fail(ValidationReport& r, std::size_t index, std::string issue) {
  r.pass = false;
  if (!r.first_bad_index || index < *r.first_bad_index) r.first_bad_index = index;
  r.issues.push_back(std::move(issue));
}

void check_grid(ValidationReport& r, std::span<const double> times) {
  if (times.empty() || times[0] != 0.0) fail(r, 0, "grid does not start at 0");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i])) fail(r, i, "non-finite grid instant at index " + std::to_string(i));
    if (i > 0 && !(times[i] > times[i - 1])) {
      fail(r, i, "grid not strictly increasing at index " + std::to_string(i));
    }
  }
}

}  // namespace

ValidationReport validate_map_path(const MapPath& path) {
  ValidationReport r;
  check_grid(r, path.grid.times());
  const std::size_t expected = path.kill_index ? *path.kill_index : path.grid.size();
  if (path.kill_index && *path.kill_index > path.grid.size()) {
    fail(r, path.grid.size(), "kill index beyond grid");
  }
  if (path.xi.size() != expected) fail(r, 0, "xi length does not match grid / kill index");
  if (path.dim == 0 || path.theta.size() != path.xi.size() * path.dim) {
    fail(r, 0, "theta length does not match xi length");
    return r;
  }
  for (std::size_t i = 0; i < path.xi.size(); ++i) {
    if (!std::isfinite(path.xi[i])) fail(r, i, "non-finite xi at index " + std::to_string(i));
    double n2 = 0.0;
    bool finite = true;
    for (double v : path.theta_at(i)) {
      finite = finite && std::isfinite(v);
      n2 += v * v;
    }
    if (!finite) {
      fail(r, i, "non-finite theta at index " + std::to_string(i));
      continue;
    }
    const double dev = std::abs(std::sqrt(n2) - 1.0);
    r.max_norm_deviation = std::max(r.max_norm_deviation, dev);
    if (dev > UnitVector::kNormTolerance) {
      fail(r, i, "theta off the unit sphere at index " + std::to_string(i));
    }
  }
  return r;
}

ValidationReport validate_ssmp_path(const SsmpPath& path) {
  ValidationReport r;
  check_grid(r, path.grid.times());
  const std::size_t expected = path.kill_index ? *path.kill_index : path.grid.size();
  if (path.dim == 0 || path.x.size() != expected * path.dim) {
    fail(r, 0, "x length does not match grid / kill index");
    return r;
  }
  for (std::size_t i = 0; i < path.size(); ++i) {
    double n2 = 0.0;
    bool finite = true;
    for (double v : path.x_at(i)) {
      finite = finite && std::isfinite(v);
      n2 += v * v;
    }
    if (!finite) fail(r, i, "non-finite x at index " + std::to_string(i));
    else if (!(n2 > 0.0)) fail(r, i, "x at the origin before the kill index at " + std::to_string(i));
  }
  return r;
}

}  // namespace mapflux
