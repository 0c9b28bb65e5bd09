#include "mapflux/lamperti.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mapflux/errors.hpp"

namespace mapflux::lamperti {

namespace {

constexpr double kMaxExponent = 700.0;
constexpr double kMinNorm = 1e-12;

// expm1(d) / d, continuous at 0
double expm1_ratio(double d) { return std::abs(d) < 1e-12 ? 1.0 + 0.5 * d : std::expm1(d) / d; }

// log1p(d r) / d, continuous at 0
double log1p_ratio(double d, double r) {
  return std::abs(d * r) < 1e-14 ? r : std::log1p(d * r) / d;
}

// Running integral of exp(ell(s)) with ell linear between the grid values.
std::vector<double> exp_linear_cumulative(std::span<const double> times,
                                          std::span<const double> ell) {
  std::vector<double> cum(ell.size(), 0.0);
  for (std::size_t i = 1; i < ell.size(); ++i) {
    const double h = times[i] - times[i - 1];
    cum[i] = cum[i - 1] + h * std::exp(ell[i - 1]) * expm1_ratio(ell[i] - ell[i - 1]);
  }
  return cum;
}

struct CellPoint {
  std::size_t cell;
  double frac;
};

// Locates t in the running integral and inverts the exponential inside the cell.
CellPoint exp_linear_inverse(std::span<const double> times, std::span<const double> ell,
                             const std::vector<double>& cum, double t, const char* what) {
  if (!(t >= 0.0) || !(t < cum.back())) {
    std::ostringstream msg;
    msg << what << " argument " << t << " outside [0, " << cum.back() << ")";
    throw OutOfRangeError(msg.str());
  }
  auto it = std::upper_bound(cum.begin(), cum.end(), t);
  const auto i = static_cast<std::size_t>(std::distance(cum.begin(), it)) - 1;
  const double h = times[i + 1] - times[i];
  const double d = ell[i + 1] - ell[i];
  const double r = (t - cum[i]) / (h * std::exp(ell[i]));
  const double u = std::clamp(log1p_ratio(d, r), 0.0, 1.0);
  return {i, u};
}

void check_exponent(std::span<const double> ell, const char* what) {
  double worst = -std::numeric_limits<double>::infinity();
  for (double v : ell) {
    if (!std::isfinite(v)) throw NumericalError(std::string(what) + " has a non-finite value");
    worst = std::max(worst, v);
  }
  if (worst > kMaxExponent) {
    std::ostringstream msg;
    msg << what << " overflows: largest exponent " << worst;
    throw NumericalError(msg.str());
  }
}

std::vector<double> scaled_xi(const MapPath& path, double alpha) {
  if (!(alpha > 0.0)) throw ValidationError("alpha must be positive");
  if (path.size() < 2) throw ValidationError("time change needs at least two path points");
  std::vector<double> ell(path.xi);
  for (double& v : ell) v *= alpha;
  double max_xi = *std::max_element(path.xi.begin(), path.xi.end());
  try {
    check_exponent(ell, "exp integral");
  } catch (const NumericalError&) {
    std::ostringstream msg;
    msg << "exp(alpha xi) overflows: max xi = " << max_xi << ", alpha = " << alpha;
    throw NumericalError(msg.str());
  }
  return ell;
}

std::vector<double> log_norms(const SsmpPath& path) {
  const std::size_t n = path.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (double v : path.x_at(i)) s += v * v;
    const double norm = std::sqrt(s);
    if (!(norm >= kMinNorm) || !std::isfinite(norm)) {
      std::ostringstream msg;
      msg << "ssMp norm " << norm << " at index " << i << " is too small for the time change";
      throw NumericalError(msg.str());
    }
    out[i] = std::log(norm);
  }
  return out;
}

// alpha log ||X|| at every instant.
std::vector<double> scaled_log_norm(const SsmpPath& path, double alpha) {
  if (!(alpha > 0.0)) throw ValidationError("alpha must be positive");
  if (path.size() < 2) throw ValidationError("time change needs at least two path points");
  std::vector<double> ell = log_norms(path);
  for (double& v : ell) v *= alpha;
  std::vector<double> neg(ell);
  for (double& v : neg) v = -v;
  check_exponent(neg, "||X||^-alpha");
  return ell;
}

// Running integral of exp(-ell(s)) with exp(ell) linear between the grid values.
// This is the image of a linear ordinate under the forward time change, so the
// two quadratures are exact inverses of each other on the grid.
std::vector<double> power_linear_cumulative(std::span<const double> times,
                                            std::span<const double> ell) {
  std::vector<double> cum(ell.size(), 0.0);
  for (std::size_t i = 1; i < ell.size(); ++i) {
    const double h = times[i] - times[i - 1];
    cum[i] = cum[i - 1] + h * std::exp(-ell[i - 1]) / expm1_ratio(ell[i] - ell[i - 1]);
  }
  return cum;
}

struct PowerCellPoint {
  std::size_t cell;
  double kappa;  // fraction of the cell's integral, the fraction of A-time
  double frac;   // fraction of the cell's own time
};

PowerCellPoint power_linear_inverse(std::span<const double> ell, const std::vector<double>& cum,
                                    double t) {
  if (!(t >= 0.0) || !(t < cum.back())) {
    std::ostringstream msg;
    msg << "A argument " << t << " outside [0, " << cum.back() << ")";
    throw OutOfRangeError(msg.str());
  }
  auto it = std::upper_bound(cum.begin(), cum.end(), t);
  const auto i = static_cast<std::size_t>(std::distance(cum.begin(), it)) - 1;
  const double kappa = std::clamp((t - cum[i]) / (cum[i + 1] - cum[i]), 0.0, 1.0);
  const double d = ell[i + 1] - ell[i];
  const double u = std::clamp(kappa * expm1_ratio(kappa * d) / expm1_ratio(d), 0.0, 1.0);
  return {i, kappa, u};
}

// Normalized linear interpolation between two directions of length `dim`.
void nlerp(std::span<const double> a, std::span<const double> b, double u, double* out) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    out[j] = (1.0 - u) * a[j] + u * b[j];
    s += out[j] * out[j];
  }
  const double norm = std::sqrt(s);
  if (!(norm > 0.0)) throw NumericalError("directions to interpolate are antipodal");
  for (std::size_t j = 0; j < a.size(); ++j) out[j] /= norm;
}

TimeGrid default_grid(double mass, std::size_t n) {
  std::vector<double> t(n);
  for (std::size_t j = 0; j < n; ++j) t[j] = mass * static_cast<double>(j) / static_cast<double>(n);
  return TimeGrid(std::move(t));
}

std::span<const double> grid_times(const TimeGrid& g, std::size_t n) {
  return g.times().subspan(0, n);
}

}  // namespace

double TimeChangeTable::operator()(double t) const {
  if (source_times.empty() || t < source_times.front() || t > source_times.back()) {
    throw OutOfRangeError("time change evaluated outside its table");
  }
  auto it = std::upper_bound(source_times.begin(), source_times.end(), t);
  if (it == source_times.end()) return target_times.back();
  const auto i = static_cast<std::size_t>(std::distance(source_times.begin(), it)) - 1;
  const double w = source_times[i + 1] - source_times[i];
  const double u = w > 0.0 ? (t - source_times[i]) / w : 0.0;
  return target_times[i] + u * (target_times[i + 1] - target_times[i]);
}

ScalarPath exp_integral(const MapPath& path, double alpha) {
  const auto ell = scaled_xi(path, alpha);
  auto times = grid_times(path.grid, path.size());
  return ScalarPath{path.grid.prefix(path.size()), exp_linear_cumulative(times, ell)};
}

TimeChangeTable tau_table(const MapPath& path, double alpha) {
  ScalarPath mass = exp_integral(path, alpha);
  auto times = mass.grid.times();
  return {std::move(mass.values), std::vector<double>(times.begin(), times.end())};
}

double time_change_tau(const MapPath& path, double alpha, double t) {
  const auto ell = scaled_xi(path, alpha);
  auto times = grid_times(path.grid, path.size());
  const auto cum = exp_linear_cumulative(times, ell);
  const CellPoint p = exp_linear_inverse(times, ell, cum, t, "tau");
  return times[p.cell] + p.frac * (times[p.cell + 1] - times[p.cell]);
}

SsmpPath map_to_ssmp(const MapPath& path, double alpha, const TimeGrid& output_grid) {
  const auto ell = scaled_xi(path, alpha);
  auto times = grid_times(path.grid, path.size());
  const auto cum = exp_linear_cumulative(times, ell);
  const std::size_t d = path.dim;
  SsmpPath out;
  out.grid = output_grid;
  out.dim = d;
  out.x.reserve(output_grid.size() * d);
  std::vector<double> dir(d);
  for (std::size_t j = 0; j < output_grid.size(); ++j) {
    const double t = output_grid[j];
    if (!(t < cum.back())) {
      out.kill_index = j;
      break;
    }
    const CellPoint p = exp_linear_inverse(times, ell, cum, t, "tau");
    const double xi = path.xi[p.cell] + p.frac * (path.xi[p.cell + 1] - path.xi[p.cell]);
    nlerp(path.theta_at(p.cell), path.theta_at(p.cell + 1), p.frac, dir.data());
    const double r = std::exp(xi);
    for (double v : dir) out.x.push_back(v * r);
  }
  return out;
}

SsmpPath map_to_ssmp(const MapPath& path, double alpha) {
  const ScalarPath mass = exp_integral(path, alpha);
  return map_to_ssmp(path, alpha, default_grid(mass.values.back(), path.size()));
}

ScalarPath inverse_norm_integral(const SsmpPath& path, double alpha) {
  const auto ell = scaled_log_norm(path, alpha);
  auto times = grid_times(path.grid, path.size());
  return ScalarPath{path.grid.prefix(path.size()), power_linear_cumulative(times, ell)};
}

TimeChangeTable a_table(const SsmpPath& path, double alpha) {
  ScalarPath mass = inverse_norm_integral(path, alpha);
  auto times = mass.grid.times();
  return {std::move(mass.values), std::vector<double>(times.begin(), times.end())};
}

double time_change_A(const SsmpPath& path, double alpha, double t) {
  const auto ell = scaled_log_norm(path, alpha);
  auto times = grid_times(path.grid, path.size());
  const auto cum = power_linear_cumulative(times, ell);
  const PowerCellPoint p = power_linear_inverse(ell, cum, t);
  return times[p.cell] + p.frac * (times[p.cell + 1] - times[p.cell]);
}

MapPath ssmp_to_map(const SsmpPath& path, double alpha, const TimeGrid& output_grid) {
  const auto ell = scaled_log_norm(path, alpha);
  auto times = grid_times(path.grid, path.size());
  const auto cum = power_linear_cumulative(times, ell);
  const std::size_t d = path.dim;
  std::vector<double> unit(path.size() * d);
  for (std::size_t i = 0; i < path.size(); ++i) {
    const double r = std::exp(ell[i] / alpha);
    for (std::size_t j = 0; j < d; ++j) unit[i * d + j] = path.x_at(i)[j] / r;
  }
  const std::span<const double> units(unit);
  MapPath out;
  out.grid = output_grid;
  out.dim = d;
  out.xi.reserve(output_grid.size());
  out.theta.reserve(output_grid.size() * d);
  std::vector<double> dir(d);
  for (std::size_t j = 0; j < output_grid.size(); ++j) {
    const double t = output_grid[j];
    if (!(t < cum.back())) {
      out.kill_index = j;
      break;
    }
    const PowerCellPoint p = power_linear_inverse(ell, cum, t);
    const double log_r = (ell[p.cell] + p.kappa * (ell[p.cell + 1] - ell[p.cell])) / alpha;
    nlerp(units.subspan(p.cell * d, d), units.subspan((p.cell + 1) * d, d), p.frac, dir.data());
    out.xi.push_back(log_r);
    out.theta.insert(out.theta.end(), dir.begin(), dir.end());
  }
  return out;
}

MapPath ssmp_to_map(const SsmpPath& path, double alpha) {
  const ScalarPath mass = inverse_norm_integral(path, alpha);
  return ssmp_to_map(path, alpha, default_grid(mass.values.back(), path.size()));
}

}  // namespace mapflux::lamperti
