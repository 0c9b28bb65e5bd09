#pragma once

#include <cstddef>
#include <vector>

#include "mapflux/core.hpp"

namespace mapflux::lamperti {

/// Graph of a time change: `source_times[i]` maps to `target_times[i]`.
/// Both columns are nondecreasing.
struct TimeChangeTable {
  std::vector<double> source_times;
  std::vector<double> target_times;

  /// Piecewise-linear evaluation; throws OutOfRangeError outside the table.
  double operator()(double t) const;
};

/// Running integral of e^{alpha xi} on the path grid. Inside each cell xi is
/// taken linear, so the cell mass is dt e^{alpha xi_i} expm1(alpha dxi)/(alpha dxi).
/// Throws NumericalError when alpha * max(xi) would overflow.
ScalarPath exp_integral(const MapPath& path, double alpha);

/// Pairs (integral value, grid time): the graph of tau.
TimeChangeTable tau_table(const MapPath& path, double alpha);

/// tau_t, the generalized inverse of exp_integral at t. Throws OutOfRangeError
/// when t is negative or not below the total mass.
double time_change_tau(const MapPath& path, double alpha, double t);

/// X_t = Theta_{tau_t} e^{xi_{tau_t}} on `output_grid`. xi is interpolated
/// linearly and Theta by normalized linear interpolation. Output instants at or
/// past the total mass set kill_index.
SsmpPath map_to_ssmp(const MapPath& path, double alpha, const TimeGrid& output_grid);

/// Same, on the default grid {j * mass / N : j < N} with N the input length.
SsmpPath map_to_ssmp(const MapPath& path, double alpha);

/// Running integral of ||X||^{-alpha}, with ||X||^alpha linear inside each cell
/// (the image of a piecewise-linear ordinate), so that it inverts exp_integral
/// exactly on matching grids. Throws NumericalError if some ||X|| < 1e-12.
ScalarPath inverse_norm_integral(const SsmpPath& path, double alpha);

TimeChangeTable a_table(const SsmpPath& path, double alpha);

/// A_t, the generalized inverse of inverse_norm_integral at t.
double time_change_A(const SsmpPath& path, double alpha, double t);

/// xi_t = log ||X_{A_t}||, Theta_t = X_{A_t} / ||X_{A_t}|| on `output_grid`. Inside a
/// cell log ||X|| is linear in A-time and the direction is a normalized linear
/// interpolation in the cell's own time.
MapPath ssmp_to_map(const SsmpPath& path, double alpha, const TimeGrid& output_grid);

/// Same, on the default grid {j * mass / N : j < N}.
MapPath ssmp_to_map(const SsmpPath& path, double alpha);

}  // namespace mapflux::lamperti
