#pragma once

#include <cmath>
#include <vector>

#include "mapflux/core.hpp"

namespace testing {

// Path on the integer grid 0..n-1 with a fixed direction.
inline mapflux::MapPath integer_path(const std::vector<double>& xi, double angle = 0.3) {
  std::vector<double> t(xi.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i);
  mapflux::MapPath p;
  p.grid = mapflux::TimeGrid(t);
  p.xi = xi;
  p.dim = 2;
  for (std::size_t i = 0; i < xi.size(); ++i) {
    p.theta.push_back(std::cos(angle));
    p.theta.push_back(std::sin(angle));
  }
  return p;
}

inline mapflux::ScalarPath integer_scalar(const std::vector<double>& v) {
  std::vector<double> t(v.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i);
  return {mapflux::TimeGrid(t), v};
}

// Path on a uniform grid with xi given by f(t) and constant direction.
template <class F>
mapflux::MapPath function_path(double dt, double t_max, F f, double angle = 0.4) {
  mapflux::MapPath p;
  p.grid = mapflux::make_time_grid(dt, t_max);
  for (std::size_t i = 0; i < p.grid.size(); ++i) {
    p.xi.push_back(f(p.grid[i]));
    p.theta.push_back(std::cos(angle));
    p.theta.push_back(std::sin(angle));
  }
  return p;
}

}  // namespace testing
