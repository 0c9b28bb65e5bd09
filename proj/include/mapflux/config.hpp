#pragma once

#include <cstddef>
#include <cstdint>

#include "mapflux/model_spec.hpp"

namespace mapflux {

struct SimulationConfig {
  ModelSpec model = FreeBessel2D{};
  double dt = 1e-3;
  double t_max = 1.0;
  std::size_t n_paths = 1;
  std::uint64_t master_seed = 0;
  double alpha = 2.0;
  double epsilon_zero = 1e-9;
  double burn_in = 0.0;
  double wall_delta = 1e-6;
  /// Keep every `record_every`-th integration step in the stored path.
  std::size_t record_every = 1;

  std::size_t steps() const;
};

/// Throws ValidationError on any violated field constraint.
void validate_config(const SimulationConfig& config);

/// Zero-set tolerance for diffusion paths: 10 * sqrt(dt).
double diffusion_epsilon(double dt);

}  // namespace mapflux
