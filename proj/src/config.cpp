#include "mapflux/config.hpp"

#include <cmath>

#include "mapflux/errors.hpp"

namespace mapflux {

std::size_t SimulationConfig::steps() const {
  return static_cast<std::size_t>(std::floor(t_max / dt * (1.0 + 1e-12)));
}

void validate_config(const SimulationConfig& c) {
  validate_model(c.model);
  if (!(c.dt > 0.0) || !std::isfinite(c.dt)) throw ValidationError("dt must be positive");
  if (!(c.t_max > 0.0) || !std::isfinite(c.t_max)) throw ValidationError("t_max must be positive");
  if (!(c.dt < c.t_max) && c.dt != c.t_max) throw ValidationError("dt must be below t_max");
  if (c.n_paths == 0) throw ValidationError("n_paths must be positive");
  if (!(c.alpha > 0.0)) throw ValidationError("alpha must be positive");
  if (!(c.epsilon_zero > 0.0)) throw ValidationError("epsilon_zero must be positive");
  if (!(c.burn_in >= 0.0)) throw ValidationError("burn_in must be nonnegative");
  if (!(c.burn_in < c.t_max)) throw ValidationError("burn_in must be below t_max");
  if (!(c.wall_delta > 0.0)) throw ValidationError("wall_delta must be positive");
  if (c.record_every == 0) throw ValidationError("record_every must be positive");
}

double diffusion_epsilon(double dt) { return 10.0 * std::sqrt(dt); }

}  // namespace mapflux
