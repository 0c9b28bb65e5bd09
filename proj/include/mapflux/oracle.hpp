#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "mapflux/core.hpp"
#include "mapflux/model_spec.hpp"
#include "mapflux/random.hpp"

namespace mapflux::oracle {

/// Largest horizon accepted by exhaustive enumeration.
inline constexpr int kMaxEnumerationHorizon = 22;

/// Exact law of the walk functionals read at the evaluation index m. Without
/// killing m = n; with kill_prob p, m is Geometric(p) on {0, 1, ...}
/// conditioned on m <= n.
///
/// Vectors indexed by a time or count run over 0..n. `sup` is indexed by the
/// value, `inf` by minus the value.
struct OracleTables {
  int horizon = 0;
  std::vector<double> eval_index;
  std::vector<double> gbar;
  std::vector<double> gunder;
  std::vector<double> sup;
  std::vector<double> inf;
  /// Instants i >= 1 with xi_i equal to the running maximum.
  std::vector<double> weak_ladder_count;
  /// Instants i >= 1 with xi_i strictly above every earlier value.
  std::vector<double> strict_ladder_count;
  std::vector<double> excursion_count;
  /// Expected number of completed excursions of each lifetime.
  std::vector<double> lifetime_mass;
  /// Expected number of completed excursions starting in modulator state s at
  /// ladder height z: occupation[s][z].
  std::array<std::vector<double>, 2> occupation;
  double total_probability = 0.0;
};

/// Depth-first sum over all 2^n step sequences carrying the joint law of the
/// modulator state, so the modulator is summed out exactly at each node.
/// The modulator starts uniform, steps up with up_prob[J], then flips with flip_prob.
OracleTables enumerate_discrete_map(const OracleSpec& spec);

enum class Functional { GBar, GUnder };

/// E[exp(-lambda * value)] from the enumerated table.
double exact_laplace(const OracleSpec& spec, double lambda, Functional which);
double exact_laplace(const OracleTables& tables, double lambda, Functional which);

/// Geometric killing rate matching kill_prob: q = -log(1 - kill_prob).
double kill_rate(const OracleSpec& spec);

/// One walk on the integer grid {0, ..., n}; modulator state 0 is embedded as
/// theta = (1, 0) and state 1 as theta = (0, 1). Horizons up to 1e7 are allowed.
MapPath simulate_discrete_path(const OracleSpec& spec, Rng& rng);

/// Path i drawn from seed_stream(master_seed, i).
std::vector<MapPath> simulate_discrete_map(const OracleSpec& spec, std::size_t n_paths,
                                           std::uint64_t master_seed, std::size_t workers);

}  // namespace mapflux::oracle
