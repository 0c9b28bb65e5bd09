#include "mapflux/oracle.hpp"

#include <cmath>

#include "mapflux/errors.hpp"
#include "mapflux/parallel.hpp"

namespace mapflux::oracle {

namespace {

using Joint = std::array<std::array<double, 2>, 2>;  // [state at last zero][current state]

struct Node {
  int depth = 0;
  int value = 0;
  int sup = 0;
  int inf = 0;
  int gbar = 0;
  int gunder = 0;
  int weak = 0;
  int strict = 0;
  int completed = 0;
  int last_zero = 0;
  bool away = false;
  Joint joint{};
};

class Enumerator {
 public:
  Enumerator(const OracleSpec& spec) : spec_(spec), n_(spec.horizon) {
    const auto size = static_cast<std::size_t>(n_ + 1);
    t_.horizon = n_;
    for (auto* v : {&t_.eval_index, &t_.gbar, &t_.gunder, &t_.sup, &t_.inf, &t_.weak_ladder_count,
                    &t_.strict_ladder_count, &t_.excursion_count, &t_.lifetime_mass,
                    &t_.occupation[0], &t_.occupation[1]}) {
      v->assign(size, 0.0);
    }
    eval_.assign(size, 0.0);
    if (spec.kill_prob == 0.0) {
      eval_[size - 1] = 1.0;
    } else {
      double z = 0.0;
      for (int k = 0; k <= n_; ++k) {
        eval_[static_cast<std::size_t>(k)] = std::pow(1.0 - spec.kill_prob, k) * spec.kill_prob;
        z += eval_[static_cast<std::size_t>(k)];
      }
      for (double& w : eval_) w /= z;
    }
    survive_.assign(size + 1, 0.0);
    for (int k = n_; k >= 0; --k) {
      survive_[static_cast<std::size_t>(k)] =
          survive_[static_cast<std::size_t>(k) + 1] + eval_[static_cast<std::size_t>(k)];
    }
  }

  OracleTables run() {
    Node root;
    root.joint[0][0] = 0.5;
    root.joint[1][1] = 0.5;
    visit(root);
    t_.eval_index = eval_;
    return std::move(t_);
  }

 private:
  static double mass(const Joint& j) { return j[0][0] + j[0][1] + j[1][0] + j[1][1]; }

  void record(const Node& node) {
    const double w = mass(node.joint) * eval_[static_cast<std::size_t>(node.depth)];
    if (w == 0.0) return;
    t_.total_probability += w;
    t_.gbar[static_cast<std::size_t>(node.gbar)] += w;
    t_.gunder[static_cast<std::size_t>(node.gunder)] += w;
    t_.sup[static_cast<std::size_t>(node.sup)] += w;
    t_.inf[static_cast<std::size_t>(-node.inf)] += w;
    t_.weak_ladder_count[static_cast<std::size_t>(node.weak)] += w;
    t_.strict_ladder_count[static_cast<std::size_t>(node.strict)] += w;
    t_.excursion_count[static_cast<std::size_t>(node.completed)] += w;
  }

  void visit(const Node& node) {
    record(node);
    if (node.depth == n_) return;
    const double f = spec_.flip_prob;
    for (int step : {1, -1}) {
      Node child = node;
      child.depth = node.depth + 1;
      child.value = node.value + step;
      for (int a = 0; a < 2; ++a) {
        double stay[2];
        for (int b = 0; b < 2; ++b) {
          const double up = spec_.up_prob[static_cast<std::size_t>(b)];
          stay[b] = node.joint[a][b] * (step > 0 ? up : 1.0 - up);
        }
        child.joint[a][0] = stay[0] * (1.0 - f) + stay[1] * f;
        child.joint[a][1] = stay[1] * (1.0 - f) + stay[0] * f;
      }
      if (mass(child.joint) == 0.0) continue;
      const double survive = survive_[static_cast<std::size_t>(child.depth)];
      if (child.value > node.sup) ++child.strict;
      child.sup = std::max(node.sup, child.value);
      child.inf = std::min(node.inf, child.value);
      if (child.value == child.inf) child.gunder = child.depth;
      if (child.value == child.sup) {
        child.gbar = child.depth;
        ++child.weak;
        if (node.away) {
          ++child.completed;
          const double m = mass(child.joint) * survive;
          t_.lifetime_mass[static_cast<std::size_t>(child.depth - node.last_zero)] += m;
          const auto height = static_cast<std::size_t>(node.sup);
          for (int a = 0; a < 2; ++a) {
            t_.occupation[static_cast<std::size_t>(a)][height] +=
                (child.joint[a][0] + child.joint[a][1]) * survive;
          }
        }
        Joint reset{};
        for (int b = 0; b < 2; ++b) reset[b][b] = child.joint[0][b] + child.joint[1][b];
        child.joint = reset;
        child.last_zero = child.depth;
        child.away = false;
      } else {
        child.away = true;
      }
      visit(child);
    }
  }

  const OracleSpec& spec_;
  int n_;
  OracleTables t_;
  std::vector<double> eval_;
  std::vector<double> survive_;
};

}  // namespace

OracleTables enumerate_discrete_map(const OracleSpec& spec) {
  validate_oracle_spec(spec, kMaxEnumerationHorizon);
  return Enumerator(spec).run();
}

double exact_laplace(const OracleTables& tables, double lambda, Functional which) {
  if (!(lambda >= 0.0)) throw ValidationError("lambda must be nonnegative");
  const auto& table = which == Functional::GBar ? tables.gbar : tables.gunder;
  double s = 0.0;
  for (std::size_t g = 0; g < table.size(); ++g) {
    s += table[g] * std::exp(-lambda * static_cast<double>(g));
  }
  return s;
}

double exact_laplace(const OracleSpec& spec, double lambda, Functional which) {
  return exact_laplace(enumerate_discrete_map(spec), lambda, which);
}

double kill_rate(const OracleSpec& spec) {
  if (!(spec.kill_prob > 0.0 && spec.kill_prob < 1.0)) {
    throw ValidationError("kill rate needs 0 < kill_prob < 1");
  }
  return -std::log1p(-spec.kill_prob);
}

MapPath simulate_discrete_path(const OracleSpec& spec, Rng& rng) {
  validate_oracle_spec(spec, 10'000'000);
  const auto n = static_cast<std::size_t>(spec.horizon);
  MapPath path;
  path.grid = make_time_grid(1.0, static_cast<double>(n));
  path.dim = 2;
  path.xi.resize(n + 1);
  path.theta.resize(2 * (n + 1));
  int state = uniform01(rng) < 0.5 ? 0 : 1;
  double value = 0.0;
  for (std::size_t i = 0;; ++i) {
    path.xi[i] = value;
    path.theta[2 * i] = state == 0 ? 1.0 : 0.0;
    path.theta[2 * i + 1] = state == 0 ? 0.0 : 1.0;
    if (i == n) break;
    value += uniform01(rng) < spec.up_prob[static_cast<std::size_t>(state)] ? 1.0 : -1.0;
    if (uniform01(rng) < spec.flip_prob) state = 1 - state;
  }
  return path;
}

std::vector<MapPath> simulate_discrete_map(const OracleSpec& spec, std::size_t n_paths,
                                           std::uint64_t master_seed, std::size_t workers) {
  validate_oracle_spec(spec, 10'000'000);
  std::vector<MapPath> out(n_paths);
  parallel_for(n_paths, workers, [&](std::size_t i) {
    Rng rng = seed_stream(master_seed, i);
    out[i] = simulate_discrete_path(spec, rng);
  });
  return out;
}

}  // namespace mapflux::oracle
