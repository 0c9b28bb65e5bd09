#include <cmath>
#include <vector>

#include "doctest.h"
#include "mapflux/errors.hpp"
#include "mapflux/fluctuation.hpp"
#include "mapflux/oracle.hpp"
#include "mapflux/stats.hpp"

using namespace mapflux;
using namespace mapflux::oracle;

namespace {

// Naive sum over every modulator sequence and every step sequence (4^n terms).
struct Brute {
  std::vector<double> gbar, gunder, sup, inf, excursions, lifetime;
  std::vector<double> occupation[2];
};

Brute brute_force(const OracleSpec& spec) {
  const int n = spec.horizon;
  const auto size = static_cast<std::size_t>(n + 1);
  Brute b;
  for (auto* v : {&b.gbar, &b.gunder, &b.sup, &b.inf, &b.excursions, &b.lifetime, &b.occupation[0],
                  &b.occupation[1]}) {
    v->assign(size, 0.0);
  }
  std::vector<double> eval(size, 0.0);
  if (spec.kill_prob == 0.0) {
    eval[size - 1] = 1.0;
  } else {
    double z = 0.0;
    for (int k = 0; k <= n; ++k) z += eval[k] = std::pow(1.0 - spec.kill_prob, k) * spec.kill_prob;
    for (double& w : eval) w /= z;
  }
  for (unsigned states = 0; states < (1u << n); ++states) {
    for (unsigned steps = 0; steps < (1u << n); ++steps) {
      // State J_i drives step i + 1; J_0 is uniform.
      double w = 0.5;
      std::vector<int> J(size), xi(size, 0);
      J[0] = static_cast<int>(states & 1u);
      for (int i = 1; i < n; ++i) {
        J[i] = static_cast<int>((states >> i) & 1u);
        w *= J[i] != J[i - 1] ? spec.flip_prob : 1.0 - spec.flip_prob;
      }
      for (int i = 1; i <= n; ++i) {
        const bool up = (steps >> (i - 1)) & 1u;
        const double pu = spec.up_prob[static_cast<std::size_t>(J[i - 1])];
        w *= up ? pu : 1.0 - pu;
        xi[i] = xi[i - 1] + (up ? 1 : -1);
      }
      if (w == 0.0) continue;
      for (int m = 0; m <= n; ++m) {
        const double wm = w * eval[m];
        if (wm == 0.0) continue;
        int s = 0, lo = 0, gb = 0, gu = 0, completed = 0;
        for (int i = 0; i <= m; ++i) {
          s = std::max(s, xi[i]);
          lo = std::min(lo, xi[i]);
          if (xi[i] == s) gb = i;
          if (xi[i] == lo) gu = i;
        }
        int run = 0, last_zero = 0;
        for (int i = 0; i <= m; ++i) {
          if (xi[i] == run || xi[i] > run) {
            if (i - last_zero > 1) ++completed;
            run = xi[i];
            last_zero = i;
          }
        }
        b.gbar[gb] += wm;
        b.gunder[gu] += wm;
        b.sup[s] += wm;
        b.inf[-lo] += wm;
        b.excursions[completed] += wm;
      }
      // Expected completed excursions use survival past their end.
      int run = 0, last_zero = 0;
      for (int i = 1; i <= n; ++i) {
        if (xi[i] >= run) {
          if (i - last_zero > 1) {
            double survive = 0.0;
            for (int m = i; m <= n; ++m) survive += eval[m];
            b.lifetime[i - last_zero] += w * survive;
            b.occupation[J[last_zero]][run] += w * survive;
          }
          run = xi[i];
          last_zero = i;
        }
      }
    }
  }
  return b;
}

void check_close(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12).scale(1.0));
}

}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("fair walk with two steps") {
  OracleSpec spec;
  spec.horizon = 2;
  const auto t = enumerate_discrete_map(spec);
  CHECK(t.gbar == std::vector<double>{0.25, 0.25, 0.5});
  CHECK(t.total_probability == 1.0);
  for (double lam : {0.0, 0.3, 2.0}) {
    CHECK(exact_laplace(spec, lam, Functional::GBar) ==
          doctest::Approx(0.25 + std::exp(-lam) / 4.0 + std::exp(-2.0 * lam) / 2.0));
  }
}

TEST_CASE("degenerate walks") {
  OracleSpec one;
  one.horizon = 1;
  CHECK(enumerate_discrete_map(one).gbar[1] == 0.5);

  OracleSpec up;
  up.horizon = 3;
  up.up_prob = {1.0, 1.0};
  const auto t = enumerate_discrete_map(up);
  CHECK(t.gbar[3] == 1.0);
  CHECK(t.sup[3] == 1.0);
  CHECK(t.gunder[0] == 1.0);
  CHECK(exact_laplace(up, 0.0, Functional::GBar) == 1.0);
  CHECK(exact_laplace(up, 0.4, Functional::GBar) == doctest::Approx(std::exp(-1.2)));
}

TEST_CASE("spec validation") {
  OracleSpec s;
  s.horizon = 23;
  CHECK_THROWS_AS(enumerate_discrete_map(s), ValidationError);
  s.horizon = 5;
  s.flip_prob = 1.5;
  CHECK_THROWS_AS(enumerate_discrete_map(s), ValidationError);
  s.flip_prob = 0.5;
  s.kill_prob = 1.0;
  CHECK_THROWS_AS(enumerate_discrete_map(s), ValidationError);
  CHECK_THROWS_AS(exact_laplace(OracleSpec{}, -1.0, Functional::GBar), ValidationError);
}

TEST_CASE("probabilities sum to one") {
  for (int n : {1, 5, 12, 18}) {
    OracleSpec s;
    s.horizon = n;
    s.flip_prob = 0.2;
    s.up_prob = {0.8, 0.3};
    s.kill_prob = n % 2 ? 0.1 : 0.0;
    const auto t = enumerate_discrete_map(s);
    CHECK(std::abs(t.total_probability - 1.0) <= 1e-12);
    double sum = 0.0;
    for (double v : t.gbar) sum += v;
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }
}

TEST_CASE("enumeration agrees with the naive 4^n sum") {
  for (const OracleSpec& spec : {OracleSpec{0.5, {0.5, 0.5}, 6, 0.0}, OracleSpec{0.3, {0.8, 0.25}, 7, 0.0},
                                 OracleSpec{0.1, {0.6, 0.45}, 8, 0.2}, OracleSpec{1.0, {1.0, 0.0}, 5, 0.0}}) {
    const auto t = enumerate_discrete_map(spec);
    const auto b = brute_force(spec);
    check_close(t.gbar, b.gbar);
    check_close(t.gunder, b.gunder);
    check_close(t.sup, b.sup);
    check_close(t.inf, b.inf);
    check_close(t.excursion_count, b.excursions);
    check_close(t.lifetime_mass, b.lifetime);
    check_close(t.occupation[0], b.occupation[0]);
    check_close(t.occupation[1], b.occupation[1]);
  }
}

TEST_CASE("sampled walks reproduce the enumerated tables") {
  OracleSpec spec;
  spec.horizon = 12;
  spec.flip_prob = 0.25;
  spec.up_prob = {0.6, 0.4};
  const auto t = enumerate_discrete_map(spec);
  const auto paths = simulate_discrete_map(spec, 40000, 3, 2);
  std::vector<double> gbar(13, 0.0), sup(13, 0.0), exc(13, 0.0);
  double mean_end = 0.0;
  for (const auto& p : paths) {
    const auto s = ordinate(p);
    const double w = 1.0 / static_cast<double>(paths.size());
    gbar[static_cast<std::size_t>(fluctuation::last_time_at_supremum(s, 12.0, 1e-9))] += w;
    sup[static_cast<std::size_t>(fluctuation::running_extrema(s).sup.values.back())] += w;
    std::size_t done = 0;
    for (const auto& e : fluctuation::excursions(fluctuation::reflected_process(s), 1e-9)) {
      done += e.censored ? 0 : 1;
    }
    exc[done] += w;
    mean_end += p.xi.back() * w;
  }
  CHECK(stats::tv_distance(gbar, t.gbar) < 0.02);
  CHECK(stats::tv_distance(sup, t.sup) < 0.02);
  CHECK(stats::tv_distance(exc, t.excursion_count) < 0.02);
  // Stationary modulator: mean step is the average of 2p - 1 over the two states.
  CHECK(std::abs(mean_end - 0.0) < 4.0 * 3.5 / std::sqrt(40000.0));
}

TEST_CASE("i.i.d. steps have the binomial mean") {
  OracleSpec spec;
  spec.horizon = 20;
  spec.up_prob = {0.7, 0.7};
  const auto paths = simulate_discrete_map(spec, 20000, 4, 1);
  double mean = 0.0;
  for (const auto& p : paths) mean += p.xi.back() / 20000.0;
  const double sd = std::sqrt(20.0 * 4.0 * 0.7 * 0.3);
  CHECK(std::abs(mean - 20.0 * 0.4) < 4.0 * sd / std::sqrt(20000.0));
}

TEST_CASE("geometric killing matches an exponential clock") {
  OracleSpec spec;
  spec.horizon = 12;
  spec.kill_prob = 0.6;
  const double q = kill_rate(spec);
  CHECK(q == doctest::Approx(-std::log(0.4)));
  const auto t = enumerate_discrete_map(spec);
  OracleSpec alive = spec;
  alive.kill_prob = 0.0;
  const auto paths = simulate_discrete_map(alive, 40000, 5, 1);
  auto rng = seed_stream(99, 0);
  const auto r = fluctuation::sample_g_at_exponential(paths, q, 1e-9, rng);
  std::vector<double> g(13, 0.0);
  for (const auto& s : r.samples) g[static_cast<std::size_t>(s.g_bar)] += 1.0 / static_cast<double>(r.samples.size());
  CHECK(stats::tv_distance(g, t.gbar) < 0.02);
  CHECK(r.rejections < 10);
  std::vector<double> gb;
  for (const auto& s : r.samples) gb.push_back(s.g_bar);
  for (double lam : {0.1, 0.5, 1.0}) {
    const auto e = fluctuation::laplace_estimate(gb, lam, q, r.rejections);
    CHECK(std::abs(e.estimate - exact_laplace(t, lam, Functional::GBar)) <= 3.0 * e.stderr_);
  }
}

}  // TEST_SUITE
