#include "mapflux/cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <type_traits>
#include <numbers>

#include <CLI11.hpp>
#include <json.hpp>

#include "mapflux/classify.hpp"
#include "mapflux/config.hpp"
#include "mapflux/duality.hpp"
#include "mapflux/errors.hpp"
#include "mapflux/fluctuation.hpp"
#include "mapflux/io.hpp"
#include "mapflux/lamperti.hpp"
#include "mapflux/models.hpp"
#include "mapflux/oracle.hpp"
#include "mapflux/parallel.hpp"
#include "mapflux/stats.hpp"

namespace mapflux::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

constexpr std::uint64_t kExponentialSalt = 0x6578'706f'6e65'6e74ULL;

class VerificationFailure : public Error {
 public:
  using Error::Error;
};

// Every option is registered with a JSON key so that config files and
// manifests can supply it and the manifest can echo the resolved value.
class Settings {
 public:
  template <class T>
  CLI::Option* add(CLI::App* app, const std::string& flags, const std::string& key, T& var,
                   const std::string& help, bool simulation = false) {
    CLI::Option* o = app->add_option(flags, var, help)->capture_default_str();
    entries_.push_back({key, simulation, o,
                        [&var](const nlohmann::json& j) {
                          if constexpr (std::is_floating_point_v<T>) {
                            // NaN is written as null
                            if (j.is_null()) {
                              var = std::numeric_limits<T>::quiet_NaN();
                              return;
                            }
                          }
                          var = j.get<T>();
                        },
                        [&var] { return json(var); }});
    return o;
  }

  CLI::Option* flag(CLI::App* app, const std::string& flags, const std::string& key, bool& var,
                    const std::string& help) {
    CLI::Option* o = app->add_flag(flags, var, help);
    entries_.push_back({key, false, o, [&var](const nlohmann::json& j) { var = j.get<bool>(); },
                        [&var] { return json(var); }});
    return o;
  }

  // Values from the file fill every option that was not given on the command line.
  void apply(const nlohmann::json& config, const nlohmann::json& options) const {
    auto check_keys = [this](const nlohmann::json& obj, bool simulation, const char* where) {
      if (!obj.is_object()) throw ValidationError(std::string(where) + " must be a JSON object");
      for (const auto& item : obj.items()) {
        if (simulation && item.key() == "options") continue;
        bool known = false;
        for (const auto& e : entries_) known = known || (e.key == item.key());
        if (!known) {
          throw ValidationError(std::string("unknown key '") + item.key() + "' in " + where);
        }
      }
    };
    check_keys(config, true, "config");
    check_keys(options, false, "options");
    for (const auto& e : entries_) {
      if (e.opt->count() > 0) continue;
      const nlohmann::json* src = nullptr;
      if (config.contains(e.key)) src = &config[e.key];
      if (options.contains(e.key)) src = &options[e.key];
      if (src == nullptr) continue;
      try {
        e.load(*src);
      } catch (const nlohmann::json::exception& ex) {
        throw ValidationError("bad value for '" + e.key + "': " + ex.what());
      }
    }
  }

  json dump(bool simulation) const {
    json out = json::object();
    for (const auto& e : entries_) {
      if (e.simulation == simulation) out[e.key] = e.save();
    }
    return out;
  }

 private:
  struct Entry {
    std::string key;
    bool simulation;
    CLI::Option* opt;
    std::function<void(const nlohmann::json&)> load;
    std::function<json()> save;
  };
  std::vector<Entry> entries_;
};

struct Params {
  std::string config_file;
  std::string out = ".";
  // simulation config
  std::string model = "free-bessel";
  double k = 0.5;
  double dt = 1e-3;
  double t_max = 1.0;
  std::size_t n_paths = 1;
  std::uint64_t seed = 0;
  double alpha = 2.0;
  double epsilon = -1.0;
  double burn_in = 0.0;
  double wall_delta = 1e-6;
  std::size_t record_every = 0;
  double flip_prob = 0.5;
  std::vector<double> up_prob{0.5, 0.5};
  int horizon = 12;
  double kill_prob = 0.0;
  // simulate
  std::string kind = "map";
  double theta0 = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> x0;
  // transform
  std::string input;
  std::string direction = "map-to-ssmp";
  std::size_t output_points = 0;
  // fluctuation / classify
  double q = 0.0;
  std::vector<double> lambda_grid{1e-1, 1e-2, 1e-3};
  std::vector<double> horizons;
  bool negate = false;
  std::string expect;
  // verify-duality
  double t = 5.0;
  std::size_t n = 2000;
  std::size_t chains = 256;
  double run_time = 100.0;
  double stationary_burn_in = 50.0;
  double stationary_dt = 1e-3;
  std::size_t bins = 256;
  std::size_t coarsen = 8;
  std::size_t invariance_samples = 0;
  double evolve_time = 0.5;
  // verify-lyapunov
  std::size_t points = 100;
  double h = 1e-5;
  // oracle
  std::size_t samples = 100000;
  std::vector<double> lambdas{0.1, 0.5, 1.0};
};

void add_simulation_options(CLI::App* app, Settings& s, Params& p) {
  s.add(app, "--model", "model", p.model,
        "free-bessel | dunkl-a1 | dunkl-b2 | dunkl-c2 | dunkl-d2 | oracle", true);
  s.add(app, "--k", "k", p.k, "Dunkl multiplicity (>= 1/2)", true);
  s.add(app, "--dt", "dt", p.dt, "integration step", true);
  s.add(app, "--t-max", "t_max", p.t_max, "horizon", true);
  s.add(app, "--paths", "n_paths", p.n_paths, "number of paths", true);
  s.add(app, "--seed", "master_seed", p.seed, "64-bit master seed", true);
  s.add(app, "--alpha", "alpha", p.alpha, "self-similarity index", true);
  s.add(app, "--epsilon", "epsilon_zero", p.epsilon,
        "zero-set tolerance (default 10 sqrt(dt), 1e-9 for the oracle)", true);
  s.add(app, "--burn-in", "burn_in", p.burn_in, "burn-in time", true);
  s.add(app, "--wall-delta", "wall_delta", p.wall_delta, "wall proximity threshold", true);
  s.add(app, "--record-every", "record_every", p.record_every,
        "keep every n-th step (default: about 10^4 rows per path)", true);
  s.add(app, "--flip-prob", "flip_prob", p.flip_prob, "oracle modulator flip probability", true);
  s.add(app, "--up-prob", "up_prob", p.up_prob, "oracle up-step probability per state", true)
      ->expected(2);
  s.add(app, "--horizon", "horizon", p.horizon, "oracle horizon (steps)", true);
  s.add(app, "--kill-prob", "kill_prob", p.kill_prob, "oracle per-step killing probability", true);
}

CLI::App* add_common(CLI::App& app, const std::string& name, const std::string& help, Settings& s,
                     Params& p, bool simulation) {
  CLI::App* sub = app.add_subcommand(name, help);
  sub->add_option("--config", p.config_file, "JSON config file or run manifest")
      ->check(CLI::ExistingFile);
  sub->add_option("--out", p.out, "output directory")->capture_default_str();
  if (simulation) add_simulation_options(sub, s, p);
  return sub;
}

bool is_oracle(const Params& p) { return p.model == "oracle"; }

OracleSpec oracle_spec(const Params& p) {
  if (p.up_prob.size() != 2) throw ValidationError("--up-prob needs two values");
  OracleSpec spec;
  spec.flip_prob = p.flip_prob;
  spec.up_prob = {p.up_prob[0], p.up_prob[1]};
  spec.horizon = p.horizon;
  spec.kill_prob = p.kill_prob;
  return spec;
}

// Fills the automatic defaults so that the manifest records concrete values.
SimulationConfig resolve_config(Params& p) {
  SimulationConfig c;
  if (is_oracle(p)) {
    c.model = DiscreteOracle{oracle_spec(p)};
  } else {
    c.model = parse_model(p.model, p.k);
  }
  if (p.epsilon < 0.0) p.epsilon = is_oracle(p) ? 1e-9 : diffusion_epsilon(p.dt);
  c.dt = p.dt;
  c.t_max = p.t_max;
  c.n_paths = p.n_paths;
  c.master_seed = p.seed;
  c.alpha = p.alpha;
  c.epsilon_zero = p.epsilon;
  c.burn_in = p.burn_in;
  c.wall_delta = p.wall_delta;
  if (p.record_every == 0) p.record_every = std::max<std::size_t>(1, c.steps() / 10000);
  c.record_every = p.record_every;
  validate_config(c);
  return c;
}

void load_config_file(const Params& p, const Settings& s) {
  if (p.config_file.empty()) return;
  std::ifstream in(p.config_file);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(p.config_file + ": " + e.what());
  }
  if (!j.is_object()) throw ValidationError(p.config_file + ": expected a JSON object");
  nlohmann::json config = j.contains("config") ? j["config"] : j;
  nlohmann::json options = j.contains("options") ? j["options"] : nlohmann::json::object();
  if (config.contains("options")) config.erase("options");
  s.apply(config, options);
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Run {
  const std::vector<std::string>& args;
  std::string subcommand;
  fs::path out;
  std::size_t workers = 1;
  std::vector<std::string> outputs;
  std::size_t wall_rejections = 0;
  std::vector<std::size_t> wall_rejections_per_path;

  fs::path file(const std::string& rel) {
    outputs.push_back(rel);
    const fs::path f = out / rel;
    fs::create_directories(f.parent_path());
    return f;
  }

  void write_json(const std::string& rel, const json& j) {
    std::ofstream o(file(rel), std::ios::binary);
    o << j.dump(2) << '\n';
  }

  void write_manifest(const Settings& s) const {
    json m;
    m["tool"] = "mapflux";
    m["version"] = MAPFLUX_VERSION;
    m["timestamp"] = utc_timestamp();
    m["command"] = args;
    m["subcommand"] = subcommand;
    m["config"] = s.dump(true);
    m["options"] = s.dump(false);
    m["workers"] = workers;
    m["outputs"] = outputs;
    m["wall_rejections"] = {{"total", wall_rejections}, {"per_path", wall_rejections_per_path}};
    std::ofstream o(out / "manifest.json", std::ios::binary);
    o << m.dump(2) << '\n';
  }
};

std::string path_name(std::size_t i) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "paths/path_%06zu.csv", i);
  return buf;
}

UnitVector start_direction(const Params& p, const SimulationConfig& c) {
  if (std::isnan(p.theta0)) return models::arc_midpoint(c.model);
  return UnitVector::from_angle(p.theta0);
}

// Produces path i of the configured model (continuous MAP or oracle walk).
MapPath produce_map(const SimulationConfig& c, const UnitVector* theta0, std::size_t i) {
  if (const auto* o = std::get_if<DiscreteOracle>(&c.model)) {
    Rng rng = seed_stream(c.master_seed, i);
    return oracle::simulate_discrete_path(o->spec, rng);
  }
  return models::simulate_map_path(c, *theta0, i);
}

io::Sidecar sidecar_for(const SimulationConfig& c, std::optional<std::size_t> kill) {
  io::Sidecar s;
  s.model = model_name(c.model);
  s.alpha = c.alpha;
  const bool discrete = std::holds_alternative<DiscreteOracle>(c.model);
  s.dt = discrete ? 1.0 : c.dt;
  s.t_max = discrete ? std::get<DiscreteOracle>(c.model).spec.horizon : c.t_max;
  s.seed = c.master_seed;
  s.kill_index = kill;
  return s;
}

int cmd_simulate(Run& run, Params& p) {
  const SimulationConfig c = resolve_config(p);
  if (p.kind != "map" && p.kind != "ssmp") throw ValidationError("--kind must be map or ssmp");
  const bool discrete = std::holds_alternative<DiscreteOracle>(c.model);
  if (discrete && p.kind == "ssmp") throw ValidationError("the oracle has no ssMp form");
  std::optional<UnitVector> theta0;
  if (!discrete) theta0 = start_direction(p, c);
  models::Vec2 x0{1.0, 1.0};
  if (!p.x0.empty()) {
    if (p.x0.size() != 2) throw ValidationError("--x0 needs two values");
    x0 = {p.x0[0], p.x0[1]};
  } else if (!discrete && !std::holds_alternative<FreeBessel2D>(c.model)) {
    x0 = {(*theta0)[0], (*theta0)[1]};
  }
  run.wall_rejections_per_path.assign(c.n_paths, 0);
  for (std::size_t i = 0; i < c.n_paths; ++i) run.file(path_name(i));
  parallel_for(c.n_paths, run.workers, [&](std::size_t i) {
    const fs::path f = run.out / path_name(i);
    if (p.kind == "map") {
      const MapPath path = produce_map(c, theta0 ? &*theta0 : nullptr, i);
      io::write_map_csv(f, path);
      io::write_sidecar(io::sidecar_path(f), sidecar_for(c, path.kill_index));
      run.wall_rejections_per_path[i] = path.wall_rejections;
    } else {
      const SsmpPath path = models::simulate_ssmp_path(c, x0, i);
      io::write_ssmp_csv(f, path);
      io::write_sidecar(io::sidecar_path(f), sidecar_for(c, path.kill_index));
      run.wall_rejections_per_path[i] = path.wall_rejections;
    }
  });
  for (std::size_t i = 0; i < c.n_paths; ++i) {
    run.outputs.push_back(path_name(i) + ".json");
    run.wall_rejections += run.wall_rejections_per_path[i];
  }
  std::sort(run.outputs.begin(), run.outputs.end());
  std::cout << "wrote " << c.n_paths << " paths to " << (run.out / "paths").string() << "\n";
  return kOk;
}

int cmd_transform(Run& run, Params& p) {
  if (p.input.empty()) throw ValidationError("--input is required");
  if (!(p.alpha > 0.0)) throw ValidationError("alpha must be positive");
  std::string model = "unknown";
  const fs::path meta = io::sidecar_path(p.input);
  if (fs::exists(meta)) model = io::read_sidecar(meta).model;
  io::Sidecar out_meta;
  out_meta.model = model;
  out_meta.alpha = p.alpha;
  const fs::path f = run.file("transformed.csv");
  if (p.direction == "map-to-ssmp") {
    const MapPath in = io::read_map_csv(p.input);
    SsmpPath x;
    if (p.output_points == 0) {
      x = lamperti::map_to_ssmp(in, p.alpha);
    } else {
      const double mass = lamperti::exp_integral(in, p.alpha).values.back();
      std::vector<double> t(p.output_points);
      for (std::size_t j = 0; j < t.size(); ++j) {
        t[j] = mass * static_cast<double>(j) / static_cast<double>(t.size());
      }
      x = lamperti::map_to_ssmp(in, p.alpha, TimeGrid(std::move(t)));
    }
    io::write_ssmp_csv(f, x);
    out_meta.dt = x.grid.size() > 1 ? x.grid[1] : 0.0;
    out_meta.t_max = x.grid.back();
    out_meta.kill_index = x.kill_index;
  } else if (p.direction == "ssmp-to-map") {
    const SsmpPath in = io::read_ssmp_csv(p.input);
    MapPath m;
    if (p.output_points == 0) {
      m = lamperti::ssmp_to_map(in, p.alpha);
    } else {
      const double mass = lamperti::inverse_norm_integral(in, p.alpha).values.back();
      std::vector<double> t(p.output_points);
      for (std::size_t j = 0; j < t.size(); ++j) {
        t[j] = mass * static_cast<double>(j) / static_cast<double>(t.size());
      }
      m = lamperti::ssmp_to_map(in, p.alpha, TimeGrid(std::move(t)));
    }
    io::write_map_csv(f, m);
    out_meta.dt = m.grid.size() > 1 ? m.grid[1] : 0.0;
    out_meta.t_max = m.grid.back();
    out_meta.kill_index = m.kill_index;
  } else {
    throw ValidationError("--direction must be map-to-ssmp or ssmp-to-map");
  }
  io::write_sidecar(io::sidecar_path(f), out_meta);
  run.outputs.push_back("transformed.csv.json");
  return kOk;
}

std::vector<double> default_horizons(const SimulationConfig& c) {
  double T = c.t_max;
  if (const auto* o = std::get_if<DiscreteOracle>(&c.model)) T = o->spec.horizon;
  if (!std::holds_alternative<DiscreteOracle>(c.model)) {
    T = static_cast<double>(c.steps() / c.record_every * c.record_every) * c.dt;
  }
  return {T / 8.0, T / 4.0, T / 2.0, T};
}

json matrix_json(const std::vector<std::vector<double>>& m) {
  json out = json::array();
  for (const auto& row : m) out.push_back(row);
  return out;
}

int cmd_fluctuation(Run& run, Params& p) {
  const SimulationConfig c = resolve_config(p);
  if (p.horizons.empty()) p.horizons = default_horizons(c);
  const bool discrete = std::holds_alternative<DiscreteOracle>(c.model);
  std::optional<UnitVector> theta0;
  if (!discrete) theta0 = start_direction(p, c);
  struct PerPath {
    fluctuation::FluctuationSummary summary;
    std::vector<double> g_bar;
    std::optional<fluctuation::ExponentialSample> exp;
    std::size_t rejected = 0;
    std::size_t walls = 0;
  };
  std::vector<PerPath> results(c.n_paths);
  parallel_for(c.n_paths, run.workers, [&](std::size_t i) {
    MapPath path = produce_map(c, theta0 ? &*theta0 : nullptr, i);
    if (p.negate) path = negate_ordinate(std::move(path));
    const ScalarPath xi = ordinate(path);
    PerPath r;
    r.walls = path.wall_rejections;
    r.summary = fluctuation::summarize(xi, xi.grid.back(), c.epsilon_zero);
    r.g_bar = fluctuation::horizon_profile(xi, p.horizons, c.epsilon_zero).g_bar;
    if (p.q > 0.0) {
      Rng rng = seed_stream(c.master_seed ^ kExponentialSalt, i);
      const auto s = fluctuation::sample_g_at_exponential(std::span(&path, 1), p.q, c.epsilon_zero,
                                                          rng);
      r.rejected = s.rejections;
      if (!s.samples.empty()) r.exp = s.samples.front();
    }
    results[i] = std::move(r);
  });

  {
    std::ofstream csv(run.file("fluctuation_summary.csv"), std::ios::binary);
    csv << "path,horizon,g_bar,g_under,sup,inf\n";
    for (std::size_t i = 0; i < results.size(); ++i) {
      const auto& s = results[i].summary;
      csv << i << ',' << io::format_double(s.horizon) << ',' << io::format_double(s.g_bar) << ','
          << io::format_double(s.g_under) << ',' << io::format_double(s.sup) << ','
          << io::format_double(s.inf) << '\n';
    }
  }
  std::vector<std::vector<double>> g_bar;
  for (const auto& r : results) {
    g_bar.push_back(r.g_bar);
    run.wall_rejections += r.walls;
  }
  const auto mass = fluctuation::final_excursion_mass_estimate(g_bar, p.lambda_grid, p.horizons);
  json out;
  out["lambdas"] = mass.lambdas;
  out["horizons"] = mass.horizons;
  out["laplace_matrix"] = matrix_json(mass.estimate);
  out["laplace_stderr"] = matrix_json(mass.stderr_);
  out["proxy_value"] = mass.proxy;
  out["diagnostics"] = {{"monotone_in_lambda", mass.monotone_in_lambda},
                        {"monotone_in_horizon", mass.monotone_in_horizon},
                        {"epsilon_zero", c.epsilon_zero},
                        {"negated", p.negate},
                        {"n_paths", c.n_paths}};
  if (p.q > 0.0) {
    std::vector<double> gb;
    std::vector<double> gu;
    std::size_t rejected = 0;
    for (const auto& r : results) {
      rejected += r.rejected;
      if (r.exp) {
        gb.push_back(r.exp->g_bar);
        gu.push_back(r.exp->g_under);
      }
    }
    json e;
    e["q"] = p.q;
    e["n_samples"] = gb.size();
    e["rejection_count"] = rejected;
    json rows = json::array();
    for (double lambda : p.lambda_grid) {
      if (gb.empty()) break;
      const auto a = fluctuation::laplace_estimate(gb, lambda, p.q, rejected);
      const auto b = fluctuation::laplace_estimate(gu, lambda, p.q, rejected);
      rows.push_back({{"lambda", lambda},
                      {"g_bar", a.estimate},
                      {"g_bar_stderr", a.stderr_},
                      {"g_under", b.estimate},
                      {"g_under_stderr", b.stderr_}});
    }
    e["laplace"] = rows;
    out["exponential"] = e;
  }
  run.write_json("fluctuation.json", out);
  std::cout << "proxy " << mass.proxy << "\n";
  return kOk;
}

int cmd_classify(Run& run, Params& p) {
  const SimulationConfig c = resolve_config(p);
  if (p.horizons.empty()) p.horizons = default_horizons(c);
  const auto cls = classify::classify_model(c, p.horizons, p.lambda_grid, c.epsilon_zero, p.negate,
                                            run.workers);
  json out;
  out["verdict"] = classify::verdict_name(cls.verdict);
  out["slope"] = cls.slope;
  out["slope_ci"] = {cls.slope_lo, cls.slope_hi};
  out["gbar_ratio"] = cls.gbar_ratio;
  out["gunder_ratio"] = cls.gunder_ratio;
  out["proxy_up"] = cls.proxy_up;
  out["proxy_down"] = cls.proxy_down;
  out["consistent"] = cls.consistent;
  out["lambdas"] = cls.lambdas;
  out["horizons"] = cls.horizons;
  out["proxy_up_matrix"] = matrix_json(cls.proxy_up_matrix);
  out["proxy_down_matrix"] = matrix_json(cls.proxy_down_matrix);
  out["n_paths"] = cls.n_paths;
  out["protocol"] =
      "finite-horizon thresholds: ratios >= 0.9 / <= 0.1, oscillation needs both ratios > 0.1, "
      "99% slope interval, proxy tolerance 0.1";
  run.write_json("classification.json", out);
  std::cout << classify::verdict_name(cls.verdict) << "\n";
  if (!p.expect.empty() && p.expect != classify::verdict_name(cls.verdict)) {
    throw VerificationFailure("expected verdict " + p.expect);
  }
  return kOk;
}

int cmd_verify_duality(Run& run, Params& p) {
  SimulationConfig c = resolve_config(p);
  if (std::holds_alternative<DiscreteOracle>(c.model)) {
    throw ValidationError("verify-duality needs a continuous model");
  }
  duality::StationaryOptions opt;
  opt.chains = p.chains;
  opt.run_time = p.run_time;
  opt.burn_in = p.stationary_burn_in;
  opt.dt = p.stationary_dt;
  opt.bins = p.bins;
  const auto init = duality::build_stationary_initializer(c, opt, run.workers);
  {
    std::ofstream csv(run.file("pi_hat.csv"), std::ios::binary);
    csv << "angle_lo,angle_hi,mass\n";
    const auto& h = init.histogram();
    const auto w = h.normalized();
    for (std::size_t b = 0; b < w.size(); ++b) {
      csv << io::format_double(h.edges[b]) << ',' << io::format_double(h.edges[b + 1]) << ','
          << io::format_double(w[b]) << '\n';
    }
  }
  json out;
  out["mirror_tv"] = duality::mirror_tv(init.histogram(), p.coarsen);
  bool ok = true;
  if (p.invariance_samples > 0) {
    const auto inv = duality::invariance_check(c, init, p.invariance_samples, p.evolve_time,
                                               p.coarsen, 0.02, run.workers);
    out["invariance"] = {{"tv", inv.tv},
                         {"samples", inv.samples},
                         {"evolve_time", inv.evolve_time},
                         {"pass", inv.pass}};
    ok = ok && inv.pass;
  }
  const auto r = duality::reversal_check(c, init, p.t, p.n, run.workers);
  out["reversal"] = {{"t", r.t},
                     {"n", r.n},
                     {"ks_stat", r.ks_stat},
                     {"threshold", r.threshold},
                     {"pass", r.pass}};
  ok = ok && r.pass;
  run.write_json("duality.json", out);
  std::cout << "ks " << r.ks_stat << " threshold " << r.threshold << (r.pass ? " pass" : " fail")
            << "\n";
  if (!ok) throw VerificationFailure("duality check failed");
  return kOk;
}

int cmd_verify_lyapunov(Run& run, Params& p) {
  const SimulationConfig c = resolve_config(p);
  if (std::holds_alternative<DiscreteOracle>(c.model)) {
    throw ValidationError("verify-lyapunov needs a continuous model");
  }
  const auto arc = modulator_arc(c.model);
  const double margin = 0.01 * (arc[1] - arc[0]);
  const auto pts = models::arc_points(c.model, p.points, margin);
  const auto V = [&](double x, double y) { return models::lyapunov_V(c.model, x, y); };
  double worst_printed = 0.0;
  double worst_exact = 0.0;
  std::ofstream csv(run.file("lyapunov.csv"), std::ios::binary);
  csv << "angle,x,y,printed,finite_difference,exact\n";
  for (const auto& th : pts) {
    const double printed = models::lyapunov_LV_analytic(c.model, th);
    const double fd = models::apply_generator(c.model, V, th, p.h, c.wall_delta);
    const double exact = models::lyapunov_LV_exact(c.model, th);
    worst_printed = std::max(worst_printed, std::abs(printed - fd) / (1.0 + std::abs(printed)));
    worst_exact = std::max(worst_exact, std::abs(exact - fd) / (1.0 + std::abs(exact)));
    csv << io::format_double(th.angle()) << ',' << io::format_double(th[0]) << ','
        << io::format_double(th[1]) << ',' << io::format_double(printed) << ','
        << io::format_double(fd) << ',' << io::format_double(exact) << '\n';
  }
  // bounded on the arc: sup of both forms on a fine grid
  double sup_printed = -std::numeric_limits<double>::infinity();
  double sup_exact = sup_printed;
  double arg_printed = 0.0;
  const std::size_t grid = 10000;
  for (std::size_t i = 0; i <= grid; ++i) {
    const double phi = arc[0] + margin + (arc[1] - arc[0] - 2.0 * margin) *
                                             static_cast<double>(i) / static_cast<double>(grid);
    const UnitVector th = UnitVector::from_angle(phi);
    const double a = models::lyapunov_LV_analytic(c.model, th);
    if (a > sup_printed) {
      sup_printed = a;
      arg_printed = phi;
    }
    sup_exact = std::max(sup_exact, models::lyapunov_LV_exact(c.model, th));
  }
  const bool pass = worst_printed <= 1e-5;
  json out;
  out["model"] = model_name(c.model);
  out["points"] = pts.size();
  out["h"] = p.h;
  out["max_rel_error_printed_vs_fd"] = worst_printed;
  out["max_rel_error_exact_vs_fd"] = worst_exact;
  out["sup_printed"] = sup_printed;
  out["argsup_printed"] = arg_printed;
  out["sup_exact"] = sup_exact;
  out["pass"] = pass;
  if (!pass) {
    out["discrepancy"] = "printed closed form disagrees with the finite-difference generator; "
                         "the finite-difference and exact-derivative values agree";
  }
  run.write_json("lyapunov.json", out);
  std::cout << "printed vs fd " << worst_printed << ", exact vs fd " << worst_exact
            << (pass ? " pass" : " fail") << "\n";
  if (!pass) throw VerificationFailure("printed LV disagrees with the generator");
  return kOk;
}

int cmd_oracle(Run& run, Params& p) {
  const OracleSpec spec = oracle_spec(p);
  const auto tables = oracle::enumerate_discrete_map(spec);
  {
    std::ofstream csv(run.file("oracle_tables.csv"), std::ios::binary);
    csv << "index,eval_index,gbar,gunder,sup,neg_inf,weak_ladder_count,strict_ladder_count,"
           "excursion_count,lifetime_mass\n";
    for (int i = 0; i <= spec.horizon; ++i) {
      const auto u = static_cast<std::size_t>(i);
      csv << i << ',' << io::format_double(tables.eval_index[u]) << ','
          << io::format_double(tables.gbar[u]) << ',' << io::format_double(tables.gunder[u]) << ','
          << io::format_double(tables.sup[u]) << ',' << io::format_double(tables.inf[u]) << ','
          << io::format_double(tables.weak_ladder_count[u]) << ','
          << io::format_double(tables.strict_ladder_count[u]) << ','
          << io::format_double(tables.excursion_count[u]) << ','
          << io::format_double(tables.lifetime_mass[u]) << '\n';
    }
  }
  {
    std::ofstream csv(run.file("oracle_occupation.csv"), std::ios::binary);
    csv << "state,height,mass\n";
    for (int s = 0; s < 2; ++s) {
      for (int z = 0; z <= spec.horizon; ++z) {
        csv << s << ',' << z << ','
            << io::format_double(tables.occupation[static_cast<std::size_t>(s)]
                                                   [static_cast<std::size_t>(z)])
            << '\n';
      }
    }
  }
  json out;
  out["total_probability"] = tables.total_probability;
  bool ok = std::abs(tables.total_probability - 1.0) <= 1e-12;
  if (p.samples > 0) {
    const auto paths = oracle::simulate_discrete_map(spec, p.samples, p.seed, run.workers);
    std::vector<double> gb;
    std::vector<double> gu;
    const double n_steps = spec.horizon;
    std::size_t rejected = 0;
    if (spec.kill_prob > 0.0) {
      Rng rng = seed_stream(p.seed ^ kExponentialSalt, 0);
      const auto s = fluctuation::sample_g_at_exponential(paths, oracle::kill_rate(spec), 1e-9, rng);
      rejected = s.rejections;
      for (const auto& e : s.samples) {
        gb.push_back(e.g_bar);
        gu.push_back(e.g_under);
      }
    } else {
      for (const auto& path : paths) {
        const auto s = fluctuation::summarize(ordinate(path), n_steps, 1e-9);
        gb.push_back(s.g_bar);
        gu.push_back(s.g_under);
      }
    }
    stats::Histogram emp = stats::Histogram::uniform(-0.5, n_steps + 0.5, tables.gbar.size());
    for (double g : gb) emp.add(g);
    const double tv = stats::tv_distance(emp.masses, tables.gbar);
    out["gbar_tv"] = tv;
    out["rejections"] = rejected;
    ok = ok && tv < 0.02;
    json rows = json::array();
    for (double lambda : p.lambdas) {
      const auto est = fluctuation::laplace_estimate(gb, lambda);
      const double exact = oracle::exact_laplace(tables, lambda, oracle::Functional::GBar);
      const bool within = std::abs(est.estimate - exact) <= 3.0 * est.stderr_ + 1e-15;
      ok = ok && within;
      rows.push_back({{"lambda", lambda},
                      {"estimate", est.estimate},
                      {"stderr", est.stderr_},
                      {"exact", exact},
                      {"within_3_stderr", within}});
    }
    out["laplace_gbar"] = rows;
    if (spec.kill_prob == 0.0) {
      std::vector<fluctuation::LadderSample> ladders;
      ladders.reserve(paths.size());
      for (const auto& path : paths) ladders.push_back(fluctuation::ladder_samples(path, 1e-9));
      const double pi = std::numbers::pi;
      auto bins = fluctuation::OccupationHistogram::uniform(-pi / 4.0, 3.0 * pi / 4.0, 2, -0.5,
                                                            n_steps + 0.5,
                                                            tables.gbar.size());
      const auto occ = fluctuation::occupation_measure(ladders, bins);
      std::vector<double> exact;
      for (const auto& row : tables.occupation) exact.insert(exact.end(), row.begin(), row.end());
      if (occ.total() > 0.0) {
        const double occ_tv = stats::tv_distance(occ.masses, exact);
        out["occupation_tv"] = occ_tv;
        ok = ok && occ_tv < 0.02;
      }
    }
  }
  out["pass"] = ok;
  run.write_json("oracle.json", out);
  std::cout << (ok ? "oracle equivalence pass" : "oracle equivalence fail") << "\n";
  if (!ok) throw VerificationFailure("oracle equivalence failed");
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Simulation and verification toolkit for Markov additive processes"};
  app.require_subcommand(1);
  Params p;
  std::map<CLI::App*, Settings> settings;
  std::map<CLI::App*, std::function<int(Run&, Params&)>> handlers;

  auto make = [&](const std::string& name, const std::string& help, bool simulation,
                  std::function<int(Run&, Params&)> fn) {
    Settings s;
    CLI::App* sub = add_common(app, name, help, s, p, simulation);
    handlers[sub] = std::move(fn);
    return std::pair{sub, &(settings[sub] = std::move(s))};
  };

  {
    auto [sub, s] = make("simulate", "simulate MAP or ssMp paths", true, cmd_simulate);
    s->add(sub, "--kind", "kind", p.kind, "map | ssmp");
    s->add(sub, "--theta0", "theta0", p.theta0, "start angle (default: arc midpoint)");
    s->add(sub, "--x0", "x0", p.x0, "ssMp start point")->expected(2);
  }
  {
    auto [sub, s] = make("transform", "Lamperti-Kiu transform of a path file", false, cmd_transform);
    s->add(sub, "--input", "input", p.input, "input CSV")->check(CLI::ExistingFile);
    s->add(sub, "--direction", "direction", p.direction, "map-to-ssmp | ssmp-to-map");
    s->add(sub, "--alpha", "alpha", p.alpha, "self-similarity index");
    s->add(sub, "--output-points", "output_points", p.output_points,
           "output grid size (default: input length)");
  }
  {
    auto [sub, s] = make("fluctuation", "extrema, last-passage times and Laplace estimates", true,
                         cmd_fluctuation);
    s->add(sub, "--q", "q", p.q, "rate of the independent exponential time (0: skip)");
    s->add(sub, "--lambda-grid", "lambda_grid", p.lambda_grid, "decreasing positive lambdas");
    s->add(sub, "--horizons", "horizons", p.horizons, "increasing horizons (default T/8..T)");
    s->add(sub, "--theta0", "theta0", p.theta0, "start angle (default: arc midpoint)");
    s->flag(sub, "--negate", "negate", p.negate, "use -xi (descending quantities)");
  }
  {
    auto [sub, s] = make("classify", "long-time trichotomy verdict", true, cmd_classify);
    s->add(sub, "--lambda-grid", "lambda_grid", p.lambda_grid, "decreasing positive lambdas");
    s->add(sub, "--horizons", "horizons", p.horizons, "increasing horizons (default T/8..T)");
    s->flag(sub, "--negate", "negate", p.negate, "classify (-xi, Theta)");
    s->add(sub, "--expect", "expect", p.expect, "exit 3 unless this verdict is returned");
  }
  {
    auto [sub, s] = make("verify-duality", "g_under_t versus t - g_bar_t under pi-hat", true,
                         cmd_verify_duality);
    s->add(sub, "--t", "t", p.t, "time horizon");
    s->add(sub, "--n", "n", p.n, "paths per side");
    s->add(sub, "--chains", "chains", p.chains, "chains for pi-hat");
    s->add(sub, "--run-time", "run_time", p.run_time, "chain length after burn-in");
    s->add(sub, "--stationary-burn-in", "stationary_burn_in", p.stationary_burn_in,
           "chain burn-in");
    s->add(sub, "--stationary-dt", "stationary_dt", p.stationary_dt, "chain step");
    s->add(sub, "--bins", "bins", p.bins, "angular bins of pi-hat");
    s->add(sub, "--coarsen", "coarsen", p.coarsen, "bin merge factor for TV diagnostics");
    s->add(sub, "--invariance-samples", "invariance_samples", p.invariance_samples,
           "samples for the invariance diagnostic (0: skip)");
    s->add(sub, "--evolve-time", "evolve_time", p.evolve_time, "evolution time of the diagnostic");
  }
  {
    auto [sub, s] = make("verify-lyapunov", "printed LV versus the finite-difference generator",
                         true, cmd_verify_lyapunov);
    s->add(sub, "--points", "points", p.points, "arc points");
    s->add(sub, "--fd-step", "fd_step", p.h, "finite-difference step");
  }
  {
    auto [sub, s] = make("oracle", "exact tables of the discrete oracle and equivalence suite",
                         false, cmd_oracle);
    s->add(sub, "--flip-prob", "flip_prob", p.flip_prob, "modulator flip probability");
    s->add(sub, "--up-prob", "up_prob", p.up_prob, "up-step probability per state")->expected(2);
    s->add(sub, "--horizon", "horizon", p.horizon, "horizon (<= 22)");
    s->add(sub, "--kill-prob", "kill_prob", p.kill_prob, "per-step killing probability");
    s->add(sub, "--samples", "samples", p.samples, "sampled paths for the equivalence suite");
    s->add(sub, "--seed", "master_seed", p.seed, "master seed");
    s->add(sub, "--lambdas", "lambdas", p.lambdas, "lambdas for the Laplace comparison");
  }

  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  Run r{args, sub->get_name(), fs::path(p.out), worker_count(), {}, 0, {}};
  try {
    const Settings& s = settings.at(sub);
    load_config_file(p, s);
    fs::create_directories(r.out);
    const int code = handlers.at(sub)(r, p);
    r.write_manifest(s);
    return code;
  } catch (const VerificationFailure& e) {
    r.write_manifest(settings.at(sub));
    std::cerr << "verification failed: " << e.what() << "\n";
    return kVerificationFailed;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kNumerical;
  }
}

int run(int argc, char** argv) {
  return run(std::vector<std::string>(argv, argv + argc));
}

}  // namespace mapflux::cli
