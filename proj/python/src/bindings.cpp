#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>

#include "mapflux/cli.hpp"
#include "mapflux/config.hpp"
#include "mapflux/errors.hpp"
#include "mapflux/fluctuation.hpp"
#include "mapflux/lamperti.hpp"
#include "mapflux/models.hpp"
#include "mapflux/oracle.hpp"
#include "mapflux/stats.hpp"

namespace py = pybind11;
using namespace mapflux;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_array(const std::vector<double>& v) { return Array(static_cast<py::ssize_t>(v.size()), v.data()); }

Array to_matrix(const std::vector<double>& v, std::size_t cols) {
  const auto rows = static_cast<py::ssize_t>(cols == 0 ? 0 : v.size() / cols);
  return Array({rows, static_cast<py::ssize_t>(cols)}, v.data());
}

std::vector<double> to_vector(const Array& a) { return {a.data(), a.data() + a.size()}; }

TimeGrid grid_from(const Array& t) { return TimeGrid(to_vector(t)); }

py::dict map_dict(const MapPath& p) {
  py::dict d;
  auto times = p.grid.times();
  d["t"] = to_array({times.begin(), times.begin() + static_cast<long>(p.size())});
  d["xi"] = to_array(p.xi);
  d["theta"] = to_matrix(p.theta, p.dim);
  d["kill_index"] = p.kill_index ? py::cast(*p.kill_index) : py::none();
  d["wall_rejections"] = p.wall_rejections;
  return d;
}

py::dict ssmp_dict(const SsmpPath& p) {
  py::dict d;
  auto times = p.grid.times();
  d["t"] = to_array({times.begin(), times.begin() + static_cast<long>(p.size())});
  d["x"] = to_matrix(p.x, p.dim);
  d["kill_index"] = p.kill_index ? py::cast(*p.kill_index) : py::none();
  d["wall_rejections"] = p.wall_rejections;
  return d;
}

MapPath map_from(const Array& t, const Array& xi, const Array& theta) {
  if (theta.ndim() != 2 || theta.shape(0) != xi.size() || t.size() != xi.size()) {
    throw ValidationError("expected t and xi of length n and theta of shape (n, d)");
  }
  MapPath p;
  p.grid = grid_from(t);
  p.xi = to_vector(xi);
  p.dim = static_cast<std::size_t>(theta.shape(1));
  p.theta = to_vector(theta);
  return p;
}

SsmpPath ssmp_from(const Array& t, const Array& x) {
  if (x.ndim() != 2 || x.shape(0) != t.size()) {
    throw ValidationError("expected t of length n and x of shape (n, d)");
  }
  SsmpPath p;
  p.grid = grid_from(t);
  p.dim = static_cast<std::size_t>(x.shape(1));
  p.x = to_vector(x);
  return p;
}

ScalarPath scalar_from(const Array& t, const Array& v) {
  if (t.size() != v.size()) throw ValidationError("t and values must have equal length");
  return ScalarPath{grid_from(t), to_vector(v)};
}

SimulationConfig make_config(const std::string& model, double k, double dt, double t_max,
                             std::uint64_t seed, std::size_t record_every) {
  SimulationConfig c;
  c.model = parse_model(model, k);
  c.dt = dt;
  c.t_max = t_max;
  c.master_seed = seed;
  c.record_every = record_every;
  return c;
}

OracleSpec oracle_spec(double flip, std::array<double, 2> up, int horizon, double kill) {
  OracleSpec s;
  s.flip_prob = flip;
  s.up_prob = up;
  s.horizon = horizon;
  s.kill_prob = kill;
  return s;
}

}  // namespace

PYBIND11_MODULE(_mapflux, m) {
  m.doc() = "Markov additive process simulation and verification kernels";

  static py::exception<Error> base(m, "MapfluxError", PyExc_RuntimeError);
  static py::exception<ValidationError> validation(m, "ValidationError", base.ptr());
  static py::exception<OutOfRangeError> out_of_range(m, "OutOfRangeError", base.ptr());
  static py::exception<NumericalError> numerical(m, "NumericalError", base.ptr());
  static py::exception<WallError> wall(m, "WallError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ValidationError& e) {
      py::set_error(validation, e.what());
    } catch (const OutOfRangeError& e) {
      py::set_error(out_of_range, e.what());
    } catch (const NumericalError& e) {
      py::set_error(numerical, e.what());
    } catch (const WallError& e) {
      py::set_error(wall, e.what());
    } catch (const Error& e) {
      py::set_error(base, e.what());
    }
  });

  m.def("make_time_grid", [](double dt, double t_max) {
    auto g = make_time_grid(dt, t_max);
    return to_array({g.times().begin(), g.times().end()});
  });

  m.def(
      "modulator_coeffs",
      [](const std::string& model, double x, double y, double k) {
        const auto c = models::modulator_coeffs(parse_model(model, k), UnitVector(x, y));
        return py::make_tuple(c.drift, c.diffusion);
      },
      py::arg("model"), py::arg("x"), py::arg("y"), py::arg("k") = 0.5);

  m.def(
      "dunkl_A",
      [](const std::string& root_system, double k, double x, double y) {
        return models::dunkl_A(UnitVector(x, y), parse_root_system(root_system), k);
      },
      py::arg("root_system"), py::arg("k"), py::arg("x"), py::arg("y"));

  m.def(
      "lyapunov_lv",
      [](const std::string& model, double x, double y, double k, bool printed) {
        const ModelSpec spec = parse_model(model, k);
        const UnitVector th(x, y);
        return printed ? models::lyapunov_LV_analytic(spec, th) : models::lyapunov_LV_exact(spec, th);
      },
      py::arg("model"), py::arg("x"), py::arg("y"), py::arg("k") = 0.5, py::arg("printed") = false);

  m.def(
      "simulate_map",
      [](const std::string& model, double dt, double t_max, std::uint64_t seed,
         std::size_t path_index, std::optional<double> theta0, double k, std::size_t record_every) {
        const SimulationConfig c = make_config(model, k, dt, t_max, seed, record_every);
        const UnitVector start =
            theta0 ? UnitVector::from_angle(*theta0) : models::arc_midpoint(c.model);
        MapPath p;
        {
          py::gil_scoped_release release;
          p = models::simulate_map_path(c, start, path_index);
        }
        return map_dict(p);
      },
      py::arg("model"), py::arg("dt"), py::arg("t_max"), py::arg("seed") = 0,
      py::arg("path_index") = 0, py::arg("theta0") = py::none(), py::arg("k") = 0.5,
      py::arg("record_every") = 1);

  m.def(
      "simulate_ssmp",
      [](const std::string& model, double dt, double t_max, std::array<double, 2> x0,
         std::uint64_t seed, std::size_t path_index, double k) {
        const SimulationConfig c = make_config(model, k, dt, t_max, seed, 1);
        SsmpPath p;
        {
          py::gil_scoped_release release;
          p = models::simulate_ssmp_path(c, x0, path_index);
        }
        return ssmp_dict(p);
      },
      py::arg("model"), py::arg("dt"), py::arg("t_max"), py::arg("x0"), py::arg("seed") = 0,
      py::arg("path_index") = 0, py::arg("k") = 0.5);

  m.def(
      "map_to_ssmp",
      [](const Array& t, const Array& xi, const Array& theta, double alpha) {
        return ssmp_dict(lamperti::map_to_ssmp(map_from(t, xi, theta), alpha));
      },
      py::arg("t"), py::arg("xi"), py::arg("theta"), py::arg("alpha") = 2.0);

  m.def(
      "ssmp_to_map",
      [](const Array& t, const Array& x, double alpha) {
        return map_dict(lamperti::ssmp_to_map(ssmp_from(t, x), alpha));
      },
      py::arg("t"), py::arg("x"), py::arg("alpha") = 2.0);

  m.def(
      "time_change_tau",
      [](const Array& t, const Array& xi, const Array& theta, double alpha, double s) {
        return lamperti::time_change_tau(map_from(t, xi, theta), alpha, s);
      },
      py::arg("t"), py::arg("xi"), py::arg("theta"), py::arg("alpha"), py::arg("s"));

  m.def("running_extrema", [](const Array& t, const Array& v) {
    const auto e = fluctuation::running_extrema(scalar_from(t, v));
    return py::make_tuple(to_array(e.sup.values), to_array(e.inf.values));
  });

  m.def("reflected_process", [](const Array& t, const Array& v) {
    return to_array(fluctuation::reflected_process(scalar_from(t, v)).values);
  });

  m.def(
      "last_times",
      [](const Array& t, const Array& v, double at, double eps) {
        const auto s = fluctuation::summarize(scalar_from(t, v), at, eps);
        return py::make_tuple(s.g_bar, s.g_under);
      },
      py::arg("t"), py::arg("values"), py::arg("at"), py::arg("eps") = 1e-9);

  m.def(
      "excursions",
      [](const Array& t, const Array& u, double eps) {
        py::list out;
        for (const auto& e : fluctuation::excursions(scalar_from(t, u), eps)) {
          py::dict d;
          d["start_time"] = e.start_time;
          d["end_time"] = e.end_time ? py::cast(*e.end_time) : py::none();
          d["max_height"] = e.max_height;
          d["lifetime"] = e.lifetime ? py::cast(*e.lifetime) : py::none();
          d["censored"] = e.censored;
          out.append(d);
        }
        return out;
      },
      py::arg("t"), py::arg("reflected"), py::arg("eps"));

  m.def(
      "laplace_estimate",
      [](const Array& samples, double lambda) {
        const auto e = fluctuation::laplace_estimate(to_vector(samples), lambda);
        return py::make_tuple(e.estimate, e.stderr_);
      },
      py::arg("samples"), py::arg("lam"));

  m.def(
      "enumerate_oracle",
      [](double flip, std::array<double, 2> up, int horizon, double kill) {
        const auto t = oracle::enumerate_discrete_map(oracle_spec(flip, up, horizon, kill));
        py::dict d;
        d["gbar"] = to_array(t.gbar);
        d["gunder"] = to_array(t.gunder);
        d["sup"] = to_array(t.sup);
        d["neg_inf"] = to_array(t.inf);
        d["weak_ladder_count"] = to_array(t.weak_ladder_count);
        d["strict_ladder_count"] = to_array(t.strict_ladder_count);
        d["excursion_count"] = to_array(t.excursion_count);
        d["lifetime_mass"] = to_array(t.lifetime_mass);
        d["total_probability"] = t.total_probability;
        return d;
      },
      py::arg("flip_prob") = 0.5, py::arg("up_prob") = std::array<double, 2>{0.5, 0.5},
      py::arg("horizon") = 12, py::arg("kill_prob") = 0.0);

  m.def(
      "exact_laplace",
      [](double lambda, const std::string& which, double flip, std::array<double, 2> up,
         int horizon, double kill) {
        if (which != "gbar" && which != "gunder") throw ValidationError("which must be gbar or gunder");
        return oracle::exact_laplace(oracle_spec(flip, up, horizon, kill), lambda,
                                     which == "gbar" ? oracle::Functional::GBar
                                                     : oracle::Functional::GUnder);
      },
      py::arg("lam"), py::arg("which") = "gbar", py::arg("flip_prob") = 0.5,
      py::arg("up_prob") = std::array<double, 2>{0.5, 0.5}, py::arg("horizon") = 12,
      py::arg("kill_prob") = 0.0);

  m.def("ks_two_sample", [](const Array& a, const Array& b) {
    const auto r = stats::ks_two_sample(to_vector(a), to_vector(b));
    return py::make_tuple(r.statistic, r.critical_value);
  });

  m.def("mc_mean_ci", [](const Array& s, double level) {
    const auto r = stats::mc_mean_ci(to_vector(s), level);
    return py::make_tuple(r.mean, r.half_width);
  });

  m.def("tv_distance", [](const Array& a, const Array& b) {
    return stats::tv_distance(to_vector(a), to_vector(b));
  });

  m.def("run_cli", [](std::vector<std::string> args) {
    args.insert(args.begin(), "mapflux");
    py::gil_scoped_release release;
    return cli::run(args);
  });
}
