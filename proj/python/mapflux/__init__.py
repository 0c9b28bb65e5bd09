"""Markov additive process simulation and verification toolkit."""

from ._mapflux import (
    MapfluxError,
    NumericalError,
    OutOfRangeError,
    ValidationError,
    WallError,
    dunkl_A,
    enumerate_oracle,
    exact_laplace,
    excursions,
    ks_two_sample,
    laplace_estimate,
    last_times,
    lyapunov_lv,
    make_time_grid,
    map_to_ssmp,
    mc_mean_ci,
    modulator_coeffs,
    reflected_process,
    run_cli,
    running_extrema,
    simulate_map,
    simulate_ssmp,
    ssmp_to_map,
    time_change_tau,
    tv_distance,
)

__all__ = [
    "MapfluxError",
    "NumericalError",
    "OutOfRangeError",
    "ValidationError",
    "WallError",
    "dunkl_A",
    "enumerate_oracle",
    "exact_laplace",
    "excursions",
    "ks_two_sample",
    "laplace_estimate",
    "last_times",
    "lyapunov_lv",
    "make_time_grid",
    "map_to_ssmp",
    "mc_mean_ci",
    "modulator_coeffs",
    "reflected_process",
    "run_cli",
    "running_extrema",
    "simulate_map",
    "simulate_ssmp",
    "ssmp_to_map",
    "time_change_tau",
    "tv_distance",
]
