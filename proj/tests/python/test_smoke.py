import json
import math

import numpy as np
import pytest

import mapflux


def test_bessel_path_shape_and_sphere():
    p = mapflux.simulate_map("free-bessel", dt=1e-3, t_max=0.5, seed=3)
    assert p["t"].shape == (501,)
    assert p["xi"][0] == 0.0
    norms = np.linalg.norm(p["theta"], axis=1)
    assert np.allclose(norms, 1.0, atol=1e-12)
    assert (p["theta"] > 0).all()


def test_same_seed_same_path():
    a = mapflux.simulate_map("dunkl-b2", dt=1e-3, t_max=0.2, seed=9, path_index=4, k=0.7)
    b = mapflux.simulate_map("dunkl-b2", dt=1e-3, t_max=0.2, seed=9, path_index=4, k=0.7)
    assert np.array_equal(a["xi"], b["xi"])
    c = mapflux.simulate_map("dunkl-b2", dt=1e-3, t_max=0.2, seed=9, path_index=5, k=0.7)
    assert not np.array_equal(a["xi"], c["xi"])


def test_coefficients_and_dunkl_pairing():
    drift, diff = mapflux.modulator_coeffs("free-bessel", 0.6, 0.8)
    assert drift[0] == pytest.approx(1 / 0.6 - 2.5 * 0.6)
    assert diff[0][1] == pytest.approx(-0.48)
    # <theta, A> = k times the number of positive roots
    c = math.cos(0.3)
    s = math.sin(0.3)
    A = mapflux.dunkl_A("b2", 0.5, c, s)
    assert c * A[0] + s * A[1] == pytest.approx(2.0)


def test_printed_lyapunov_value():
    r = 1 / math.sqrt(2)
    assert mapflux.lyapunov_lv("free-bessel", r, r, printed=True) == pytest.approx(3 * math.sqrt(2))


def test_lamperti_constant_path():
    t = mapflux.make_time_grid(0.01, 1.0)
    xi = np.full_like(t, 0.5)
    theta = np.tile([0.6, 0.8], (t.size, 1))
    x = mapflux.map_to_ssmp(t, xi, theta, alpha=2.0)
    assert np.allclose(np.linalg.norm(x["x"], axis=1), math.exp(0.5))
    back = mapflux.ssmp_to_map(x["t"], x["x"], alpha=2.0)
    assert np.allclose(back["xi"], 0.5)


def test_last_times_worked_example():
    t = np.arange(5.0)
    v = np.array([0.0, 1.0, 0.0, 2.0, 1.0])
    g_bar, g_under = mapflux.last_times(t, v, at=4.0)
    assert (g_bar, g_under) == (3.0, 2.0)


def test_oracle_two_step_table():
    tab = mapflux.enumerate_oracle(horizon=2)
    assert list(tab["gbar"]) == [0.25, 0.25, 0.5]
    assert tab["total_probability"] == pytest.approx(1.0)
    # at lambda = 0 the transform is the total mass
    assert mapflux.exact_laplace(0.0, "gbar", horizon=6) == pytest.approx(1.0)


def test_stats_helpers():
    d, crit = mapflux.ks_two_sample(np.array([0.0, 1.0]), np.array([0.5, 1.5]))
    assert d == pytest.approx(0.5)
    assert crit == pytest.approx(1.358)
    assert mapflux.tv_distance(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == pytest.approx(1.0)


def test_validation_errors_surface_as_exceptions():
    with pytest.raises(mapflux.ValidationError):
        mapflux.simulate_map("free-bessel", dt=-1.0, t_max=1.0)
    with pytest.raises(mapflux.ValidationError):
        mapflux.simulate_map("no-such-model", dt=1e-3, t_max=1.0)


def test_cli_roundtrip(tmp_path):
    out = tmp_path / "o"
    code = mapflux.run_cli(["oracle", "--horizon", "6", "--samples", "4000", "--out", str(out)])
    assert code == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["subcommand"] == "oracle"
    assert mapflux.run_cli(["frobnicate"]) == 1
