import json
import math
import pathlib

import numpy as np
import pytest

import geotomo

ROOT = pathlib.Path(__file__).resolve().parents[2]


def test_fit_slope_recovers_power_law():
    pairs = [(t, t ** -1.5) for t in geotomo.geometric_ladder(8.0, math.sqrt(2.0), 6)]
    slope, band = geotomo.fit_slope(pairs)
    assert slope == pytest.approx(-1.5, abs=1e-12)
    assert band < 1e-9


def test_fit_slope_needs_four_positive_values():
    with pytest.raises(geotomo._geotomo.GeotomoError):
        geotomo.fit_slope([(1.0, 1.0), (2.0, 0.5), (4.0, -1.0), (8.0, 0.1)])


def test_flat_disc_geometry():
    gamma = np.array(geotomo.christoffel([0.2, -0.1]))
    assert np.all(gamma == 0.0)
    assert geotomo.geodesic_exit_time([-1.0, 0.0], [1.0, 0.0]) == pytest.approx(2.0, abs=1e-9)


def test_santalo_on_disc():
    assert geotomo.santalo_relative_error() < 1e-3


def test_g0_norm_decays():
    assert geotomo.g0_operator_norm(16.0) < geotomo.g0_operator_norm(8.0)


def test_dn_map_is_symmetric_in_lumped_inner_product():
    dn = geotomo.dn_map(n=6, bump_amplitude=0.3)
    L, m = dn["matrix"], dn["mass"]
    weighted = m[:, None] * L
    assert np.abs(weighted - weighted.T).max() < 1e-10 * np.abs(weighted).max()
    # constants lie in the kernel
    assert np.abs(L @ np.ones(L.shape[1])).max() < 1e-9
    masks = sorted(dn["mask_minus"] + dn["mask_plus"])
    assert masks == list(range(L.shape[0]))


def test_unknown_chart_is_config_error():
    with pytest.raises(ValueError):
        geotomo.christoffel([0.0, 0.0], kind="torus")


def test_run_suite_returns_report(tmp_path):
    rep = geotomo.run_suite(str(ROOT / "configs" / "default.toml"), "theorem2", str(tmp_path))
    assert rep["suite"] == "theorem2"
    assert all(c["pass"] for c in rep["checks"])
    on_disk = json.loads((tmp_path / "theorem2.json").read_text())
    assert on_disk["checks"] == rep["checks"]


def test_run_suite_unknown_name(tmp_path):
    with pytest.raises(ValueError):
        geotomo.run_suite(str(ROOT / "configs" / "default.toml"), "nonsense", str(tmp_path))
