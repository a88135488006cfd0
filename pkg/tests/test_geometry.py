import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fmcwsparse.errors import AmbiguousGrid, DegenerateGeometry, IndexOutOfRange
from fmcwsparse.geometry import (
    REFERENCE_CORNER,
    BistaticPair,
    RadarConfig,
    Target,
    bistatic_range,
    bistatic_speed,
    build_grids,
    check_geometry_conditions,
    default_lengths,
    delay_doppler,
)

coord = st.floats(-50, 50, allow_nan=False)
point = st.tuples(coord, coord)
C = 299792458.0


def test_radar_config_derived_quantities(cfg):
    assert cfg.T == pytest.approx(320e-6)
    assert cfg.narrowband
    assert cfg.gamma == pytest.approx(0.03072, rel=1e-12)
    assert cfg.c == C


@pytest.mark.parametrize("kw", [dict(f0=0), dict(B=-1), dict(Ts=0), dict(Ms=0), dict(Mr=0)])
def test_radar_config_rejects_bad_values(kw):
    base = dict(f0=24e9, B=250e6, Ts=2e-5, Ms=16, Mr=16)
    with pytest.raises(ValueError):
        RadarConfig(**{**base, **kw})


def test_wideband_flag():
    assert not RadarConfig(f0=1e9, B=500e6, Ts=1e-6, Ms=8, Mr=8).narrowband


def test_target_needs_alphas():
    with pytest.raises(ValueError):
        Target((0, 0), (0, 0), [])


def test_bistatic_range_examples():
    mono = BistaticPair((0, 0), (0, 0))
    assert bistatic_range((3, 4), mono) == 10.0
    p1 = BistaticPair((0, -2.5), (0, 2.5))
    assert bistatic_range((5, -5), p1) == pytest.approx(math.sqrt(31.25) + math.sqrt(81.25), abs=1e-12)
    assert bistatic_range((5, -5), p1) == pytest.approx(14.6041, abs=1e-4)
    p = BistaticPair((1, 2), (7, -3))
    assert bistatic_range((1, 2), p) == pytest.approx(math.hypot(6, 5))


@given(point, point, point)
def test_bistatic_range_triangle_bound(tx, rx, x):
    p = BistaticPair(tx, rx)
    assert bistatic_range(x, p) >= p.baseline - 1e-9


def test_bistatic_speed_examples():
    mono = BistaticPair((0, 0), (0, 0))
    assert bistatic_speed((7, -3), (0, 0), mono) == 0
    # range rate: a target at (10, 0) moving toward the radar closes the range
    assert bistatic_speed((10, 0), (-1, 0), mono) == pytest.approx(-2.0)
    assert bistatic_speed((10, 0), (0, 3), mono) == pytest.approx(0.0, abs=1e-15)


def test_bistatic_speed_at_antenna_raises():
    with pytest.raises(DegenerateGeometry):
        bistatic_speed((0, 0), (1, 1), BistaticPair((0, 0), (5, 5)))


@given(point, point, point, point)
def test_bistatic_speed_bounded(tx, rx, x, v):
    p = BistaticPair(tx, rx)
    if min(np.hypot(*np.subtract(x, tx)), np.hypot(*np.subtract(x, rx))) < 1e-6:
        return
    assert abs(bistatic_speed(x, v, p)) <= 2 * np.hypot(*v) + 1e-9


def test_bistatic_speed_is_range_rate():
    p = BistaticPair((0, -2.5), (12.5, -10))
    x, v, h = np.array([8.0, -1.0]), np.array([3.0, -4.0]), 1e-6
    fd = (bistatic_range(x + h * v, p) - bistatic_range(x - h * v, p)) / (2 * h)
    assert bistatic_speed(x, v, p) == pytest.approx(fd, rel=1e-7)


def test_delay_doppler(cfg):
    mono = BistaticPair((0, 0), (0, 0))
    assert delay_doppler((15, 0), (0, 0), mono, 0.123, cfg) == pytest.approx(30 / C, rel=1e-15)
    assert 30 / C == pytest.approx(1.0007e-7, rel=1e-4)
    t = np.linspace(0, 1e-3, 5)
    assert np.ptp(delay_doppler((15, 2), (0, 0), mono, t, cfg)) == 0
    p = BistaticPair((0, -2.5), (0, 2.5))
    assert delay_doppler((5, 1), (3, 3), p, 0.0, cfg) == bistatic_range((5, 1), p) / cfg.c


def test_default_lengths(cfg):
    lx, lv = default_lengths(cfg)
    assert lx == pytest.approx(16 * C / (2 * math.sqrt(2) * 250e6), rel=1e-12)
    assert lv == pytest.approx(C / (2 * math.sqrt(2) * 24e9 * 320e-6), rel=1e-12)
    # quoted values are rounded with c ~ 3e8
    assert lx == pytest.approx(6.788, abs=0.01)
    assert lv == pytest.approx(13.81, abs=0.02)


def test_build_grids_cell_centres(cfg):
    g1 = build_grids(cfg, REFERENCE_CORNER, 1, 2)
    assert np.allclose(g1.loc_points, [[5 + g1.loc_length / 2, -5 + g1.loc_length / 2]])
    q = g1.vel_length / 4
    assert np.allclose(sorted(map(tuple, g1.vel_points)), [(-q, -q), (-q, q), (q, -q), (q, q)])
    g = build_grids(cfg, REFERENCE_CORNER, 5, 3)
    i, j = 3, 1
    assert np.allclose(g.location(g.flat_index(i, j)), [5 + (i + 0.5) * g.loc_pitch, -5 + (j + 0.5) * g.loc_pitch])
    assert g.n_x == 25 and g.n_v == 9 and g.n_joint == 225
    assert g.zero_velocity_index == 4


@given(st.integers(1, 40), st.data())
def test_flat_index_round_trip(xi, data):
    n = data.draw(st.integers(0, xi * xi - 1))
    g = build_grids(RadarConfig.reference(), REFERENCE_CORNER, xi, 2)
    assert g.flat_index(*g.axis_indices(n)) == n


def test_joint_index_round_trip(grids4):
    joint = np.arange(grids4.n_joint)
    n, nd = grids4.split_joint(joint)
    assert np.array_equal(grids4.joint_index(n, nd), joint)


def test_index_out_of_range(grids4):
    with pytest.raises(IndexOutOfRange):
        grids4.location(grids4.n_x)
    with pytest.raises(IndexOutOfRange):
        grids4.velocity(-1)


def test_default_grid_meets_velocity_bound_with_equality(cfg):
    g = build_grids(cfg, REFERENCE_CORNER, 16, 16)
    assert 2 * g.max_speed() == pytest.approx(cfg.max_bistatic_speed, rel=1e-12)
    assert 2 * g.max_speed() <= cfg.max_bistatic_speed * (1 + 1e-12)


def test_oversized_velocity_grid_is_ambiguous(cfg):
    with pytest.raises(AmbiguousGrid):
        build_grids(cfg, REFERENCE_CORNER, 4, 4, vel_length=default_lengths(cfg)[1] * 1.01)
    with pytest.raises(AmbiguousGrid):
        build_grids(cfg, REFERENCE_CORNER, 4, 4, vel_center=(1.0, 0.0))


def test_nearest_and_contains(grids8):
    for n in [0, 9, 63]:
        assert grids8.nearest_location_index(grids8.location(n)) == n
    assert grids8.contains_location(grids8.loc_corner)
    assert not grids8.contains_location((0, 0))


def test_check_geometry_reference_layout(cfg, pairs):
    g = build_grids(cfg, REFERENCE_CORNER, 16, 16)
    rep = check_geometry_conditions(g, pairs, cfg, 10.0)
    assert rep.ok
    assert rep.lambda_valid
    # brute-force oracle: closest antenna to any grid point
    ants = np.array([p.tx for p in pairs] + [p.rx for p in pairs])
    dmin = np.min(np.linalg.norm(g.loc_points[:, None] - ants[None], axis=-1))
    required = 10 * C / (4 * 250e6)
    assert required == pytest.approx(3.0, abs=5e-3)
    assert rep.antenna_distance.margin == pytest.approx(dmin - required, rel=1e-12)
    rmax = max(np.max(bistatic_range(g.loc_points, p)) for p in pairs)
    assert rep.range_bound.margin == pytest.approx(C * 2e-5 - rmax, rel=1e-12)


def test_check_geometry_antenna_on_grid_fails(cfg, grids4):
    on_grid = BistaticPair(tuple(grids4.loc_points[5]), (100.0, 100.0))
    for lam in (3.5, 10.0):
        rep = check_geometry_conditions(grids4, [on_grid], cfg, lam)
        assert not rep.antenna_distance.passed
        assert not rep.ok


def test_check_geometry_never_raises(cfg, grids4, pairs):
    rep = check_geometry_conditions(grids4, pairs, cfg, 2.0)
    assert not rep.lambda_valid and not rep.ok
    names = [r[0] for r in rep.rows()]
    assert names == ["lambda>3", "velocity_bound", "antenna_distance", "range_bound"]
