"""Radar configuration, bistatic geometry and the location/velocity grids.

Positions and velocities are 2-D. Every function here accepts either a single
point of shape ``(2,)`` or a stack of points ``(..., 2)`` and broadcasts.
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import AmbiguousGrid, DegenerateGeometry, IndexOutOfRange

SPEED_OF_LIGHT = 299_792_458.0

# relative slack when comparing against closed-form bounds met with equality
_BOUND_RTOL = 1e-12


@dataclass(frozen=True)
class RadarConfig:
    """FMCW waveform and sampling parameters.

    The ramp duration ``T`` is derived from ``Ms * Ts`` and never stored.
    """

    f0: float
    B: float
    Ts: float
    Ms: int
    Mr: int
    c: float = SPEED_OF_LIGHT

    def __post_init__(self):
        if not (self.f0 > 0 and self.B > 0 and self.Ts > 0 and self.c > 0):
            raise ValueError("f0, B, Ts and c must be positive")
        if int(self.Ms) != self.Ms or int(self.Mr) != self.Mr or self.Ms < 1 or self.Mr < 1:
            raise ValueError("Ms and Mr must be positive integers")
        object.__setattr__(self, "Ms", int(self.Ms))
        object.__setattr__(self, "Mr", int(self.Mr))

    @property
    def T(self) -> float:
        return self.Ms * self.Ts

    @property
    def narrowband(self) -> bool:
        return self.B / self.f0 <= 0.1

    @property
    def max_bistatic_speed(self) -> float:
        """Largest unambiguous bistatic speed, c / (2 f0 T)."""
        return self.c / (2 * self.f0 * self.T)

    @property
    def gamma(self) -> float:
        """Location shift per unit velocity incurred by ignoring intra-ramp Doppler."""
        return self.f0 * self.Ms * self.Ts / self.B

    @classmethod
    def reference(cls) -> "RadarConfig":
        """K-band reference system: 24 GHz, 250 MHz sweep, 16x16 samples at 50 kHz."""
        return cls(f0=24e9, B=250e6, Ts=1 / 50e3, Ms=16, Mr=16)


def _as_point(p) -> tuple:
    a = np.asarray(p, dtype=float)
    if a.shape != (2,) or not np.all(np.isfinite(a)):
        raise ValueError(f"expected a finite 2-D point, got {p!r}")
    return (float(a[0]), float(a[1]))


@dataclass(frozen=True)
class BistaticPair:
    tx: tuple
    rx: tuple

    def __post_init__(self):
        object.__setattr__(self, "tx", _as_point(self.tx))
        object.__setattr__(self, "rx", _as_point(self.rx))

    @property
    def baseline(self) -> float:
        return float(np.hypot(self.tx[0] - self.rx[0], self.tx[1] - self.rx[1]))


@dataclass(frozen=True)
class Target:
    position: tuple
    velocity: tuple
    alphas: tuple

    def __post_init__(self):
        object.__setattr__(self, "position", _as_point(self.position))
        object.__setattr__(self, "velocity", _as_point(self.velocity))
        alphas = tuple(complex(a) for a in np.atleast_1d(self.alphas))
        if not alphas:
            raise ValueError("a target needs one scattering coefficient per pair")
        object.__setattr__(self, "alphas", alphas)


REFERENCE_TX = ((0.0, -2.5), (7.5, -10.0))
REFERENCE_RX = ((0.0, 2.5), (12.5, -10.0))
REFERENCE_CORNER = (5.0, -5.0)


def reference_pairs() -> list:
    """The 2 TX x 2 RX layout, TX-major order (Q = 4)."""
    return [BistaticPair(tx, rx) for tx in REFERENCE_TX for rx in REFERENCE_RX]


def _distances(x, pair):
    x = np.asarray(x, dtype=float)
    dt = np.linalg.norm(np.asarray(pair.tx) - x, axis=-1)
    dr = np.linalg.norm(np.asarray(pair.rx) - x, axis=-1)
    return dt, dr


def bistatic_range(x, pair: BistaticPair):
    """TX-to-target plus target-to-RX distance, in metres."""
    dt, dr = _distances(x, pair)
    return dt + dr


def range_gradient(x, pair: BistaticPair):
    """Gradient of the bistatic range at ``x``: sum of unit vectors from each antenna toward ``x``."""
    x = np.asarray(x, dtype=float)
    from_tx = x - np.asarray(pair.tx)
    from_rx = x - np.asarray(pair.rx)
    dt = np.linalg.norm(from_tx, axis=-1, keepdims=True)
    dr = np.linalg.norm(from_rx, axis=-1, keepdims=True)
    if np.any(dt == 0) or np.any(dr == 0):
        raise DegenerateGeometry("point coincides with an antenna position")
    return from_tx / dt + from_rx / dr


def bistatic_speed(x, v, pair: BistaticPair):
    """Rate of change of the bistatic range for a target at ``x`` moving at ``v``, in m/s.

    Positive when the target recedes from the antennas.
    """
    u = range_gradient(x, pair)
    return np.sum(u * np.asarray(v, dtype=float), axis=-1)


def delay_doppler(x, v, pair: BistaticPair, t, cfg: RadarConfig):
    """Time-varying propagation delay (r + v_b t) / c, in seconds."""
    return (bistatic_range(x, pair) + bistatic_speed(x, v, pair) * np.asarray(t)) / cfg.c


def _cell_centers(lo: float, length: float, xi: int) -> np.ndarray:
    return lo + (np.arange(xi) + 0.5) * length / xi


@dataclass(frozen=True, eq=False)
class GridPair:
    """Square location grid and square velocity grid with cell-centred points.

    Flat indices are 0-based and row-major over (axis-1, axis-2):
    ``n = i * xi + j``. Joint location-velocity indices are
    ``n * N_v + nd`` (location-major).
    """

    loc_corner: tuple
    loc_length: float
    vel_center: tuple
    vel_length: float
    xi_x: int
    xi_v: int
    loc_points: np.ndarray = field(repr=False)
    vel_points: np.ndarray = field(repr=False)

    @property
    def n_x(self) -> int:
        return self.xi_x ** 2

    @property
    def n_v(self) -> int:
        return self.xi_v ** 2

    @property
    def n_joint(self) -> int:
        return self.n_x * self.n_v

    @property
    def loc_pitch(self) -> float:
        return self.loc_length / self.xi_x

    @property
    def vel_pitch(self) -> float:
        return self.vel_length / self.xi_v

    def flat_index(self, i, j, xi=None):
        xi = self.xi_x if xi is None else xi
        return np.asarray(i) * xi + np.asarray(j)

    def axis_indices(self, n, xi=None):
        xi = self.xi_x if xi is None else xi
        return np.divmod(n, xi)

    def joint_index(self, n, nd):
        return np.asarray(n) * self.n_v + np.asarray(nd)

    def split_joint(self, joint):
        return np.divmod(joint, self.n_v)

    def location(self, n) -> np.ndarray:
        if np.any(np.asarray(n) < 0) or np.any(np.asarray(n) >= self.n_x):
            raise IndexOutOfRange(f"location index {n} outside [0, {self.n_x})")
        return self.loc_points[n]

    def velocity(self, nd) -> np.ndarray:
        if np.any(np.asarray(nd) < 0) or np.any(np.asarray(nd) >= self.n_v):
            raise IndexOutOfRange(f"velocity index {nd} outside [0, {self.n_v})")
        return self.vel_points[nd]

    @property
    def zero_velocity_index(self) -> Optional[int]:
        hit = np.flatnonzero(np.all(np.abs(self.vel_points) < 1e-12 * max(1.0, self.vel_length), axis=1))
        return int(hit[0]) if hit.size else None

    def nearest_location_index(self, x) -> int:
        """Cell containing ``x`` (clipped to the grid)."""
        rel = (np.asarray(x, dtype=float) - np.asarray(self.loc_corner)) / self.loc_pitch
        i, j = np.clip(np.floor(rel).astype(int), 0, self.xi_x - 1)
        return int(self.flat_index(i, j))

    def contains_location(self, x) -> bool:
        rel = np.asarray(x, dtype=float) - np.asarray(self.loc_corner)
        return bool(np.all(rel >= 0) and np.all(rel <= self.loc_length))

    def max_speed(self) -> float:
        """Largest ``||v||_2`` over the continuous velocity square."""
        half = self.vel_length / 2
        return float(np.hypot(abs(self.vel_center[0]) + half, abs(self.vel_center[1]) + half))


def default_lengths(cfg: RadarConfig) -> tuple:
    """Nyquist-matched square sides ``(L_x, L_v)``."""
    loc_length = cfg.Ms * cfg.c / (2 * np.sqrt(2) * cfg.B)
    vel_length = cfg.c / (2 * np.sqrt(2) * cfg.f0 * cfg.T)
    return loc_length, vel_length


def build_grids(
    cfg: RadarConfig,
    corner: Sequence[float],
    xi_x: int,
    xi_v: int,
    *,
    loc_length: Optional[float] = None,
    vel_length: Optional[float] = None,
    vel_center: Sequence[float] = (0.0, 0.0),
) -> GridPair:
    if xi_x < 1 or xi_v < 1:
        raise ValueError("grid resolutions must be >= 1")
    default_lx, default_lv = default_lengths(cfg)
    loc_length = default_lx if loc_length is None else float(loc_length)
    vel_length = default_lv if vel_length is None else float(vel_length)
    corner = _as_point(corner)
    vel_center = _as_point(vel_center)

    ax = _cell_centers(corner[0], loc_length, xi_x)
    ay = _cell_centers(corner[1], loc_length, xi_x)
    loc_points = np.stack(np.meshgrid(ax, ay, indexing="ij"), axis=-1).reshape(-1, 2)
    vx = _cell_centers(vel_center[0] - vel_length / 2, vel_length, xi_v)
    vy = _cell_centers(vel_center[1] - vel_length / 2, vel_length, xi_v)
    vel_points = np.stack(np.meshgrid(vx, vy, indexing="ij"), axis=-1).reshape(-1, 2)
    loc_points.setflags(write=False)
    vel_points.setflags(write=False)

    grids = GridPair(corner, loc_length, vel_center, vel_length, int(xi_x), int(xi_v), loc_points, vel_points)
    if 2 * grids.max_speed() > cfg.max_bistatic_speed * (1 + _BOUND_RTOL):
        raise AmbiguousGrid(
            f"2 max||v|| = {2 * grids.max_speed():.6g} m/s exceeds c/(2 f0 T) = {cfg.max_bistatic_speed:.6g} m/s"
        )
    return grids


@dataclass
class ConditionResult:
    passed: bool
    margin: float
    detail: str = ""


@dataclass
class GeometryReport:
    """Outcome of the geometric preconditions; ``margin > 0`` means slack."""

    lam: float
    lambda_valid: bool
    velocity_bound: ConditionResult
    antenna_distance: ConditionResult
    range_bound: ConditionResult

    @property
    def ok(self) -> bool:
        return (
            self.lambda_valid
            and self.velocity_bound.passed
            and self.antenna_distance.passed
            and self.range_bound.passed
        )

    def rows(self):
        yield "lambda>3", self.lambda_valid, self.lam - 3, ""
        for name in ("velocity_bound", "antenna_distance", "range_bound"):
            res = getattr(self, name)
            yield name, res.passed, res.margin, res.detail


def check_geometry_conditions(grids: GridPair, pairs, cfg: RadarConfig, lam: float) -> GeometryReport:
    """Check the unambiguous-velocity, far-antenna and short-range conditions.

    Never raises; each condition reports its margin.
    """
    limit = cfg.max_bistatic_speed
    two_v = 2 * grids.max_speed()
    velocity = ConditionResult(
        bool(two_v <= limit * (1 + _BOUND_RTOL)),
        limit - two_v,
        f"2 max||v|| = {two_v:.6g} m/s vs c/(2 f0 T) = {limit:.6g} m/s",
    )

    required = lam * cfg.c / (4 * cfg.B)
    pts = grids.loc_points
    nearest = np.inf
    for pair in pairs:
        dt, dr = _distances(pts, pair)
        nearest = min(nearest, float(np.min(np.minimum(dt, dr))))
    distance = ConditionResult(
        bool(nearest > required),
        nearest - required,
        f"min antenna-grid distance {nearest:.6g} m vs lambda c/(4B) = {required:.6g} m",
    )

    max_range = max(float(np.max(bistatic_range(pts, pair))) for pair in pairs)
    range_limit = cfg.c * cfg.Ts
    rng = ConditionResult(
        bool(max_range < range_limit),
        range_limit - max_range,
        f"max bistatic range {max_range:.6g} m vs c Ts = {range_limit:.6g} m",
    )
    return GeometryReport(float(lam), bool(lam > 3), velocity, distance, rng)
