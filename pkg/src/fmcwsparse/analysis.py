"""Estimation-error metrics, the velocity-induced location shift check, and scaling fits."""

from dataclasses import asdict, dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import CountMismatch, HypothesisViolated, InsufficientData
from .geometry import BistaticPair, GridPair, RadarConfig
from .signals import inner_signal


@dataclass
class TrialMetrics:
    trial: int
    algorithm: str
    xi: int
    snr_db: Optional[float]
    seed: int
    lee: float
    vee: float
    misses: int
    velocity_misses: int
    wall_time_select: Optional[float] = None

    def row(self) -> dict:
        return asdict(self)


def match_targets(est_pos, true_pos) -> np.ndarray:
    """Permutation ``p`` minimising sum_k ||est[p[k]] - true[k]||."""
    est_pos = np.asarray(est_pos, dtype=float).reshape(-1, 2)
    true_pos = np.asarray(true_pos, dtype=float).reshape(-1, 2)
    if len(est_pos) != len(true_pos):
        raise CountMismatch(f"{len(est_pos)} estimates for {len(true_pos)} targets")
    cost = np.linalg.norm(true_pos[:, None, :] - est_pos[None, :, :], axis=-1)
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty(len(true_pos), dtype=int)
    perm[rows] = cols
    return perm


def lee_vee(est_pos, est_vel, true_pos, true_vel, grids: GridPair):
    """Mean location and velocity errors normalised by the grid side lengths."""
    est_vel = np.asarray(est_vel, dtype=float).reshape(-1, 2)
    true_vel = np.asarray(true_vel, dtype=float).reshape(-1, 2)
    if len(est_vel) != len(true_vel):
        raise CountMismatch(f"{len(est_vel)} velocity estimates for {len(true_vel)} targets")
    perm = match_targets(est_pos, true_pos)
    est_pos = np.asarray(est_pos, dtype=float).reshape(-1, 2)[perm]
    est_vel = est_vel[perm]
    true_pos = np.asarray(true_pos, dtype=float).reshape(-1, 2)
    lee = np.mean(np.linalg.norm(est_pos - true_pos, axis=1)) / grids.loc_length
    vee = np.mean(np.linalg.norm(est_vel - true_vel, axis=1)) / grids.vel_length
    return float(lee), float(vee)


@dataclass
class TheoremCheck:
    lam: float
    gamma: float
    shift: np.ndarray
    residual: float
    phase: complex
    bound_ok: bool
    applicable: Optional[bool] = None

    def row(self) -> dict:
        return {
            "lambda": self.lam,
            "gamma": self.gamma,
            "shift_x": float(self.shift[0]),
            "shift_y": float(self.shift[1]),
            "residual": self.residual,
            "bound_ok": self.bound_ok,
        }


def aligned_residual(target, reference):
    """Unit-modulus ``A`` aligning ``reference`` to ``target`` in l2, and max|target - A reference|."""
    inner = np.vdot(reference, target)
    A = inner / abs(inner) if inner != 0 else 1.0 + 0j
    return complex(A), float(np.max(np.abs(target - A * reference)))


def shift_bound(cfg: RadarConfig) -> float:
    """Infinity-norm bound c / (4 sqrt(2) B) on the location shift."""
    return cfg.c / (4 * np.sqrt(2) * cfg.B)


def theorem1_check(x, v, pair: BistaticPair, cfg: RadarConfig, lam: float, grids: Optional[GridPair] = None):
    """Compare the moving-target fast-time atom with the static atom at ``x + gamma v``.

    Raises :class:`HypothesisViolated` when the velocity or antenna-distance
    preconditions fail for this configuration. When ``grids`` is supplied,
    ``applicable`` records whether the shifted point stays inside the
    location grid.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if not lam > 3:
        raise HypothesisViolated("lambda", f"lambda = {lam} must exceed 3")
    if 2 * np.linalg.norm(v) > cfg.max_bistatic_speed * (1 + 1e-12):
        raise HypothesisViolated("velocity_bound", f"2||v|| = {2 * np.linalg.norm(v):.6g} > c/(2 f0 T)")
    nearest = min(np.linalg.norm(np.asarray(pair.tx) - x), np.linalg.norm(np.asarray(pair.rx) - x))
    required = lam * cfg.c / (4 * cfg.B)
    if not nearest > required:
        raise HypothesisViolated("antenna_distance", f"antenna at {nearest:.6g} m, need > {required:.6g} m")

    gamma = cfg.gamma
    shift = gamma * v
    ms = np.arange(1, cfg.Ms + 1)
    moving = inner_signal(x, v, pair, ms, cfg)
    static = inner_signal(x + shift, np.zeros(2), pair, ms, cfg)
    A, residual = aligned_residual(moving, static)
    bound_ok = bool(np.max(np.abs(shift)) <= shift_bound(cfg) * (1 + 1e-12))
    applicable = None if grids is None else grids.contains_location(x + shift)
    return TheoremCheck(float(lam), gamma, shift, residual, A, bound_ok, applicable)


def random_theorem_case(rng: np.random.Generator, cfg: RadarConfig, lam: float, grids: GridPair, spread=(1.05, 2.0)):
    """Draw ``(x, v, pair)`` satisfying the shift-bound preconditions at ``lam``.

    ``x`` and ``v`` are uniform over the location and velocity squares; each
    antenna sits in a uniform random direction at a distance of ``spread``
    times the minimum ``lam c / (4B)``, so distances scale with ``lam``.
    """
    x = np.asarray(grids.loc_corner) + rng.uniform(0, grids.loc_length, 2)
    v = np.asarray(grids.vel_center) + rng.uniform(-grids.vel_length / 2, grids.vel_length / 2, 2)
    base = lam * cfg.c / (4 * cfg.B)
    ant = []
    for _ in range(2):
        angle = rng.uniform(0, 2 * np.pi)
        dist = base * rng.uniform(*spread)
        ant.append(x + dist * np.array([np.cos(angle), np.sin(angle)]))
    return x, v, BistaticPair(ant[0], ant[1])


class PowerLaw(NamedTuple):
    exponent: float
    coefficient: float


def power_law_fit(points: Sequence) -> PowerLaw:
    """Least-squares line through ``log(seconds)`` against ``log(xi)``."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
        raise InsufficientData("need at least 3 (xi, seconds) points")
    xi, t = pts[:, 0], pts[:, 1]
    if np.any(np.diff(xi) <= 0):
        raise InsufficientData("xi must be strictly increasing")
    if np.any(t <= 0) or np.any(xi <= 0):
        raise InsufficientData("xi and times must be positive")
    slope, intercept = np.polyfit(np.log(xi), np.log(t), 1)
    return PowerLaw(float(slope), float(np.exp(intercept)))


def fit_scaling(points: Sequence) -> float:
    return power_law_fit(points).exponent
