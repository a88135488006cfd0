"""Baseband FMCW echo model and measurement synthesis.

The phase helpers work in cycles and broadcast over bistatic range ``r``,
bistatic speed ``vb`` and the sample indices. Sample indices entering a phase
are always 1-based (``m_s`` in 1..Ms, ``m_r`` in 1..Mr), matching the
sampling instants ``(m_r - 1) T + m_s Ts``; arrays store them 0-based.
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import IndexOutOfRange, InvalidSNR
from .geometry import BistaticPair, RadarConfig, Target, bistatic_range, bistatic_speed

MODELS = ("complete", "simplified")


def phasor(cycles):
    """exp(j 2 pi cycles), with the integer part of ``cycles`` removed first."""
    return np.exp(2j * np.pi * np.fmod(cycles, 1.0))


def inner_phase(r, vb, ms, cfg: RadarConfig):
    c = cfg.c
    return (
        -cfg.f0 * r / c
        + cfg.B / (2 * cfg.Ms * cfg.Ts) * (r / c) ** 2
        - (cfg.B / cfg.Ms * r + cfg.f0 * cfg.Ts * vb) * ms / c
    )


def outer_phase(vb, mr, cfg: RadarConfig):
    return -cfg.f0 * cfg.T * vb * mr / cfg.c


def coupling_phase(r, vb, ms, mr, cfg: RadarConfig):
    c, B, Ms, Ts = cfg.c, cfg.B, cfg.Ms, cfg.Ts
    u = mr * cfg.T + ms * Ts
    return (
        -B / (Ms * c) * vb * u * ms
        + B / (Ms * Ts * c**2) * r * vb * u
        + B / (2 * Ms * Ts * c**2) * (vb * u) ** 2
    )


def _check_index(m, upper, name):
    m = np.asarray(m)
    if np.any(m < 1) or np.any(m > upper):
        raise IndexOutOfRange(f"{name} must lie in 1..{upper}")
    return m


def _pair_params(x, v, pair):
    return bistatic_range(x, pair), bistatic_speed(x, v, pair)


def inner_signal(x, v, pair: BistaticPair, ms, cfg: RadarConfig):
    """Fast-time phasor of a target at ``x`` moving at ``v`` (1-based ``ms``)."""
    ms = _check_index(ms, cfg.Ms, "m_s")
    r, vb = _pair_params(x, v, pair)
    return phasor(inner_phase(r, vb, ms, cfg))


def outer_signal(x, v, pair: BistaticPair, mr, cfg: RadarConfig):
    """Slow-time (ramp-to-ramp Doppler) phasor (1-based ``mr``)."""
    mr = _check_index(mr, cfg.Mr, "m_r")
    vb = bistatic_speed(x, v, pair)
    return phasor(outer_phase(vb, mr, cfg))


def coupling_signal(x, v, pair: BistaticPair, ms, mr, cfg: RadarConfig):
    """Cross fast/slow-time phasor; identically 1 for a static target."""
    ms = _check_index(ms, cfg.Ms, "m_s")
    mr = _check_index(mr, cfg.Mr, "m_r")
    r, vb = _pair_params(x, v, pair)
    return phasor(coupling_phase(r, vb, ms, mr, cfg))


def atom_sample(x, v, pair: BistaticPair, ms, mr, cfg: RadarConfig, model: str = "complete"):
    ms = _check_index(ms, cfg.Ms, "m_s")
    mr = _check_index(mr, cfg.Mr, "m_r")
    r, vb = _pair_params(x, v, pair)
    return atom_from_params(r, vb, ms, mr, cfg, model)


def atom_from_params(r, vb, ms, mr, cfg: RadarConfig, model: str = "complete"):
    if model == "complete":
        return phasor(inner_phase(r, vb, ms, cfg)) * phasor(outer_phase(vb, mr, cfg)) * phasor(
            coupling_phase(r, vb, ms, mr, cfg)
        )
    if model == "simplified":
        return phasor(inner_phase(r, 0.0, ms, cfg)) * phasor(outer_phase(vb, mr, cfg))
    raise ValueError(f"unknown model {model!r}; expected one of {MODELS}")


def atom_matrix(r, vb, cfg: RadarConfig, model: str = "complete"):
    """Atoms for broadcast arrays ``r``, ``vb`` as ``(..., Ms, Mr)`` matrices."""
    r = np.asarray(r, dtype=float)[..., None, None]
    vb = np.asarray(vb, dtype=float)[..., None, None]
    ms = np.arange(1, cfg.Ms + 1)[:, None]
    mr = np.arange(1, cfg.Mr + 1)[None, :]
    return atom_from_params(r, vb, ms, mr, cfg, model)


@dataclass
class NoiseSpec:
    sigma2: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.sigma2 < 0:
            raise ValueError("noise power must be >= 0")


@dataclass
class Scene:
    targets: Sequence[Target]
    pairs: Sequence[BistaticPair]


@dataclass
class MeasurementSet:
    """Q measurement matrices, fast time along rows, slow time along columns."""

    cubes: np.ndarray = field(repr=False)
    cfg: RadarConfig
    model: str = "complete"
    seed: Optional[int] = None

    def __post_init__(self):
        self.cubes = np.asarray(self.cubes, dtype=complex)
        if self.cubes.ndim != 3 or self.cubes.shape[1:] != (self.cfg.Ms, self.cfg.Mr):
            raise ValueError(f"cubes must have shape (Q, {self.cfg.Ms}, {self.cfg.Mr}), got {self.cubes.shape}")

    @property
    def Q(self) -> int:
        return self.cubes.shape[0]

    def vectors(self) -> np.ndarray:
        """Cubes flattened with m_s fastest, shape (Q, Ms*Mr)."""
        return self.cubes.transpose(0, 2, 1).reshape(self.Q, -1)


def noise_cubes(noise: NoiseSpec, Q: int, cfg: RadarConfig) -> np.ndarray:
    """Circular complex Gaussian noise, one independent substream per cube."""
    out = np.zeros((Q, cfg.Ms, cfg.Mr), dtype=complex)
    if noise.sigma2 == 0:
        return out
    scale = np.sqrt(noise.sigma2 / 2)
    root = np.random.SeedSequence(noise.seed)
    for q, child in enumerate(root.spawn(Q)):
        rng = np.random.default_rng(child)
        draw = rng.standard_normal((2, cfg.Ms, cfg.Mr))
        out[q] = scale * (draw[0] + 1j * draw[1])
    return out


def signal_cubes(targets: Sequence[Target], pairs: Sequence[BistaticPair], cfg: RadarConfig, model="complete"):
    Q = len(pairs)
    out = np.zeros((Q, cfg.Ms, cfg.Mr), dtype=complex)
    for target in targets:
        if len(target.alphas) != Q:
            raise ValueError(f"target has {len(target.alphas)} coefficients for {Q} pairs")
        for q, pair in enumerate(pairs):
            r, vb = _pair_params(target.position, target.velocity, pair)
            out[q] += target.alphas[q] * atom_matrix(r, vb, cfg, model)
    return out


def synthesize(scene: Scene, cfg: RadarConfig, noise: Optional[NoiseSpec] = None, model: str = "complete"):
    """Noisy baseband measurements for every bistatic pair of ``scene``."""
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}")
    noise = noise or NoiseSpec()
    cubes = signal_cubes(scene.targets, scene.pairs, cfg, model)
    cubes += noise_cubes(noise, len(scene.pairs), cfg)
    return MeasurementSet(cubes, cfg, model, noise.seed)


def sigma2_for_snr(snr: float) -> float:
    """Per-sample noise power giving ``snr`` (linear) for unit-power coefficients."""
    if not snr > 0:
        raise InvalidSNR(f"SNR must be > 0, got {snr}")
    return 1.0 / snr


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def random_alphas(rng: np.random.Generator, K: int, Q: int) -> np.ndarray:
    """i.i.d. CN(0, 1) scattering coefficients, shape (K, Q)."""
    return (rng.standard_normal((K, Q)) + 1j * rng.standard_normal((K, Q))) / np.sqrt(2)
