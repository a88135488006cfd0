"""Complete and factorized dictionaries over a location/velocity grid.

Atoms are generated on demand from two small per-pair tables computed once
per grid: the bistatic range of every location cell and its gradient (whose
inner product with a grid velocity gives the bistatic speed). Nothing of size ``N_x * N_v`` is ever stored unless
``CompleteDictionary.materialize`` is called.
"""

from collections import OrderedDict

import numpy as np

from .errors import IndexOutOfRange
from .geometry import GridPair, RadarConfig, bistatic_range, range_gradient
from .signals import MODELS, inner_phase, outer_phase, phasor


class _GridTables:
    def __init__(self, grids: GridPair, pairs, cfg: RadarConfig):
        self.grids = grids
        self.pairs = list(pairs)
        self.cfg = cfg
        pts = grids.loc_points
        self.ranges = np.stack([bistatic_range(pts, p) for p in self.pairs])  # (Q, N_x)
        self.gradients = np.stack([range_gradient(pts, p) for p in self.pairs])  # (Q, N_x, 2)

    @property
    def Q(self) -> int:
        return len(self.pairs)

    def speeds(self, n, nd):
        """Bistatic speeds for broadcast index arrays, shape (Q, *broadcast)."""
        n, nd = np.broadcast_arrays(np.asarray(n), np.asarray(nd))
        return np.einsum("q...k,...k->q...", self.gradients[:, n], self.grids.vel_points[nd])

    def speed_rows(self, n):
        """Bistatic speeds of every grid velocity at locations ``n``: (Q, *n.shape, N_v)."""
        return self.gradients[:, n] @ self.grids.vel_points.T

    def check(self, n=None, nd=None):
        if n is not None and (np.any(np.asarray(n) < 0) or np.any(np.asarray(n) >= self.grids.n_x)):
            raise IndexOutOfRange(f"location index outside [0, {self.grids.n_x})")
        if nd is not None and (np.any(np.asarray(nd) < 0) or np.any(np.asarray(nd) >= self.grids.n_v)):
            raise IndexOutOfRange(f"velocity index outside [0, {self.grids.n_v})")


def fast_atoms(r, vb, cfg: RadarConfig, model: str = "complete"):
    """Atoms ``(..., Ms, Mr)`` for broadcast ``r``, ``vb``.

    Same values as :func:`fmcwsparse.signals.atom_matrix`, but the coupling
    phase is split into a fast-time part, a slow-time part and an
    ``m_s * m_r`` cross term, so only ``2 Ms + Mr`` exponentials are needed
    per atom instead of ``Ms * Mr``.
    """
    r = np.asarray(r, dtype=float)[..., None]
    vb = np.asarray(vb, dtype=float)[..., None]
    ms = np.arange(1, cfg.Ms + 1)
    mr = np.arange(1, cfg.Mr + 1)
    if model == "simplified":
        fast = phasor(inner_phase(r, 0.0, ms, cfg))
        slow = phasor(outer_phase(vb, mr, cfg))
        return fast[..., :, None] * slow[..., None, :]
    if model != "complete":
        raise ValueError(f"unknown model {model!r}; expected one of {MODELS}")

    c, B, Ms, Ts, T = cfg.c, cfg.B, cfg.Ms, cfg.Ts, cfg.T
    fast_cycles = (
        inner_phase(r, vb, ms, cfg)
        - B * vb * Ts / (Ms * c) * ms**2
        + B * r * vb / (Ms * c**2) * ms
        + B * vb**2 * Ts / (2 * Ms * c**2) * ms**2
    )
    slow_cycles = outer_phase(vb, mr, cfg) + B * r * vb / c**2 * mr + B * vb**2 * T / (2 * c**2) * mr**2
    cross = -B * vb * T / (Ms * c) + B * vb**2 * T / (Ms * c**2)  # (..., 1)
    z = phasor(cross * ms)  # (..., Ms)
    kernel = np.cumprod(np.broadcast_to(z[..., :, None], z.shape + (cfg.Mr,)), axis=-1)
    return phasor(fast_cycles)[..., :, None] * phasor(slow_cycles)[..., None, :] * kernel


class CompleteDictionary:
    """Per-pair dictionaries of ``N_x * N_v`` atoms of length ``Ms * Mr``.

    Columns follow the joint index ``n * N_v + nd``; within a column the
    samples are ordered with ``m_s`` fastest.
    """

    def __init__(self, grids: GridPair, pairs, cfg: RadarConfig, model: str = "complete", chunk_atoms: int = 4096):
        if model not in MODELS:
            raise ValueError(f"unknown model {model!r}")
        self.tables = _GridTables(grids, pairs, cfg)
        self.grids = grids
        self.cfg = cfg
        self.model = model
        self.chunk_atoms = chunk_atoms

    @property
    def Q(self) -> int:
        return self.tables.Q

    def atoms(self, n, nd) -> np.ndarray:
        """Atom matrices for broadcast index arrays, shape (*broadcast, Q, Ms, Mr)."""
        self.tables.check(n, nd)
        n, nd = np.broadcast_arrays(np.asarray(n), np.asarray(nd))
        r = self.tables.ranges[:, n]
        vb = self.tables.speeds(n, nd)
        return np.moveaxis(fast_atoms(r, vb, self.cfg, self.model), 0, -3)

    def complete_atom(self, q: int, n: int, nd: int) -> np.ndarray:
        if not 0 <= q < self.Q:
            raise IndexOutOfRange(f"pair index {q} outside [0, {self.Q})")
        return self.atoms(n, nd)[q].T.reshape(-1)

    def location_chunks(self):
        """Yield ``(start, stop, atoms)`` with atoms of shape (Q, stop-start, N_v, Ms, Mr)."""
        step = max(1, self.chunk_atoms // self.grids.n_v)
        for start in range(0, self.grids.n_x, step):
            stop = min(start + step, self.grids.n_x)
            n = np.arange(start, stop)
            r = self.tables.ranges[:, n, None]
            vb = self.tables.speed_rows(n)
            yield start, stop, fast_atoms(r, vb, self.cfg, self.model)

    def materialize(self) -> np.ndarray:
        """Full dictionary matrices, shape (Q, Ms*Mr, N_x*N_v). Small grids only."""
        Q, cfg = self.Q, self.cfg
        out = np.empty((Q, cfg.Ms * cfg.Mr, self.grids.n_joint), dtype=complex)
        nv = self.grids.n_v
        for start, stop, block in self.location_chunks():
            cols = block.swapaxes(-1, -2).reshape(Q, (stop - start) * nv, -1)
            out[:, :, start * nv : stop * nv] = cols.transpose(0, 2, 1)
        return out


class FactorizedDictionary:
    """Inner (fast-time) and outer (slow-time) dictionaries of the simplified model.

    ``inner`` is the zero-velocity fast-time dictionary, shape (Q, Ms, N_x).
    Outer matrices, shape (Q, Mr, N_v) per location, are built on demand and
    kept in a bounded LRU cache. Velocity-conditioned inner dictionaries are
    never cached.
    """

    def __init__(self, grids: GridPair, pairs, cfg: RadarConfig, cache: bool = True, max_cached_outer: int = 128):
        self.tables = _GridTables(grids, pairs, cfg)
        self.grids = grids
        self.cfg = cfg
        self.cache = cache
        self.max_cached_outer = max_cached_outer
        self._outer_cache = OrderedDict()
        self._inner = self._build_inner() if cache else None
        self._ms = np.arange(1, cfg.Ms + 1)
        self._mr = np.arange(1, cfg.Mr + 1)

    @property
    def Q(self) -> int:
        return self.tables.Q

    def _build_inner(self):
        ms = np.arange(1, self.cfg.Ms + 1)[:, None]
        return phasor(inner_phase(self.tables.ranges[:, None, :], 0.0, ms, self.cfg))

    @property
    def inner(self) -> np.ndarray:
        return self._inner if self._inner is not None else self._build_inner()

    def inner_matrix(self, q: int) -> np.ndarray:
        return self.inner[q]

    def _outer_rows(self, n):
        vb = self.tables.speed_rows(np.asarray(n))  # (Q, *n.shape, N_v)
        mr = np.arange(1, self.cfg.Mr + 1)[:, None]
        return phasor(outer_phase(vb[..., None, :], mr, self.cfg))  # (Q, *n.shape, Mr, N_v)

    def _outer_one(self, n: int):
        if not self.cache:
            return self._outer_rows(n)
        hit = self._outer_cache.get(n)
        if hit is None:
            hit = self._outer_rows(n)
            self._outer_cache[n] = hit
            if len(self._outer_cache) > self.max_cached_outer:
                self._outer_cache.popitem(last=False)
        else:
            self._outer_cache.move_to_end(n)
        return hit

    def outer(self, n) -> np.ndarray:
        """Outer matrices for location index ``n``: (Q, Mr, N_v), or (B, Q, Mr, N_v) for an array."""
        self.tables.check(n=n)
        if np.ndim(n) == 0:
            return self._outer_one(int(n))
        n = np.asarray(n)
        if not self.cache:
            return np.moveaxis(self._outer_rows(n), 0, -3)
        return np.stack([self._outer_one(int(k)) for k in n])

    def outer_matrix(self, q: int, n: int) -> np.ndarray:
        return self.outer(n)[q]

    def inner_conditioned(self, nd) -> np.ndarray:
        """Fast-time dictionaries conditioned on grid velocity ``nd``.

        Returns (Q, Ms, N_x) for a scalar ``nd`` or (B, Q, Ms, N_x) for an array.
        """
        self.tables.check(nd=nd)
        nd = np.asarray(nd)
        vel = self.grids.vel_points[nd]  # (*nd.shape, 2)
        vb = np.einsum("qnk,...k->...qn", self.tables.gradients, vel)
        ms = self._ms[:, None]
        return phasor(inner_phase(self.tables.ranges[:, None, :], vb[..., :, None, :], ms, self.cfg))

    def inner_cond_column(self, q: int, n: int, nd: int) -> np.ndarray:
        self.tables.check(n, nd)
        r = self.tables.ranges[q, n]
        vb = self.tables.speeds(n, nd)[q]
        return phasor(inner_phase(r, vb, self._ms, self.cfg))
