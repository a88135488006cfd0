"""Greedy joint-sparse recovery: BMP, factorized BMP and iterative factorized BMP.

All selection functions take residuals shaped ``(Q, Ms, Mr)`` for one problem
or ``(B, Q, Ms, Mr)`` for ``B`` independent problems processed in lock-step;
they return python ints in the first case and index arrays in the second.
Ties are broken toward the smallest index everywhere.
"""

from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional

import numpy as np

from .dictionaries import CompleteDictionary, FactorizedDictionary
from .signals import MeasurementSet

ALGORITHMS = ("bmp", "fbmp", "ifbmp")


class Selection(NamedTuple):
    n: object
    nd: object
    objective: object

    @property
    def degenerate(self):
        return np.asarray(self.objective) == 0


def _as_batch(residuals):
    if isinstance(residuals, MeasurementSet):
        residuals = residuals.cubes
    R = np.asarray(residuals, dtype=complex)
    if R.ndim == 3:
        return R[None], True
    if R.ndim == 4:
        return R, False
    raise ValueError(f"residuals must be (Q, Ms, Mr) or (B, Q, Ms, Mr), got shape {R.shape}")


def _unbatch(single, *arrays):
    if single:
        return tuple(a[0].item() for a in arrays)
    return arrays


def bmp_select(residuals, dictionary: CompleteDictionary) -> Selection:
    """Joint index maximising sum_q |<d_q, r_q>|^2 over the whole dictionary."""
    R, single = _as_batch(residuals)
    B, Q = R.shape[:2]
    rhs = np.conj(R.reshape(B, Q, -1)).transpose(1, 2, 0)  # (Q, Ms*Mr, B)
    best = np.full(B, -1.0)
    best_joint = np.zeros(B, dtype=int)
    cols = np.arange(B)
    nv = dictionary.grids.n_v
    for start, stop, block in dictionary.location_chunks():
        atoms = block.reshape(Q, -1, rhs.shape[1])
        corr = atoms @ rhs  # conjugate of <d, r>; only the modulus is used
        obj = np.einsum("qab,qab->ab", corr.real, corr.real) + np.einsum("qab,qab->ab", corr.imag, corr.imag)
        loc = obj.argmax(axis=0)
        val = obj[loc, cols]
        better = val > best
        best[better] = val[better]
        best_joint[better] = start * nv + loc[better]
    n, nd = np.divmod(best_joint, nv)
    return Selection(*_unbatch(single, n, nd, best))


def _inner_correlations(inner, R):
    """<psi_n, r_{:, m_r}> for every location: (B, Q, N_x, Mr).

    ``inner`` is (Q, Ms, N_x) or batch-specific (B, Q, Ms, N_x).
    """
    return np.conj(inner).swapaxes(-1, -2) @ R


def _location_step(corr):
    obj = np.sum(corr.real**2 + corr.imag**2, axis=(1, 3))  # (B, N_x)
    n = obj.argmax(axis=1)
    return n, obj


def _velocity_step(fdict, corr, n):
    B = corr.shape[0]
    p = corr[np.arange(B), :, n, :]  # (B, Q, Mr)
    outer = fdict.outer(n)  # (B, Q, Mr, N_v)
    proj = np.einsum("bqrv,bqr->bqv", np.conj(outer), p)
    obj = np.sum(proj.real**2 + proj.imag**2, axis=1)  # (B, N_v)
    nd = obj.argmax(axis=1)
    return nd, obj[np.arange(B), nd]


def location_objective(residuals, fdict: FactorizedDictionary, nd=None) -> np.ndarray:
    """Location decision variable sum_q sum_mr |<psi_n, r_mr>|^2 for every cell.

    With ``nd`` given, the fast-time atoms are conditioned on that grid
    velocity (the refinement step); otherwise the zero-velocity inner
    dictionary is used. Shape (N_x,) or (B, N_x).
    """
    R, single = _as_batch(residuals)
    inner = fdict.inner if nd is None else fdict.inner_conditioned(np.broadcast_to(nd, R.shape[:1]))
    obj = _location_step(_inner_correlations(inner, R))[1]
    return obj[0] if single else obj


def fbmp_select(residuals, fdict: FactorizedDictionary) -> Selection:
    """Two-step factorized selection: location from the inner dictionary, then velocity."""
    R, single = _as_batch(residuals)
    corr = _inner_correlations(fdict.inner, R)
    n, _ = _location_step(corr)
    nd, obj = _velocity_step(fdict, corr, n)
    return Selection(*_unbatch(single, n, nd, obj))


def ifbmp_select(residuals, fdict: FactorizedDictionary, n_it: int) -> Selection:
    """Factorized selection refined ``n_it`` times with velocity-conditioned inner atoms.

    Stops early once every problem in the batch reaches a fixed point, which
    never changes the returned indices.
    """
    if n_it < 0:
        raise ValueError("n_it must be >= 0")
    R, single = _as_batch(residuals)
    corr = _inner_correlations(fdict.inner, R)
    n, _ = _location_step(corr)
    nd, obj = _velocity_step(fdict, corr, n)
    for _ in range(n_it):
        corr = _inner_correlations(fdict.inner_conditioned(nd), R)
        n_new, _ = _location_step(corr)
        nd_new, obj = _velocity_step(fdict, corr, n_new)
        done = np.array_equal(n_new, n) and np.array_equal(nd_new, nd)
        n, nd = n_new, nd_new
        if done:
            break
    return Selection(*_unbatch(single, n, nd, obj))


def project_out(R, atoms):
    """One-atom least-squares step per pair; atoms have unit-modulus entries.

    Returns the new residuals and the coefficient increments <d, r> / (Ms Mr).
    """
    norm = atoms.shape[-1] * atoms.shape[-2]
    coeffs = np.einsum("...ij,...ij->...", np.conj(atoms), R) / norm
    return R - coeffs[..., None, None] * atoms, coeffs


def update(residuals, dictionary: CompleteDictionary, n, nd):
    """Remove the complete-model atom ``(n, nd)`` from every pair's residual."""
    R, single = _as_batch(residuals)
    atoms = dictionary.atoms(np.broadcast_to(n, R.shape[:1]), np.broadcast_to(nd, R.shape[:1]))
    R_new, coeffs = project_out(R, atoms)
    if single:
        return R_new[0], coeffs[0]
    return R_new, coeffs


@dataclass
class Round:
    n: int
    nd: int
    increments: np.ndarray
    residual_energy: float


@dataclass
class SparseSolution:
    """Common support and per-pair coefficients accumulated over greedy rounds."""

    Q: int
    rounds: List[Round] = field(default_factory=list)

    @property
    def support(self) -> list:
        seen = {}
        for rd in self.rounds:
            seen.setdefault((rd.n, rd.nd), None)
        return list(seen)

    @property
    def coeffs(self) -> dict:
        out = {}
        for rd in self.rounds:
            key = (rd.n, rd.nd)
            out[key] = out.get(key, np.zeros(self.Q, dtype=complex)) + rd.increments
        return out

    @property
    def iterations_used(self) -> int:
        return len(self.rounds)

    @property
    def selections(self) -> list:
        """Selected (n, nd) per round, repeats included."""
        return [(rd.n, rd.nd) for rd in self.rounds]

    def estimates(self, grids):
        """Estimated locations and velocities, one row per round."""
        sel = np.array(self.selections, dtype=int).reshape(-1, 2)
        return grids.loc_points[sel[:, 0]], grids.vel_points[sel[:, 1]]


def _selector(algo, dictionary, fdict, n_it):
    if algo == "bmp":
        return lambda R: bmp_select(R, dictionary)
    if algo == "fbmp":
        return lambda R: fbmp_select(R, fdict)
    if algo == "ifbmp":
        return lambda R: ifbmp_select(R, fdict, n_it)
    raise ValueError(f"unknown algorithm {algo!r}; expected one of {ALGORITHMS}")


def pursue(
    measurements,
    K: int,
    algo: str,
    dictionary: CompleteDictionary,
    fdict: Optional[FactorizedDictionary] = None,
    n_it: int = 0,
):
    """Run ``K`` select-and-update rounds of ``algo``.

    Every algorithm updates with the complete-model atom at the selected
    index. Returns a :class:`SparseSolution`, or a list of them for a batch.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if algo != "bmp" and fdict is None:
        raise ValueError(f"{algo} needs a FactorizedDictionary")
    R, single = _as_batch(measurements)
    B, Q = R.shape[:2]
    select = _selector(algo, dictionary, fdict, n_it)
    solutions = [SparseSolution(Q) for _ in range(B)]
    for _ in range(K):
        n, nd, _ = select(R)
        atoms = dictionary.atoms(n, nd)
        R, coeffs = project_out(R, atoms)
        energy = np.sum(np.abs(R) ** 2, axis=(1, 2, 3))
        for b, sol in enumerate(solutions):
            sol.rounds.append(Round(int(n[b]), int(nd[b]), coeffs[b], float(energy[b])))
    return solutions[0] if single else solutions


def bmp_run(measurements, dictionary: CompleteDictionary, K: int):
    return pursue(measurements, K, "bmp", dictionary)


def fbmp_run(measurements, fdict: FactorizedDictionary, dictionary: CompleteDictionary, K: int):
    return pursue(measurements, K, "fbmp", dictionary, fdict)


def ifbmp_run(measurements, fdict: FactorizedDictionary, dictionary: CompleteDictionary, K: int, n_it: int):
    return pursue(measurements, K, "ifbmp", dictionary, fdict, n_it)
