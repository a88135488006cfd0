import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fmcwsparse.dictionaries import CompleteDictionary, FactorizedDictionary
from fmcwsparse.geometry import REFERENCE_CORNER, RadarConfig, Target, build_grids, reference_pairs
from fmcwsparse.pursuit import (
    bmp_run,
    bmp_select,
    fbmp_run,
    fbmp_select,
    ifbmp_run,
    ifbmp_select,
    location_objective,
    pursue,
    update,
)
from fmcwsparse.signals import random_alphas, signal_cubes

CFG = RadarConfig.reference()
PAIRS = reference_pairs()


def _bench(xi, **kw):
    g = build_grids(CFG, REFERENCE_CORNER, xi, xi, **kw)
    return g, CompleteDictionary(g, PAIRS, CFG), FactorizedDictionary(g, PAIRS, CFG)


G4, D4, F4 = _bench(4)
G8, D8, F8 = _bench(8)


def scene(g, cells, alphas=None):
    alphas = np.ones((len(cells), 4)) if alphas is None else alphas
    return signal_cubes([Target(g.loc_points[n], g.vel_points[nd], a) for (n, nd), a in zip(cells, alphas)], PAIRS, CFG)


def test_bmp_matches_naive_loop(rng):
    R = rng.standard_normal((4, 16, 16)) + 1j * rng.standard_normal((4, 16, 16))
    best, arg = -1.0, None
    for n in range(G4.n_x):
        for nd in range(G4.n_v):
            obj = sum(abs(np.vdot(D4.complete_atom(q, n, nd), R[q].T.reshape(-1))) ** 2 for q in range(4))
            if obj > best:
                best, arg = obj, (n, nd)
    sel = bmp_select(R, D4)
    assert (sel.n, sel.nd) == arg
    assert sel.objective == pytest.approx(best, rel=1e-10)


def test_zero_residual_is_degenerate():
    for sel in (bmp_select(np.zeros((4, 16, 16)), D4), fbmp_select(np.zeros((4, 16, 16)), F4)):
        assert (sel.n, sel.nd) == (0, 0)
        assert sel.objective == 0 and sel.degenerate


def test_bmp_exact_noiseless_single_target(rng):
    for _ in range(5):
        n, nd = rng.integers(G8.n_x), rng.integers(G8.n_v)
        alphas = random_alphas(rng, 1, 4)
        sol = bmp_run(scene(G8, [(n, nd)], alphas), D8, 1)
        assert sol.support == [(n, nd)]
        assert np.allclose(sol.coeffs[(n, nd)], alphas[0], atol=1e-9)
        assert sol.rounds[0].residual_energy < 1e-18


def test_bmp_recovers_three_separated_targets():
    cells = [(G8.flat_index(1, 1), 5), (G8.flat_index(6, 2), 40), (G8.flat_index(3, 6), 60)]
    R = scene(G8, cells)
    sol = bmp_run(R, D8, 3)
    assert sorted(sol.support) == sorted(cells)
    assert sol.iterations_used == 3
    # non-orthogonal updates leave only the small cross-coherence terms behind
    assert sol.rounds[-1].residual_energy < 1e-2 * np.sum(np.abs(R) ** 2)


def test_update_orthogonalizes(rng):
    R = rng.standard_normal((4, 16, 16)) + 1j * rng.standard_normal((4, 16, 16))
    n, nd = 7, 3
    R1, c = update(R, D4, n, nd)
    for q in range(4):
        d = D4.complete_atom(q, n, nd)
        corr = abs(np.vdot(d, R1[q].T.reshape(-1)))
        assert corr < 1e-9 * np.linalg.norm(R[q]) * np.sqrt(256)
    R2, c2 = update(R1, D4, n, nd)
    assert np.allclose(c2, 0, atol=1e-12)


def test_update_cancels_single_atom():
    R = scene(G4, [(5, 9)], [[2.0, 1j, -1, 0.5]])
    R1, c = update(R, D4, 5, 9)
    assert np.allclose(c, [2.0, 1j, -1, 0.5])
    assert np.max(np.abs(R1)) < 1e-10


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["bmp", "fbmp", "ifbmp"]))
def test_residual_energy_non_increasing(seed, algo):
    rng = np.random.default_rng(seed)
    R = rng.standard_normal((4, 16, 16)) + 1j * rng.standard_normal((4, 16, 16))
    sol = pursue(R, 4, algo, D4, F4, n_it=2)
    energies = [np.sum(np.abs(R) ** 2)] + [rd.residual_energy for rd in sol.rounds]
    assert all(b <= a * (1 + 1e-12) for a, b in zip(energies, energies[1:]))


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1), st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3))
def test_selection_scale_invariant(seed, scale):
    rng = np.random.default_rng(seed)
    R = scene(G4, [(rng.integers(16), rng.integers(16))], random_alphas(rng, 1, 4))
    R = R + 0.3 * (rng.standard_normal(R.shape) + 1j * rng.standard_normal(R.shape))
    for select in (lambda X: bmp_select(X, D4), lambda X: fbmp_select(X, F4), lambda X: ifbmp_select(X, F4, 2)):
        a, b = select(R), select(scale * R)
        assert (a.n, a.nd) == (b.n, b.nd)


def test_repeated_runs_identical(rng):
    R = rng.standard_normal((4, 16, 16)) + 1j * rng.standard_normal((4, 16, 16))
    a = pursue(R, 3, "ifbmp", D4, F4, 3)
    b = pursue(R.copy(), 3, "ifbmp", D4, F4, 3)
    assert a.selections == b.selections


def test_batch_equals_single(rng):
    R = rng.standard_normal((6, 4, 16, 16)) + 1j * rng.standard_normal((6, 4, 16, 16))
    for algo in ("bmp", "fbmp", "ifbmp"):
        batch = pursue(R, 2, algo, D8, F8, 3)
        for b in range(6):
            single = pursue(R[b], 2, algo, D8, F8, 3)
            assert single.selections == batch[b].selections
            assert np.allclose(single.rounds[-1].increments, batch[b].rounds[-1].increments)


def test_chunking_does_not_change_bmp(rng):
    R = rng.standard_normal((3, 4, 16, 16)) + 1j * rng.standard_normal((3, 4, 16, 16))
    small = CompleteDictionary(G8, PAIRS, CFG, chunk_atoms=100)
    a, b = bmp_select(R, D8), bmp_select(R, small)
    assert np.array_equal(a.n, b.n) and np.array_equal(a.nd, b.nd)


def test_fbmp_static_exact_and_matches_bmp(rng):
    z = G8.zero_velocity_index
    assert z is None  # even xi: no zero-velocity cell, use simplified-exact static scene at xi=5
    g, D, F = _bench(5)
    z = g.zero_velocity_index
    for n in rng.integers(g.n_x, size=5):
        R = scene(g, [(n, z)], random_alphas(rng, 1, 4))
        a, b = fbmp_select(R, F), bmp_select(R, D)
        assert (a.n, a.nd) == (b.n, b.nd) == (n, z)
        assert fbmp_run(R, F, D, 1).support == [(n, z)]
        assert ifbmp_run(R, F, D, 1, 3).support == [(n, z)]


def test_fbmp_location_follows_shift():
    """Moving target: the factorized location step lands near x + gamma v."""
    g, D, F = _bench(32)
    x, v = np.array([8.5, -1.7]), np.array([6.0, 6.0])
    shifted = x + CFG.gamma * v
    assert np.allclose(shifted, [8.684, -1.516], atol=1e-3)
    R = signal_cubes([Target(x, v, np.ones(4))], PAIRS, CFG)
    sel = fbmp_select(R, F)
    assert sel.n == g.nearest_location_index(shifted)
    assert sel.n != g.nearest_location_index(x)


def test_ifbmp_zero_iterations_is_fbmp(rng):
    R = rng.standard_normal((5, 4, 16, 16)) + 1j * rng.standard_normal((5, 4, 16, 16))
    a, b = fbmp_select(R, F8), ifbmp_select(R, F8, 0)
    assert np.array_equal(a.n, b.n) and np.array_equal(a.nd, b.nd)
    with pytest.raises(ValueError):
        ifbmp_select(R, F8, -1)


def test_ifbmp_corrects_fbmp_at_fine_grid():
    g, D, F = _bench(32)
    rng = np.random.default_rng(3)
    fixed = 0
    missed = 0
    for _ in range(40):
        n, nd = rng.integers(g.n_x), rng.integers(g.n_v)
        R = scene(g, [(n, nd)])
        f = fbmp_run(R, F, D, 1).support[0]
        if f[0] != n:
            missed += 1
            fixed += ifbmp_run(R, F, D, 1, 3).support[0] == (n, nd)
    assert missed > 10
    assert fixed == missed


def test_location_objective_matches_selection(rng):
    R = scene(G8, [(20, 30)])
    obj = location_objective(R, F8)
    assert obj.shape == (G8.n_x,)
    assert int(np.argmax(obj)) == fbmp_select(R, F8).n
    cond = location_objective(R, F8, nd=30)
    assert int(np.argmax(cond)) == 20


def test_ghost_targets_raise_ifbmp_residual():
    """Three noiseless targets: the factorized selection leaves more energy behind on average."""
    g, D, F = _bench(16)
    rng = np.random.default_rng(11)
    e_bmp = e_if = 0.0
    R = []
    for _ in range(30):
        n = rng.choice(g.n_x, 3, replace=False)
        nd = rng.integers(g.n_v, size=3)
        R.append(scene(g, list(zip(n, nd)), random_alphas(rng, 3, 4)))
    R = np.stack(R)
    e_bmp = sum(s.rounds[-1].residual_energy for s in pursue(R, 3, "bmp", D, F))
    e_if = sum(s.rounds[-1].residual_energy for s in pursue(R, 3, "ifbmp", D, F, 3))
    assert e_if > e_bmp


def test_bad_arguments():
    R = np.zeros((4, 16, 16))
    with pytest.raises(ValueError):
        pursue(R, 0, "bmp", D4)
    with pytest.raises(ValueError):
        pursue(R, 1, "fbmp", D4)
    with pytest.raises(ValueError):
        pursue(R, 1, "omp", D4, F4)
    with pytest.raises(ValueError):
        bmp_select(np.zeros((16, 16)), D4)
