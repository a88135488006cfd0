"""Monte-Carlo experiments: timing, miss rate, SNR sweep, decision map and shift-bound sweep.

Every random quantity of a trial comes from :func:`seed_stream`, keyed by
(master seed, sweep point, trial, role), so results do not depend on batch
size, worker count or how many trials are requested.
"""

import csv
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from .analysis import (
    TrialMetrics,
    fit_scaling,
    lee_vee,
    match_targets,
    random_theorem_case,
    shift_bound,
    theorem1_check,
)
from .config import ExperimentConfig, dump_config
from .dictionaries import CompleteDictionary, FactorizedDictionary
from .errors import ConfigError, GeometryError, HypothesisViolated, InsufficientData
from .geometry import GridPair, Target, build_grids, check_geometry_conditions
from .pursuit import bmp_select, fbmp_select, ifbmp_select, location_objective, pursue
from .signals import NoiseSpec, db_to_linear, noise_cubes, random_alphas, sigma2_for_snr, signal_cubes

KINDS = ("timing", "missrate", "snr", "map", "theorem")
ROLES = {"targets": 0, "alphas": 1, "noise": 2, "theorem": 3, "timing": 4}


def seed_stream(master_seed: int, trial_index: int, role: str, point: int = 0) -> np.random.Generator:
    """Independent generator for one (trial, role) at one sweep point."""
    if role not in ROLES:
        raise ValueError(f"unknown stream role {role!r}; expected one of {sorted(ROLES)}")
    seq = np.random.SeedSequence(int(master_seed), spawn_key=(ROLES[role], int(point), int(trial_index)))
    return np.random.default_rng(seq)


def noise_seed(master_seed: int, trial_index: int, point: int = 0) -> int:
    return int(seed_stream(master_seed, trial_index, "noise", point).integers(2**63))


@dataclass
class TrialDraw:
    trial: int
    n: np.ndarray  # (K,) location cells, distinct
    nd: np.ndarray  # (K,) velocity cells
    alphas: np.ndarray  # (K, Q)
    noise_seed: int


def draw_trial(master_seed, trial, grids: GridPair, K, Q, *, random_alpha=True, point=0) -> TrialDraw:
    rng = seed_stream(master_seed, trial, "targets", point)
    if K > grids.n_x:
        raise ConfigError(f"cannot place {K} targets on {grids.n_x} location cells")
    n = rng.choice(grids.n_x, size=K, replace=False)
    nd = rng.integers(grids.n_v, size=K)
    if random_alpha:
        alphas = random_alphas(seed_stream(master_seed, trial, "alphas", point), K, Q)
    else:
        alphas = np.ones((K, Q), dtype=complex)
    return TrialDraw(trial, n, nd, alphas, noise_seed(master_seed, trial, point))


def draw_targets(draw: TrialDraw, grids: GridPair) -> List[Target]:
    return [
        Target(grids.loc_points[n], grids.vel_points[nd], a) for n, nd, a in zip(draw.n, draw.nd, draw.alphas)
    ]


class Workbench:
    """Grids and dictionaries for one resolution, shared by every trial at that point."""

    def __init__(self, cfg: ExperimentConfig, xi: int, cache: bool = True):
        self.cfg = cfg
        self.xi = xi
        self.grids = build_grids(cfg.radar, cfg.corner, xi, xi)
        self.complete = CompleteDictionary(self.grids, cfg.pairs, cfg.radar)
        self.factorized = FactorizedDictionary(self.grids, cfg.pairs, cfg.radar, cache=cache)

    def cubes(self, draws: List[TrialDraw], sigma2: float = 0.0) -> np.ndarray:
        r = self.cfg.radar
        out = np.empty((len(draws), self.cfg.Q, r.Ms, r.Mr), dtype=complex)
        for b, d in enumerate(draws):
            out[b] = signal_cubes(draw_targets(d, self.grids), self.cfg.pairs, r)
            if sigma2 > 0:
                out[b] += noise_cubes(NoiseSpec(sigma2, d.noise_seed), self.cfg.Q, r)
        return out

    def select(self, algo: str, R, n_it: int = 0):
        if algo == "bmp":
            return bmp_select(R, self.complete)
        if algo == "fbmp":
            return fbmp_select(R, self.factorized)
        return ifbmp_select(R, self.factorized, n_it)


def score(solution, draw: TrialDraw, grids: GridPair):
    """(lee, vee, location misses, velocity misses) after assignment matching."""
    sel = np.array(solution.selections, dtype=int)
    est_pos, est_vel = grids.loc_points[sel[:, 0]], grids.vel_points[sel[:, 1]]
    true_pos, true_vel = grids.loc_points[draw.n], grids.vel_points[draw.nd]
    lee, vee = lee_vee(est_pos, est_vel, true_pos, true_vel, grids)
    perm = match_targets(est_pos, true_pos)
    misses = int(np.sum(sel[perm, 0] != draw.n))
    vmisses = int(np.sum(sel[perm, 1] != draw.nd))
    return lee, vee, misses, vmisses


@dataclass
class PointSpec:
    """One Monte-Carlo sweep point."""

    algo: str
    xi: int
    K: int
    n_it: int
    snr_db: Optional[float]
    point: int
    random_alpha: bool


def run_point(cfg: ExperimentConfig, spec: PointSpec, trials, bench: Optional[Workbench] = None) -> List[TrialMetrics]:
    bench = bench or Workbench(cfg, spec.xi)
    sigma2 = 0.0 if spec.snr_db is None else sigma2_for_snr(float(db_to_linear(spec.snr_db)))
    out = []
    trials = list(trials)
    for start in range(0, len(trials), cfg.batch):
        chunk = trials[start : start + cfg.batch]
        draws = [draw_trial(cfg.seed, t, bench.grids, spec.K, cfg.Q, random_alpha=spec.random_alpha, point=spec.point) for t in chunk]
        R = bench.cubes(draws, sigma2)
        t0 = time.perf_counter()
        sols = pursue(R, spec.K, spec.algo, bench.complete, bench.factorized, spec.n_it)
        per_selection = (time.perf_counter() - t0) / (len(chunk) * spec.K)
        for d, sol in zip(draws, sols):
            lee, vee, miss, vmiss = score(sol, d, bench.grids)
            out.append(TrialMetrics(d.trial, spec.algo, spec.xi, spec.snr_db, cfg.seed, lee, vee, miss, vmiss, per_selection))
    return out


def _run_point_job(args):
    cfg, spec, trials = args
    return run_point(cfg, spec, trials)


def run_point_parallel(cfg: ExperimentConfig, spec: PointSpec, bench: Optional[Workbench] = None) -> List[TrialMetrics]:
    trials = range(cfg.trials)
    if cfg.workers == 1:
        return run_point(cfg, spec, trials, bench)
    shards = [list(trials[w :: cfg.workers]) for w in range(cfg.workers)]
    with ProcessPoolExecutor(cfg.workers) as pool:
        parts = pool.map(_run_point_job, [(cfg, spec, s) for s in shards if s])
    rows = [m for part in parts for m in part]
    return sorted(rows, key=lambda m: m.trial)


@dataclass
class PointSummary:
    algorithm: str
    xi: int
    k: int
    nit: Optional[int]
    snr_db: Optional[float]
    trials: int
    miss_rate: float
    velocity_miss_rate: float
    lee: float
    vee: float

    @classmethod
    def of(cls, spec: PointSpec, rows: List[TrialMetrics]) -> "PointSummary":
        targets = len(rows) * spec.K
        return cls(
            spec.algo,
            spec.xi,
            spec.K,
            spec.n_it if spec.algo == "ifbmp" else None,
            spec.snr_db,
            len(rows),
            sum(m.misses for m in rows) / targets,
            sum(m.velocity_misses for m in rows) / targets,
            float(np.mean([m.lee for m in rows])),
            float(np.mean([m.vee for m in rows])),
        )


def write_csv(path: Path, rows: List[dict]):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        if not rows:
            return
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)


def _nits(cfg, algo):
    return cfg.nit if algo == "ifbmp" else (0,)


def _check_geometry(cfg: ExperimentConfig, grids: GridPair, lam: float = 3.0 + 1e-9):
    report = check_geometry_conditions(grids, cfg.pairs, cfg.radar, lam)
    if not (report.velocity_bound.passed and report.range_bound.passed):
        failed = [name for name, ok, _, _ in report.rows() if not ok]
        raise GeometryError(f"geometry preconditions fail: {failed}")


def run_missrate(cfg: ExperimentConfig) -> Dict[str, Path]:
    summaries = {a: [] for a in cfg.algorithms}
    per_trial = {a: [] for a in cfg.algorithms}
    for xi in cfg.xi:
        bench = Workbench(cfg, xi)
        _check_geometry(cfg, bench.grids)
        for algo in cfg.algorithms:
            for n_it in _nits(cfg, algo):
                spec = PointSpec(algo, xi, 1, n_it, None, 0, random_alpha=False)
                rows = run_point_parallel(cfg, spec, bench)
                summaries[algo].append(PointSummary.of(spec, rows).__dict__)
                per_trial[algo].extend(dict(m.row(), nit=summaries[algo][-1]["nit"]) for m in rows)
    return _write_sweep(cfg, "missrate", summaries, per_trial)


def run_snr(cfg: ExperimentConfig) -> Dict[str, Path]:
    """SNR sweep at ``cfg.snr_xi``.

    Every SNR point reuses the same targets, coefficients and unit noise
    (common random numbers), so consecutive points differ only in the noise
    scale and the curves are not blurred by scene-to-scene sampling noise.
    """
    xi = cfg.snr_xi
    bench = Workbench(cfg, xi)
    _check_geometry(cfg, bench.grids)
    summaries = {a: [] for a in cfg.algorithms}
    per_trial = {a: [] for a in cfg.algorithms}
    for algo in cfg.algorithms:
        for n_it in _nits(cfg, algo):
            for K in cfg.k:
                for snr in cfg.snr_db:
                    spec = PointSpec(algo, xi, K, n_it, float(snr), 0, random_alpha=True)
                    rows = run_point_parallel(cfg, spec, bench)
                    summaries[algo].append(PointSummary.of(spec, rows).__dict__)
                    per_trial[algo].extend(dict(m.row(), k=K, nit=summaries[algo][-1]["nit"]) for m in rows)
    return _write_sweep(cfg, "snr", summaries, per_trial)


def _write_sweep(cfg, kind, summaries, per_trial):
    paths = {}
    for algo in cfg.algorithms:
        path = cfg.out / f"{kind}_{algo}.csv"
        write_csv(path, summaries[algo])
        write_csv(cfg.out / f"{kind}_{algo}_trials.csv", per_trial[algo])
        paths[algo] = path
    return paths


@dataclass
class TimingPoint:
    algorithm: str
    xi: int
    nit: Optional[int]
    reps: int
    mean_s: float
    std_s: float


def time_selections(
    cfg: ExperimentConfig, algo: str, xi: int, n_it: int, reps: int, budget_s: float, min_total_s: float = 1.0
) -> TimingPoint:
    """Mean wall time of one selection on noiseless random single-target cubes.

    Dictionaries are built without caches, so every atom a selection needs is
    formed during the timed call. One untimed warm-up selection runs first.
    At least ``reps`` selections are timed, and more while their total stays
    under ``min_total_s``; nothing new starts once ``budget_s`` is spent.
    """
    bench = Workbench(cfg, xi, cache=False)

    def cube(t):
        return bench.cubes([draw_trial(cfg.seed, t, bench.grids, 1, cfg.Q, random_alpha=False, point=xi)])[0]

    bench.select(algo, cube(0), n_it)
    times = []
    while len(times) < reps or sum(times) < min_total_s:
        R = cube(len(times) + 1)
        t0 = time.perf_counter()
        bench.select(algo, R, n_it)
        times.append(time.perf_counter() - t0)
        if sum(times) > budget_s:
            break
    return TimingPoint(algo, xi, n_it if algo == "ifbmp" else None, len(times), float(np.mean(times)), float(np.std(times)))


def run_timing(cfg: ExperimentConfig, budget_s: float = 60.0) -> Dict[str, Path]:
    paths = {}
    fits = []
    for algo in cfg.algorithms:
        n_it = max(cfg.nit) if algo == "ifbmp" else 0
        points = [time_selections(cfg, algo, xi, n_it, cfg.timing_reps, budget_s) for xi in sorted(cfg.xi)]
        try:
            exponent = fit_scaling([(p.xi, p.mean_s) for p in points])
        except InsufficientData:
            exponent = float("nan")
        fits.append({"algorithm": algo, "nit": points[0].nit, "exponent": exponent})
        path = cfg.out / f"timing_{algo}.csv"
        write_csv(path, [dict(p.__dict__, exponent=exponent) for p in points])
        paths[algo] = path
    write_csv(cfg.out / "timing_fit.csv", fits)
    return paths


def map_fields(cfg: ExperimentConfig, xi: int):
    """Location decision-variable fields (xi, xi) at refinement steps 0 and 1.

    Step 0 uses the zero-velocity inner dictionary; step 1 conditions it on
    the velocity chosen at step 0.
    """
    bench = Workbench(cfg, xi)
    target = Target(cfg.map_position, cfg.map_velocity, np.ones(cfg.Q))
    R = signal_cubes([target], cfg.pairs, cfg.radar)
    sel0 = fbmp_select(R, bench.factorized)
    f0 = location_objective(R, bench.factorized)
    f1 = location_objective(R, bench.factorized, nd=sel0.nd)
    return bench.grids, sel0, f0.reshape(xi, xi), f1.reshape(xi, xi)


def run_map(cfg: ExperimentConfig) -> Dict[str, Path]:
    rows = []
    paths = {}
    gamma = cfg.radar.gamma
    shifted = np.asarray(cfg.map_position) + gamma * np.asarray(cfg.map_velocity)
    for xi in cfg.xi:
        grids, sel0, f0, f1 = map_fields(cfg, xi)
        for step, field in ((0, f0), (1, f1)):
            path = cfg.out / f"map_ifbmp_xi{xi}_i{step}.csv"
            path.parent.mkdir(parents=True, exist_ok=True)
            np.savetxt(path, field, delimiter=",", fmt="%.17g")
            paths[f"xi{xi}_i{step}"] = path
        a0 = np.unravel_index(np.argmax(f0), f0.shape)
        a1 = np.unravel_index(np.argmax(f1), f1.shape)
        true_cell = grids.axis_indices(grids.nearest_location_index(cfg.map_position))
        shifted_cell = (
            grids.axis_indices(grids.nearest_location_index(shifted)) if grids.contains_location(shifted) else (None, None)
        )
        rows.append(
            {
                "xi": xi,
                "i0_cell_x": int(a0[0]),
                "i0_cell_y": int(a0[1]),
                "i1_cell_x": int(a1[0]),
                "i1_cell_y": int(a1[1]),
                "true_cell_x": int(true_cell[0]),
                "true_cell_y": int(true_cell[1]),
                "shifted_cell_x": shifted_cell[0],
                "shifted_cell_y": shifted_cell[1],
                "nd0": int(sel0.nd),
            }
        )
    write_csv(cfg.out / "map_ifbmp.csv", rows)
    paths["summary"] = cfg.out / "map_ifbmp.csv"
    return paths


def theorem_sweep(cfg: ExperimentConfig, xi: int = 16):
    """TheoremCheck rows for ``theorem_draws`` random cases at every lambda."""
    grids = build_grids(cfg.radar, cfg.corner, xi, xi)
    checks = []
    for li, lam in enumerate(cfg.lambdas):
        for i in range(cfg.theorem_draws):
            rng = seed_stream(cfg.seed, i, "theorem", point=li)
            x, v, pair = random_theorem_case(rng, cfg.radar, lam, grids)
            try:
                checks.append(theorem1_check(x, v, pair, cfg.radar, lam, grids))
            except HypothesisViolated as exc:
                raise GeometryError(f"lambda={lam}: {exc}") from exc
    return checks


def run_theorem(cfg: ExperimentConfig) -> Dict[str, Path]:
    checks = theorem_sweep(cfg)
    path = cfg.out / "theorem_checks.csv"
    write_csv(path, [dict(c.row(), applicable=c.applicable) for c in checks])
    summary = []
    bound = shift_bound(cfg.radar)
    for lam in cfg.lambdas:
        sub = [c for c in checks if c.lam == float(lam)]
        res = np.array([c.residual for c in sub])
        summary.append(
            {
                "lambda": float(lam),
                "draws": len(sub),
                "bound_ok_fraction": float(np.mean([c.bound_ok for c in sub])),
                "max_shift_inf": float(max(np.max(np.abs(c.shift)) for c in sub)),
                "shift_bound": bound,
                "median_residual": float(np.median(res)),
                "median_residual_x_lambda": float(np.median(res) * lam),
            }
        )
    write_csv(cfg.out / "theorem_summary.csv", summary)
    return {"checks": path, "summary": cfg.out / "theorem_summary.csv"}


_RUNNERS = {
    "timing": run_timing,
    "missrate": run_missrate,
    "snr": run_snr,
    "map": run_map,
    "theorem": run_theorem,
}


def run_experiment(kind: str, cfg: ExperimentConfig) -> Dict[str, Path]:
    if kind not in _RUNNERS:
        raise ConfigError(f"unknown experiment {kind!r}; expected one of {KINDS}")
    cfg.out.mkdir(parents=True, exist_ok=True)
    (cfg.out / "config.resolved.txt").write_text(dump_config(cfg))
    return _RUNNERS[kind](cfg)
