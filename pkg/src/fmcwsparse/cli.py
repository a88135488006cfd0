"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 geometry error.
"""

import argparse
import sys
from pathlib import Path

from .config import ExperimentConfig, load_config
from .dictionaries import CompleteDictionary, FactorizedDictionary
from .errors import AmbiguousGrid, ConfigError, DegenerateGeometry, FMCWError, GeometryError
from .experiments import KINDS, run_experiment
from .files import load_scene, read_cubes, write_cubes, write_solution
from .geometry import build_grids, check_geometry_conditions
from .pursuit import ALGORITHMS, pursue
from .signals import MeasurementSet, Scene, synthesize

EXIT_CONFIG = 2
EXIT_GEOMETRY = 3


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", type=Path, help="YAML experiment config")
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--xi", type=int, nargs="+", help="grid resolution(s)")
    p.add_argument("--snr-db", type=float, nargs="+")
    p.add_argument("--k", type=int, nargs="+", help="number(s) of targets")
    p.add_argument("--nit", type=int, nargs="+", help="IFBMP refinement count(s)")
    p.add_argument("--algo", choices=ALGORITHMS, nargs="+")
    p.add_argument("--workers", type=int)
    p.add_argument("--out", type=Path)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fmcwsparse", description="Multistatic FMCW sparse recovery toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="synthesize measurement cubes from a scene file")
    _common(p)
    p.add_argument("--scene", type=Path, required=True)

    p = sub.add_parser("recover", help="run a pursuit on a cube CSV")
    _common(p)
    p.add_argument("--cubes", type=Path, required=True)

    p = sub.add_parser("exp", help="run a Monte-Carlo experiment")
    p.add_argument("kind", choices=KINDS)
    _common(p)

    p = sub.add_parser("check-geometry", help="report the geometric preconditions")
    _common(p)
    p.add_argument("--lam", type=float, default=10.0)
    return parser


def resolve_config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    snr_xi = args.xi[0] if args.xi and getattr(args, "kind", None) == "snr" else None
    return cfg.with_overrides(
        snr_xi=snr_xi,
        seed=args.seed,
        trials=args.trials,
        xi=tuple(args.xi) if args.xi else None,
        snr_db=tuple(args.snr_db) if args.snr_db else None,
        k=tuple(args.k) if args.k else None,
        nit=tuple(args.nit) if args.nit else None,
        algorithms=tuple(args.algo) if args.algo else None,
        workers=args.workers,
        out=args.out,
    )


def cmd_synth(args, cfg: ExperimentConfig) -> int:
    targets, noise, model = load_scene(args.scene, cfg.Q)
    if args.seed is not None:
        noise.seed = args.seed
    ms = synthesize(Scene(targets, cfg.pairs), cfg.radar, noise, model)
    path = cfg.out / "cubes.csv"
    write_cubes(path, ms.cubes, model, noise.seed)
    print(path)
    return 0


def cmd_recover(args, cfg: ExperimentConfig) -> int:
    cubes, header = read_cubes(args.cubes)
    ms = MeasurementSet(cubes, cfg.radar)
    if ms.Q != cfg.Q:
        raise ConfigError(f"cube file has {ms.Q} pairs, config has {cfg.Q}")
    xi, K, n_it = cfg.xi[0], cfg.k[0], cfg.nit[0]
    grids = build_grids(cfg.radar, cfg.corner, xi, xi)
    complete = CompleteDictionary(grids, cfg.pairs, cfg.radar)
    fdict = FactorizedDictionary(grids, cfg.pairs, cfg.radar)
    for algo in cfg.algorithms:
        sol = pursue(ms, K, algo, complete, fdict, n_it)
        path = cfg.out / f"recover_{algo}.csv"
        write_solution(path, sol, grids)
        print(path)
    return 0


def cmd_check_geometry(args, cfg: ExperimentConfig) -> int:
    ok = True
    for xi in cfg.xi:
        grids = build_grids(cfg.radar, cfg.corner, xi, xi)
        report = check_geometry_conditions(grids, cfg.pairs, cfg.radar, args.lam)
        print(f"xi={xi} lambda={args.lam}")
        for name, passed, margin, detail in report.rows():
            print(f"  {name:18s} {'pass' if passed else 'FAIL'}  margin={margin:.6g}  {detail}")
        ok &= report.ok
    return 0 if ok else EXIT_GEOMETRY


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.command == "synth":
            return cmd_synth(args, cfg)
        if args.command == "recover":
            return cmd_recover(args, cfg)
        if args.command == "check-geometry":
            return cmd_check_geometry(args, cfg)
        paths = run_experiment(args.kind, cfg)
        for p in paths.values():
            print(p)
        return 0
    except (GeometryError, AmbiguousGrid, DegenerateGeometry) as exc:
        print(f"geometry error: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FMCWError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
