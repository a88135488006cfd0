"""Experiment configuration and its YAML file format.

A config file has four optional sections; anything omitted takes the
reference K-band defaults::

    radar:
      f0: 24.0e9
      B: 250.0e6
      Ts: 2.0e-5
      Ms: 16
      Mr: 16
    antennas:            # one entry per bistatic pair, in pair order
      - {tx: [0, -2.5], rx: [0, 2.5]}
      - {tx: [0, -2.5], rx: [12.5, -10]}
    grid:
      corner: [5, -5]
      xi: [8, 16, 24, 32]
    experiment:
      trials: 1000
      seed: 0
      k: [1, 3]
      snr_xi: 16           # grid resolution of the SNR sweep
      snr_db: [-10, 0, 10, 20, 30]
      nit: [3]
      algorithms: [bmp, fbmp, ifbmp]
      lambdas: [5, 10, 20, 40]
"""

from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional, Tuple

import yaml

from .errors import ConfigError
from .geometry import REFERENCE_CORNER, BistaticPair, RadarConfig, reference_pairs
from .pursuit import ALGORITHMS


def _floats(values, name, length=None):
    try:
        out = tuple(float(v) for v in values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: expected numbers, got {values!r}") from exc
    if length is not None and len(out) != length:
        raise ConfigError(f"{name}: expected {length} numbers, got {len(out)}")
    return out


def _ints(values, name):
    try:
        out = tuple(int(v) for v in values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: expected integers, got {values!r}") from exc
    if not out:
        raise ConfigError(f"{name}: must not be empty")
    return out


@dataclass
class ExperimentConfig:
    radar: RadarConfig = field(default_factory=RadarConfig.reference)
    pairs: Tuple[BistaticPair, ...] = field(default_factory=lambda: tuple(reference_pairs()))
    corner: Tuple[float, float] = REFERENCE_CORNER
    xi: Tuple[int, ...] = (8, 16, 24, 32)
    k: Tuple[int, ...] = (1, 3)
    snr_xi: int = 16
    snr_db: Tuple[float, ...] = (-10.0, 0.0, 10.0, 20.0, 30.0)
    trials: int = 1000
    nit: Tuple[int, ...] = (3,)
    seed: int = 0
    algorithms: Tuple[str, ...] = ALGORITHMS
    lambdas: Tuple[float, ...] = (5.0, 10.0, 20.0, 40.0)
    theorem_draws: int = 100
    timing_reps: int = 3
    batch: int = 100
    workers: int = 1
    map_position: Tuple[float, float] = (8.5, -1.7)
    map_velocity: Tuple[float, float] = (6.0, 6.0)
    out: Path = Path("results")

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        for name in ("xi", "k", "snr_db", "nit", "algorithms", "lambdas"):
            if len(getattr(self, name)) == 0:
                raise ConfigError(f"{name} sweep must not be empty")
        if self.snr_xi < 1 or any(x < 1 for x in self.xi):
            raise ConfigError("xi values must be >= 1")
        if any(k < 1 for k in self.k):
            raise ConfigError("k values must be >= 1")
        if any(n < 0 for n in self.nit):
            raise ConfigError("nit values must be >= 0")
        bad = [a for a in self.algorithms if a not in ALGORITHMS]
        if bad:
            raise ConfigError(f"unknown algorithms {bad}; expected a subset of {ALGORITHMS}")
        if self.batch < 1 or self.workers < 1 or self.timing_reps < 1 or self.theorem_draws < 1:
            raise ConfigError("batch, workers, timing_reps and theorem_draws must be >= 1")
        if not self.pairs:
            raise ConfigError("at least one bistatic pair is required")
        self.out = Path(self.out)

    @property
    def Q(self) -> int:
        return len(self.pairs)

    def with_overrides(self, **kwargs) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in kwargs.items() if v is not None})

    def to_dict(self) -> dict:
        r = self.radar
        return {
            "radar": {"f0": r.f0, "B": r.B, "Ts": r.Ts, "Ms": r.Ms, "Mr": r.Mr, "c": r.c},
            "antennas": [{"tx": list(p.tx), "rx": list(p.rx)} for p in self.pairs],
            "grid": {"corner": list(self.corner), "xi": list(self.xi)},
            "experiment": {
                "trials": self.trials,
                "seed": self.seed,
                "k": list(self.k),
                "snr_xi": self.snr_xi,
                "snr_db": list(self.snr_db),
                "nit": list(self.nit),
                "algorithms": list(self.algorithms),
                "lambdas": list(self.lambdas),
                "theorem_draws": self.theorem_draws,
                "timing_reps": self.timing_reps,
                "batch": self.batch,
                "workers": self.workers,
                "map_position": list(self.map_position),
                "map_velocity": list(self.map_velocity),
                "out": str(self.out),
            },
        }


_EXPERIMENT_KEYS = {f.name for f in fields(ExperimentConfig)} - {"radar", "pairs", "corner", "xi"}


def config_from_dict(data: Optional[dict]) -> ExperimentConfig:
    data = data or {}
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    unknown = set(data) - {"radar", "antennas", "grid", "experiment"}
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    kwargs = {}

    radar = data.get("radar") or {}
    try:
        base = RadarConfig.reference()
        kwargs["radar"] = RadarConfig(
            f0=float(radar.get("f0", base.f0)),
            B=float(radar.get("B", base.B)),
            Ts=float(radar.get("Ts", base.Ts)),
            Ms=int(radar.get("Ms", base.Ms)),
            Mr=int(radar.get("Mr", base.Mr)),
            c=float(radar.get("c", base.c)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"radar: {exc}") from exc

    if "antennas" in data:
        try:
            kwargs["pairs"] = tuple(
                BistaticPair(_floats(a["tx"], "tx", 2), _floats(a["rx"], "rx", 2)) for a in data["antennas"]
            )
        except (KeyError, TypeError) as exc:
            raise ConfigError("antennas: each entry needs 'tx' and 'rx' points") from exc

    grid = data.get("grid") or {}
    if "corner" in grid:
        kwargs["corner"] = _floats(grid["corner"], "grid.corner", 2)
    if "xi" in grid:
        kwargs["xi"] = _ints(_listify(grid["xi"]), "grid.xi")

    exp = data.get("experiment") or {}
    unknown = set(exp) - _EXPERIMENT_KEYS
    if unknown:
        raise ConfigError(f"unknown experiment keys: {sorted(unknown)}")
    for key, value in exp.items():
        if key in ("k", "nit"):
            kwargs[key] = _ints(_listify(value), key)
        elif key in ("snr_db", "lambdas"):
            kwargs[key] = _floats(_listify(value), key)
        elif key in ("map_position", "map_velocity"):
            kwargs[key] = _floats(value, key, 2)
        elif key == "algorithms":
            kwargs[key] = tuple(str(a) for a in _listify(value))
        elif key == "out":
            kwargs[key] = Path(value)
        else:
            try:
                kwargs[key] = int(value)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{key}: expected an integer, got {value!r}") from exc
    try:
        return ExperimentConfig(**kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _listify(value):
    return value if isinstance(value, (list, tuple)) else [value]


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    return config_from_dict(data)


def dump_config(cfg: ExperimentConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=False)
