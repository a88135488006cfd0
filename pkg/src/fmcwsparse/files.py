"""Scene files, cube/dictionary CSV dumps and solution CSVs.

Cube CSV layout: comment header lines ``# Ms=..``, ``# Mr=..``, ``# Q=..``,
``# model=..``, ``# seed=..``, then a ``re,im`` header and one row per
sample with ``m_s`` fastest, then ``m_r``, then pair ``q``.

Scene files are YAML::

    model: complete          # or simplified
    noise: {sigma2: 0.0, seed: 0}    # or {snr_db: 10, seed: 0}
    targets:
      - position: [8.5, -1.7]
        velocity: [6, 6]
        alphas: [[1, 0], [1, 0], [1, 0], [1, 0]]   # optional (re, im) per pair
"""

import csv
from pathlib import Path

import numpy as np
import yaml

from .errors import ConfigError
from .geometry import GridPair, Target
from .signals import MODELS, NoiseSpec, db_to_linear, sigma2_for_snr


def load_scene(path, Q: int):
    """Returns ``(targets, noise, model)``."""
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh) or {}
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read scene {path}: {exc}") from exc
    model = data.get("model", "complete")
    if model not in MODELS:
        raise ConfigError(f"scene model must be one of {MODELS}")
    targets = []
    for i, t in enumerate(data.get("targets") or []):
        try:
            alphas = t.get("alphas")
            if alphas is None:
                alphas = np.ones(Q, dtype=complex)
            else:
                alphas = np.array([complex(float(a[0]), float(a[1])) for a in alphas])
            if len(alphas) != Q:
                raise ConfigError(f"target {i}: {len(alphas)} alphas for {Q} pairs")
            targets.append(Target(tuple(map(float, t["position"])), tuple(map(float, t["velocity"])), alphas))
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise ConfigError(f"target {i}: {exc}") from exc
    noise = data.get("noise") or {}
    seed = int(noise.get("seed", 0))
    if "snr_db" in noise:
        sigma2 = sigma2_for_snr(float(db_to_linear(float(noise["snr_db"]))))
    else:
        sigma2 = float(noise.get("sigma2", 0.0))
    return targets, NoiseSpec(sigma2, seed), model


def _write_columns(path, header: dict, columns: np.ndarray):
    """columns: (Q, L) complex, each written with its index fastest."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        for key, value in header.items():
            fh.write(f"# {key}={value}\n")
        writer = csv.writer(fh)
        writer.writerow(["re", "im"])
        flat = columns.reshape(-1)
        for z in flat:
            writer.writerow([repr(float(z.real)), repr(float(z.imag))])


def _read_columns(path):
    header = {}
    values = []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                header[key] = value
            elif line.strip() and not line.startswith("re"):
                re, im = line.split(",")
                values.append(complex(float(re), float(im)))
    return header, np.array(values, dtype=complex)


def write_cubes(path, cubes: np.ndarray, model: str = "complete", seed=None):
    Q, Ms, Mr = cubes.shape
    header = {"Ms": Ms, "Mr": Mr, "Q": Q, "model": model, "seed": seed}
    _write_columns(path, header, cubes.transpose(0, 2, 1))


def read_cubes(path):
    """Returns ``(cubes (Q, Ms, Mr), header)``."""
    header, values = _read_columns(path)
    try:
        Q, Ms, Mr = int(header["Q"]), int(header["Ms"]), int(header["Mr"])
    except KeyError as exc:
        raise ConfigError(f"{path}: cube header is missing {exc}") from exc
    if values.size != Q * Ms * Mr:
        raise ConfigError(f"{path}: expected {Q * Ms * Mr} samples, found {values.size}")
    return values.reshape(Q, Mr, Ms).transpose(0, 2, 1), header


def write_dictionary(path, matrices: np.ndarray, model: str = "complete"):
    """Dump materialized dictionaries (Q, Ms*Mr, N_joint), column by column."""
    Q, L, N = matrices.shape
    _write_columns(path, {"Q": Q, "length": L, "atoms": N, "model": model}, matrices.transpose(0, 2, 1))


def write_solution(path, solution, grids: GridPair):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fields = ["round", "n", "nd", "x", "y", "vx", "vy"]
    for q in range(solution.Q):
        fields += [f"coeff{q}_re", f"coeff{q}_im"]
    fields.append("residual_energy")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(fields)
        for k, rd in enumerate(solution.rounds):
            x, y = grids.loc_points[rd.n]
            vx, vy = grids.vel_points[rd.nd]
            row = [k, rd.n, rd.nd, repr(float(x)), repr(float(y)), repr(float(vx)), repr(float(vy))]
            for c in rd.increments:
                row += [repr(float(c.real)), repr(float(c.imag))]
            row.append(repr(rd.residual_energy))
            writer.writerow(row)
