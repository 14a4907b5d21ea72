"""Brute-force reference values of E[sup_{s<=1} Y_s] for the 1-d symmetric stable process.

Deliberately independent of the production samplers: numpy's PCG64 generator,
vectorised subordination (Kanter positive stable times a Gaussian), a single
fine grid and no extrapolation.  Used once to freeze ``data/mean_sup_fixture.csv``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

FIXTURE_PATH = Path(__file__).with_name("data") / "mean_sup_fixture.csv"
FIXTURE_FIELDS = ("alpha", "value", "se", "n_paths", "n_steps", "seed")


@dataclass(frozen=True)
class FixtureRow:
    alpha: float
    value: float
    se: float
    n_paths: int
    n_steps: int
    seed: int


def tail_corrected(sups: np.ndarray, alpha: float, threshold: float) -> np.ndarray:
    """Per-path values whose mean estimates E[sup] with a Pareto tail above ``threshold``.

    ``min(Y, T) + 1{Y > T} T / (alpha - 1)`` has the mean of ``Y`` when the tail
    beyond ``T`` is exactly ``c u^-alpha``, and a finite variance.
    """
    sups = np.asarray(sups, dtype=float)
    return np.minimum(sups, threshold) + (sups > threshold) * (threshold / (alpha - 1.0))


def _kanter(rho: float, gen: np.random.Generator, shape) -> np.ndarray:
    theta = np.pi * gen.random(shape)
    e = gen.standard_exponential(shape)
    a = (np.sin(rho * theta) ** rho * np.sin((1 - rho) * theta) ** (1 - rho) / np.sin(theta)) ** (1 / (1 - rho))
    return (a / e) ** ((1 - rho) / rho)


def grid_sups(alpha: float, n_paths: int, n_steps: int, gen: np.random.Generator, chunk: int = 32) -> np.ndarray:
    """Grid maxima over [0, 1] of ``n_paths`` skeletons with E[exp(i xi Y_1)] = exp(-|xi|^alpha)."""
    dt = 1.0 / n_steps
    out = np.empty(n_paths)
    for i0 in range(0, n_paths, chunk):
        m = min(chunk, n_paths - i0)
        if alpha == 2.0:
            s = np.full((m, n_steps), dt)
        else:
            s = dt ** (2 / alpha) * _kanter(alpha / 2, gen, (m, n_steps))
        steps = np.sqrt(2 * s) * gen.standard_normal((m, n_steps))
        out[i0:i0 + m] = np.maximum(np.cumsum(steps, axis=1).max(axis=1), 0.0)
    return out


def brute_force(alpha: float, n_paths: int, n_steps: int, seed: int, quantile: float = 0.99) -> FixtureRow:
    gen = np.random.Generator(np.random.PCG64(seed))
    sups = grid_sups(alpha, n_paths, n_steps, gen)
    g = tail_corrected(sups, alpha, float(np.quantile(sups, quantile)))
    return FixtureRow(alpha, float(g.mean()), float(g.std(ddof=1) / math.sqrt(n_paths)), n_paths, n_steps, seed)


def write_fixture(rows, path: Path = FIXTURE_PATH) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FIXTURE_FIELDS)
        for r in rows:
            w.writerow([repr(r.alpha), "%.17g" % r.value, "%.17g" % r.se, r.n_paths, r.n_steps, r.seed])


def read_fixture(path: Path = FIXTURE_PATH) -> dict[float, FixtureRow]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {float(r["alpha"]): FixtureRow(float(r["alpha"]), float(r["value"]), float(r["se"]),
                                          int(r["n_paths"]), int(r["n_steps"]), int(r["seed"])) for r in rows}
