"""The limit constant E[sup_{s<=1} Y_s], the predicted heat loss and convergence diagnostics."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from . import catalogue as cat
from .geometry import Domain
from .oracle import read_fixture, tail_corrected
from .rng import experiment_id
from .sampling import nested_sups

BROWNIAN_MEAN_SUP = 2.0 / math.sqrt(math.pi)
SUP_LEVELS = (2 ** 10, 2 ** 12, 2 ** 14)
DEFAULT_SUP_PATHS = 50_000
TAIL_QUANTILE = 0.99


@dataclass(frozen=True)
class MeanSupValue:
    alpha: float
    value: float
    se: float
    method: str  # closed-form | extrapolated-MC | fixture


def _check_alpha(alpha: float) -> None:
    if not 1.0 < alpha <= 2.0:
        raise cat.InvalidSpecError(
            f"alpha={alpha}: E[sup Y] is finite iff alpha in (1, 2]; no limit constant outside that range")


def extrapolation_weights(x: np.ndarray) -> np.ndarray:
    """Weights w with sum(w * g) the least-squares intercept of g against x."""
    design = np.column_stack([np.ones_like(x), x])
    return np.linalg.pinv(design)[0]


def mean_sup_stable(alpha: float, budget: int | None = None, seed: int = 0, workers: int = 1,
                    method: str = "extrapolated-MC") -> MeanSupValue:
    """E[sup_{s<=1} Y_s] for the symmetric alpha-stable process with E[exp(i xi Y_1)] = exp(-|xi|^alpha).

    ``method`` is ``extrapolated-MC`` (nested grids 2^10, 2^12, 2^14 on shared
    paths, intercept in n^(-1/alpha)) or ``fixture`` (the frozen brute-force
    value).  alpha = 2 always returns 2/sqrt(pi).
    """
    _check_alpha(alpha)
    if alpha == 2.0:
        return MeanSupValue(2.0, BROWNIAN_MEAN_SUP, 0.0, "closed-form")
    if method == "fixture":
        rows = read_fixture()
        if alpha not in rows:
            raise KeyError(f"no frozen reference value for alpha={alpha}; available: {sorted(rows)}")
        r = rows[alpha]
        return MeanSupValue(alpha, r.value, r.se, "fixture")
    if method != "extrapolated-MC":
        raise ValueError(f"unknown method {method!r}")
    n_paths = budget or DEFAULT_SUP_PATHS
    n_fine = SUP_LEVELS[-1]
    strides = [n_fine // n for n in SUP_LEVELS]
    sups = nested_sups(cat.stable(alpha, 1), 1.0, n_fine, strides, n_paths, seed,
                       experiment_id(f"mean-sup:{alpha!r}"), workers)
    threshold = float(np.quantile(sups[:, -1], TAIL_QUANTILE))
    g = tail_corrected(sups, alpha, threshold)
    w = extrapolation_weights(np.asarray(SUP_LEVELS, dtype=float) ** (-1.0 / alpha))
    h = g @ w
    return MeanSupValue(alpha, float(h.mean()), float(h.std(ddof=1) / math.sqrt(n_paths)), "extrapolated-MC")


@functools.lru_cache(maxsize=None)
def limit_constant(alpha: float) -> MeanSupValue:
    """Best available E[sup Y]: closed form, else the frozen fixture, else a fresh extrapolated run."""
    _check_alpha(alpha)
    if alpha == 2.0:
        return mean_sup_stable(2.0)
    try:
        return mean_sup_stable(alpha, method="fixture")
    except (KeyError, FileNotFoundError):
        return mean_sup_stable(alpha)


def predicted_heat_loss(spec: cat.LevyProcessSpec, domain: Domain, t: float,
                        constant: MeanSupValue | None = None) -> float:
    """|boundary| * E[sup Y] / psi^{-1}(1/t), the first-order heat loss."""
    if not t > 0:
        raise ValueError("t must be > 0")
    c = constant or limit_constant(spec.rv_index)
    return domain.perimeter * c.value * cat.time_scale(spec, t)


def in_asymptotic_regime(spec: cat.LevyProcessSpec, domain: Domain, t: float) -> bool:
    """True when the heat-loss length scale is at most a quarter of the ball radius R."""
    return cat.time_scale(spec, t) <= domain.R / 4


@dataclass(frozen=True)
class Diagnostics:
    rel_gap: np.ndarray
    slope: float  # of log|gap| against log t; nan when undefined
    trend: str  # converged | decreasing | not-decreasing
    regime: np.ndarray  # per row: inside the asymptotic regime


def convergence_diagnostics(t, gap, gap_se=None, regime=None, z: float = 2.0) -> Diagnostics:
    """Trend of the relative gap as t decreases.

    ``decreasing`` means |gap| at the smallest t is below |gap| at the largest
    and no step toward smaller t increases |gap| by more than ``z`` combined
    standard errors.
    """
    t = np.asarray(t, dtype=float)
    gap = np.asarray(gap, dtype=float)
    if t.size < 3:
        raise ValueError("convergence diagnostics need at least 3 rows")
    se = np.zeros_like(gap) if gap_se is None else np.asarray(gap_se, dtype=float)
    reg = np.ones(t.size, dtype=bool) if regime is None else np.asarray(regime, dtype=bool)
    nz = gap != 0
    if not nz.any():
        return Diagnostics(gap, float("nan"), "converged", reg)
    slope = float("nan")
    if nz.sum() >= 2:
        slope = float(np.polyfit(np.log(t[nz]), np.log(np.abs(gap[nz])), 1)[0])
    order = np.argsort(-t)
    g, s = np.abs(gap[order]), se[order]
    steps_ok = all(g[k + 1] - g[k] < z * math.hypot(s[k], s[k + 1]) or g[k + 1] < g[k] for k in range(g.size - 1))
    trend = "decreasing" if steps_ok and g[-1] < g[0] else "not-decreasing"
    return Diagnostics(gap, slope, trend, reg)
