"""Subordinator Lévy measures recovered numerically from the Laplace exponent.

Used for the log-modulated exponents, whose subordinators have no elementary
marginal sampler.  ``s * pi(s)`` is the inverse Laplace transform of
``phi'(lam)``; it is tabulated on a log grid by Talbot inversion, then
integrated into the tail ``pi((s, inf))`` and the truncated first moment.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import mpmath as mp
import numpy as np

S_MIN, S_MAX, N_GRID = 1e-16, 1e8, 361


@dataclass(frozen=True)
class LevyTable:
    log_s: np.ndarray       # grid of log(s)
    s_density: np.ndarray   # s * pi(s) on the grid
    log_tail: np.ndarray    # log pi((s, inf)), strictly decreasing
    small_moment: np.ndarray  # int_0^s u pi(du)

    def density(self, s):
        ls = np.log(np.asarray(s, dtype=float))
        return np.interp(ls, self.log_s, self.s_density) / np.exp(ls)

    def tail(self, s) -> float:
        return float(np.exp(np.interp(np.log(s), self.log_s, self.log_tail)))

    def threshold_for_rate(self, rate: float) -> float:
        """s with pi((s, inf)) = rate."""
        lr = np.log(rate)
        if lr > self.log_tail[0]:
            raise ValueError("jump rate beyond tabulated range; raise the horizon or lower the jump budget")
        # log_tail decreasing -> interpolate on reversed arrays
        return float(np.exp(np.interp(lr, self.log_tail[::-1], self.log_s[::-1])))

    def small_mean(self, s: float) -> float:
        return float(np.interp(np.log(s), self.log_s, self.small_moment))


def _phi_prime(kind: str, alpha: float, beta: float):
    a = mp.mpf(alpha) / 2
    b = mp.mpf(beta) / 2 if kind == "log_up" else -mp.mpf(beta) / 2

    def f(lam):
        L = mp.log1p(lam)
        return a * lam ** (a - 1) * L ** b + lam ** a * b * L ** (b - 1) / (1 + lam)

    return f, float(a), float(a + b)


@lru_cache(maxsize=16)
def _build(kind: str, alpha: float, beta: float) -> LevyTable:
    f, small_index, large_index = _phi_prime(kind, alpha, beta)
    log_s = np.linspace(np.log(S_MIN), np.log(S_MAX), N_GRID)
    with mp.workdps(20):
        g = np.array([float(mp.invertlaplace(f, mp.mpf(float(np.exp(x))), method="talbot")) for x in log_s])
    if np.any(g <= 0) or not np.all(np.isfinite(g)):
        raise ArithmeticError(f"Lévy density inversion failed for {kind}(alpha={alpha}, beta={beta})")
    s = np.exp(log_s)
    dx = np.diff(log_s)
    # tail: int_s^inf pi(u) du = int_{log s}^inf g(x) dx; power-law closure beyond S_MAX
    seg = 0.5 * (g[1:] + g[:-1]) * dx
    tail = np.empty_like(g)
    tail[-1] = g[-1] / large_index
    tail[:-1] = tail[-1] + np.cumsum(seg[::-1])[::-1]
    # first moment: int_0^s u pi(u) du = int_{-inf}^{log s} e^x g(x) dx; closure below S_MIN
    h = s * g
    mom = np.empty_like(g)
    mom[0] = h[0] / (1 - small_index)
    mom[1:] = mom[0] + np.cumsum(0.5 * (h[1:] + h[:-1]) * dx)
    return LevyTable(log_s, g, np.log(tail), mom)


def log_table(spec) -> LevyTable:
    return _build(spec.kind, float(spec.alpha), float(spec.beta))
