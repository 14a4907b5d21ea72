"""Catalogue of isotropic Lévy processes with closed-form radial exponents.

Every entry is a subordinate Brownian motion ``W_{S_t}`` (``W`` with coordinate
variance ``2t``), so ``psi(b) = phi(b**2)`` with ``phi`` the Laplace exponent of
``S``.  The Brownian case is ``phi(lam) = lam``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy import integrate, special

KINDS = (
    "brownian",
    "stable",
    "mixed_stable",
    "relativistic_stable",
    "log_up",
    "log_down",
    "jump_diffusion",
    "truncated",
)

BISECTION_CAP = 1e300
BISECTION_MAX_ITER = 200


class InvalidSpecError(ValueError):
    pass


class InversionError(ArithmeticError):
    pass


@dataclass(frozen=True)
class LevyProcessSpec:
    """One catalogue entry.

    ``alpha`` is the index of regular variation for every kind except
    ``jump_diffusion``, where it is the index of the stable jump part and the
    exponent itself is regularly varying with index 2.  For ``truncated`` the
    process parameters live in ``base`` and jumps longer than ``cutoff`` are
    removed.
    """

    kind: str
    alpha: float = 2.0
    beta: float = 0.0
    m: float = 1.0
    gaussian_coefficient: float = 0.0
    dimension: int = 2
    base: Optional["LevyProcessSpec"] = None
    cutoff: float = 1.0

    def __post_init__(self) -> None:
        validate(self)

    @property
    def rv_index(self) -> float:
        if self.kind == "truncated":
            return self.base.rv_index
        if self.kind in ("brownian", "jump_diffusion"):
            return 2.0
        return self.alpha

    @property
    def scaling_spec(self) -> "LevyProcessSpec":
        """Spec whose exponent sets the small-time scale (truncation is ignored)."""
        return self.base.scaling_spec if self.kind == "truncated" else self

    def with_dimension(self, d: int) -> "LevyProcessSpec":
        if self.kind == "truncated":
            return replace(self, dimension=d, base=self.base.with_dimension(d))
        return replace(self, dimension=d)


def brownian(d: int = 2) -> LevyProcessSpec:
    return LevyProcessSpec("brownian", alpha=2.0, dimension=d)


def stable(alpha: float, d: int = 2) -> LevyProcessSpec:
    return LevyProcessSpec("stable", alpha=alpha, dimension=d)


def truncate(base: LevyProcessSpec, cutoff: float = 1.0) -> LevyProcessSpec:
    return LevyProcessSpec("truncated", alpha=base.alpha, dimension=base.dimension, base=base, cutoff=cutoff)


def validate(spec: LevyProcessSpec) -> None:
    k, a, b = spec.kind, spec.alpha, spec.beta
    if k not in KINDS:
        raise InvalidSpecError(f"unknown process kind {k!r}")
    if int(spec.dimension) != spec.dimension or spec.dimension < 1:
        raise InvalidSpecError("dimension must be an integer >= 1")
    if k == "truncated":
        if spec.base is None:
            raise InvalidSpecError("truncated spec needs a base spec")
        if spec.base.kind == "truncated":
            raise InvalidSpecError("nested truncation is not supported")
        if spec.base.dimension != spec.dimension:
            raise InvalidSpecError("truncated spec and base disagree on dimension")
        if not spec.cutoff > 0:
            raise InvalidSpecError("cutoff must be > 0")
        return
    if k == "brownian":
        if a != 2.0:
            raise InvalidSpecError("brownian motion has alpha = 2")
        return
    # E[sup] of the limiting stable process is finite iff alpha in (1, 2]
    if not 1.0 < a <= 2.0:
        raise InvalidSpecError(f"alpha={a} outside (1, 2]: the limit constant is finite iff alpha in (1, 2]")
    if k in ("stable", "mixed_stable", "relativistic_stable", "log_up", "log_down", "jump_diffusion") and a == 2.0 \
            and k != "stable":
        raise InvalidSpecError(f"{k} requires alpha < 2")
    if k == "mixed_stable" and not 0.0 < b < a:
        raise InvalidSpecError("mixed_stable requires 0 < beta < alpha")
    if k == "log_up" and not 0.0 < b < 2.0 - a:
        raise InvalidSpecError("log_up requires 0 < beta < 2 - alpha")
    if k == "log_down" and not 0.0 < b < a:
        raise InvalidSpecError("log_down requires 0 < beta < alpha")
    if k == "relativistic_stable" and not spec.m > 0:
        raise InvalidSpecError("relativistic_stable requires m > 0")
    if k == "jump_diffusion" and not spec.gaussian_coefficient > 0:
        raise InvalidSpecError("jump_diffusion requires gaussian_coefficient > 0")


def laplace_exponent(spec: LevyProcessSpec, lam):
    """Laplace exponent phi of the subordinator, so that psi(b) = phi(b**2)."""
    lam = np.asarray(lam, dtype=float)
    k, a, b = spec.kind, spec.alpha, spec.beta
    if k == "truncated":
        raise InvalidSpecError("truncated specs have no subordinator representation")
    if k == "brownian":
        return lam * 1.0
    if k == "stable":
        return lam ** (a / 2)
    if k == "mixed_stable":
        return lam ** (a / 2) + lam ** (b / 2)
    if k == "relativistic_stable":
        return (lam + spec.m ** (2 / a)) ** (a / 2) - spec.m
    if k == "log_up":
        return lam ** (a / 2) * np.log1p(lam) ** (b / 2)
    if k == "log_down":
        with np.errstate(divide="ignore", invalid="ignore"):
            out = lam ** (a / 2) * np.log1p(lam) ** (-b / 2)
        return np.where(lam > 0, out, 0.0)
    if k == "jump_diffusion":
        return spec.gaussian_coefficient * lam + lam ** (a / 2)
    raise InvalidSpecError(k)


def eval_psi(spec: LevyProcessSpec, b):
    """Radial characteristic exponent psi(b), b >= 0.

    Truncated specs return their base exponent: the small-time scale and the
    limit constant are those of the base process.
    """
    b_arr = np.asarray(b, dtype=float)
    if np.any(b_arr < 0) or np.any(np.isnan(b_arr)):
        raise InvalidSpecError("radial frequency must be >= 0")
    out = laplace_exponent(spec.scaling_spec, b_arr * b_arr)
    return float(out) if np.ndim(out) == 0 else out


def inverse_psi(spec: LevyProcessSpec, y: float) -> float:
    """Solve psi(b) = y by bisection with a doubling bracket."""
    if not y > 0:
        raise InversionError(f"inverse_psi needs y > 0, got {y}")
    lo, hi = 0.0, 1.0
    while eval_psi(spec, hi) < y:
        lo, hi = hi, 2.0 * hi
        if hi > BISECTION_CAP:
            raise InversionError(f"no bracket for psi(b) = {y} below {BISECTION_CAP:g}")
    for _ in range(BISECTION_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if eval_psi(spec, mid) < y:
            lo = mid
        else:
            hi = mid
    # pick the endpoint with the smaller residual
    return lo if abs(eval_psi(spec, lo) - y) < abs(eval_psi(spec, hi) - y) else hi


def rv_index_probe(spec: LevyProcessSpec, y: float, x: float) -> float:
    """Local regular-variation index log(psi(xy)/psi(y)) / log(x)."""
    if x <= 0 or x == 1:
        raise ValueError("ratio x must be positive and different from 1")
    return math.log(eval_psi(spec, x * y) / eval_psi(spec, y)) / math.log(x)


def time_scale(spec: LevyProcessSpec, t: float) -> float:
    """The heat-loss scale 1/psi^{-1}(1/t)."""
    return 1.0 / inverse_psi(spec.scaling_spec, 1.0 / t)


# --- Lévy measures ----------------------------------------------------------

def stable_levy_constant(alpha: float, d: int) -> float:
    """c with nu(dy) = c |y|^{-d-alpha} dy for psi(xi) = |xi|^alpha in R^d."""
    return (alpha * 2 ** (alpha - 1) * math.gamma((d + alpha) / 2)
            / (math.pi ** (d / 2) * math.gamma(1 - alpha / 2)))


def subordinator_density(spec: LevyProcessSpec, s):
    """Lévy density of the subordinator for the closed-form (stable-type) kinds."""
    s = np.asarray(s, dtype=float)
    k, a = spec.kind, spec.alpha

    def st(rho):
        return rho / math.gamma(1 - rho) * s ** (-1 - rho)

    if k in ("stable", "jump_diffusion"):
        return st(a / 2)
    if k == "mixed_stable":
        return st(a / 2) + st(spec.beta / 2)
    if k == "relativistic_stable":
        return st(a / 2) * np.exp(-spec.m ** (2 / a) * s)
    raise InvalidSpecError(f"no closed-form subordinator density for {k}")


def _levy_density_1d(spec: LevyProcessSpec, y: float) -> float:
    """One-dimensional Lévy density of a subordinate Brownian motion."""
    if spec.kind in ("stable", "jump_diffusion"):
        return stable_levy_constant(spec.alpha, 1) * abs(y) ** (-1 - spec.alpha)
    if spec.kind == "mixed_stable":
        return (stable_levy_constant(spec.alpha, 1) * abs(y) ** (-1 - spec.alpha)
                + stable_levy_constant(spec.beta, 1) * abs(y) ** (-1 - spec.beta))
    if spec.kind == "brownian":
        return 0.0

    def integrand(ls):
        s = math.exp(ls)
        g = math.exp(-y * y / (4 * s)) / math.sqrt(4 * math.pi * s)
        return g * float(subordinator_density_any(spec, s)) * s

    val, _ = integrate.quad(integrand, -60, 30, limit=400)
    return val


def subordinator_density_any(spec: LevyProcessSpec, s):
    if spec.kind in ("log_up", "log_down"):
        from .levy_tables import log_table
        return log_table(spec).density(s)
    return subordinator_density(spec, s)


def truncated_psi_1d(spec: LevyProcessSpec, xi: float) -> float:
    """Exact exponent of a truncated spec in one dimension.

    psi_trunc(xi) = psi_base(xi) - int_{|y| > cutoff} (1 - cos(xi y)) nu(dy).
    Independent of the sampler; used as the characteristic-function oracle.
    """
    if spec.kind != "truncated":
        return float(eval_psi(spec, abs(xi)))
    base, c = spec.base, spec.cutoff
    xi = abs(xi)
    if base.kind == "brownian" or math.isinf(c):
        return float(eval_psi(base, xi))
    if base.kind in ("stable", "jump_diffusion", "mixed_stable"):
        def tail(alpha):
            cst = stable_levy_constant(alpha, 1)
            # int_c^inf (1 - cos(xi y)) y^{-1-alpha} dy, cosine part by QAWF
            plain = c ** (-alpha) / alpha
            if xi == 0:
                return 0.0
            osc, _ = integrate.quad(lambda y: y ** (-1 - alpha), c, np.inf, weight="cos", wvar=xi, limlst=200)
            return 2 * cst * (plain - osc)
        removed = tail(base.alpha)
        if base.kind == "mixed_stable":
            removed += tail(base.beta)
    else:
        if xi == 0:
            return 0.0
        f = lambda y: _levy_density_1d(base, y)
        upper = 50.0 * c + 50.0 / max(xi, 1e-3)
        plain, _ = integrate.quad(f, c, upper, limit=400)
        osc, _ = integrate.quad(f, c, upper, weight="cos", wvar=xi, limit=400)
        removed = 2 * (plain - osc)
    return float(eval_psi(base, xi)) - removed


def subordinator_small_mean(spec: LevyProcessSpec, s_eps: float) -> float:
    """int_0^{s_eps} s pi(ds) for the closed-form kinds."""
    k, a = spec.kind, spec.alpha

    def st(rho):
        return rho / math.gamma(1 - rho) * s_eps ** (1 - rho) / (1 - rho)

    if k in ("stable", "jump_diffusion"):
        return st(a / 2)
    if k == "mixed_stable":
        return st(a / 2) + st(spec.beta / 2)
    if k == "relativistic_stable":
        rho, kap = a / 2, spec.m ** (2 / a)
        return rho / math.gamma(1 - rho) * kap ** (rho - 1) * special.gamma(1 - rho) * special.gammainc(1 - rho, kap * s_eps)
    raise InvalidSpecError(k)


def stable_tail_rate(rho: float, s: float) -> float:
    """pi((s, inf)) for the rho-stable subordinator with phi(lam) = lam**rho."""
    return s ** (-rho) / math.gamma(1 - rho)
