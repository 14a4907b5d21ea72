"""Balls and annuli centred at the origin: the two shipped C^{1,1} domains."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rng import RngStream


class DomainError(ValueError):
    pass


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


@dataclass(frozen=True)
class Domain:
    """``kind`` is ``"ball"`` (radii = (r,)) or ``"annulus"`` (radii = (r1, r2))."""

    kind: str
    dimension: int
    radii: tuple

    def __post_init__(self) -> None:
        if self.dimension < 2 or int(self.dimension) != self.dimension:
            raise DomainError("domain dimension must be an integer >= 2")
        object.__setattr__(self, "radii", tuple(float(r) for r in self.radii))
        if self.kind == "ball":
            if len(self.radii) != 1 or not self.radii[0] > 0:
                raise DomainError("ball needs one radius r > 0")
        elif self.kind == "annulus":
            if len(self.radii) != 2:
                raise DomainError("annulus needs radii (r1, r2)")
            r1, r2 = self.radii
            if not 0 < r1 < r2:
                raise DomainError(f"annulus needs 0 < r1 < r2, got r1={r1}, r2={r2}")
        else:
            raise DomainError(f"unknown domain kind {self.kind!r}")

    @property
    def inner(self) -> float:
        return self.radii[0] if self.kind == "annulus" else 0.0

    @property
    def outer(self) -> float:
        return self.radii[-1]

    @property
    def volume(self) -> float:
        return unit_ball_volume(self.dimension) * (self.outer ** self.dimension - self.inner ** self.dimension)

    @property
    def perimeter(self) -> float:
        d = self.dimension
        p = self.outer ** (d - 1)
        if self.kind == "annulus":
            p += self.inner ** (d - 1)
        return d * unit_ball_volume(d) * p

    @property
    def R(self) -> float:
        """Radius of the interior and exterior balls touching every boundary point."""
        if self.kind == "ball":
            return self.outer
        return min(self.inner, (self.outer - self.inner) / 2)

    def contains(self, x) -> np.ndarray | bool:
        r = np.linalg.norm(np.asarray(x, dtype=float), axis=-1)
        res = (r < self.outer) & (r > self.inner) if self.kind == "annulus" else r < self.outer
        return bool(res) if np.ndim(res) == 0 else res

    def dist_to_boundary(self, x):
        """Distance to the boundary, defined on all of R^d."""
        r = np.linalg.norm(np.asarray(x, dtype=float), axis=-1)
        dist = np.abs(self.outer - r)
        if self.kind == "annulus":
            dist = np.minimum(dist, np.abs(r - self.inner))
        return float(dist) if np.ndim(dist) == 0 else dist

    def layer_radii(self, a: float) -> tuple[float, float]:
        """Radii (inner, outer) of the points at depth >= a."""
        self._check_depth(a)
        return (self.inner + a if self.kind == "annulus" else 0.0), self.outer - a

    def layer_bounds(self, a: float) -> tuple[float, float]:
        """Exact (volume, perimeter) of the set of points at depth >= a."""
        lo, hi = self.layer_radii(a)
        d = self.dimension
        vol = unit_ball_volume(d) * (hi ** d - lo ** d)
        per = d * unit_ball_volume(d) * (hi ** (d - 1) + (lo ** (d - 1) if self.kind == "annulus" else 0.0))
        return vol, per

    def perimeter_bracket(self, a: float) -> tuple[float, float]:
        """Lower and upper bounds on the depth-a perimeter from the R-ball condition."""
        self._check_depth(a)
        q = (self.R - a) / self.R
        return self.perimeter * q ** (self.dimension - 1), self.perimeter / q ** (self.dimension - 1)

    def _check_depth(self, a: float) -> None:
        if not 0 < a <= self.R / 2:
            raise DomainError(f"layer depth a={a} outside (0, R/2] with R={self.R}")

    def shells(self, a: float) -> dict[str, np.ndarray]:
        """Radial shells (lo, hi) of the interior part (depth >= a) and the boundary layer."""
        lo, hi = self.layer_radii(a)
        interior = np.array([[lo, hi]])
        if self.kind == "annulus":
            layer = np.array([[self.inner, lo], [hi, self.outer]])
        else:
            layer = np.array([[hi, self.outer]])
        return {"interior": interior, "layer": layer}

    def sample_uniform(self, rng: RngStream, n: int | None = None) -> np.ndarray:
        """Uniform points in the domain: box rejection for balls, radial inversion for annuli."""
        m = 1 if n is None else n
        d = self.dimension
        out = np.empty((0, d))
        while out.shape[0] < m:
            k = max(2 * (m - out.shape[0]), 16)
            if self.kind == "ball":
                cand = (2 * rng.uniform(k * d).reshape(k, d) - 1) * self.outer
            else:
                u = rng.uniform(k)
                rad = (self.inner ** d + u * (self.outer ** d - self.inner ** d)) ** (1 / d)
                z = rng.normal(k * d).reshape(k, d)
                cand = z / np.linalg.norm(z, axis=1, keepdims=True) * rad[:, None]
            # the annulus test only rejects rounding casualties on the boundary
            out = np.vstack([out, cand[self.contains(cand)]])
        out = out[:m]
        return out[0] if n is None else out


def ball(r: float = 1.0, d: int = 2) -> Domain:
    return Domain("ball", d, (r,))


def annulus(r1: float, r2: float, d: int = 2) -> Domain:
    return Domain("annulus", d, (r1, r2))
