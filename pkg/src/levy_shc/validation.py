"""Quick invariant suite behind the ``validate`` command."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

from . import catalogue as cat
from . import geometry as geo
from .asymptotics import BROWNIAN_MEAN_SUP, mean_sup_stable, predicted_heat_loss
from .heat_content import halfspace_crossing_prob, sandwich_experiment, survival_curve
from .sampling import nested_sups, sample_increments


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'} {self.name} {self.detail}"


def catalogue_specs(d: int = 1) -> list[cat.LevyProcessSpec]:
    return [cat.brownian(d), cat.stable(1.5, d), cat.stable(2.0, d),
            cat.LevyProcessSpec("mixed_stable", alpha=1.5, beta=0.8, dimension=d),
            cat.LevyProcessSpec("relativistic_stable", alpha=1.5, m=1.0, dimension=d),
            cat.LevyProcessSpec("log_up", alpha=1.5, beta=0.3, dimension=d),
            cat.LevyProcessSpec("log_down", alpha=1.5, beta=0.5, dimension=d),
            cat.LevyProcessSpec("jump_diffusion", alpha=1.5, gaussian_coefficient=1.0, dimension=d),
            cat.truncate(cat.stable(1.5, d))]


def _psi_roundtrip() -> Check:
    worst = 0.0
    for spec in catalogue_specs():
        for y in np.geomspace(cat.eval_psi(spec, 1e-3), cat.eval_psi(spec, 1e6), 25):
            worst = max(worst, abs(cat.eval_psi(spec, cat.inverse_psi(spec, y)) - y) / y)
    return Check("psi_roundtrip", worst <= 1e-9, f"max_rel_residual={worst:.3g}")


def _psi_shape() -> Check:
    grid = np.concatenate([[0.0], np.geomspace(1e-6, 1e6, 10_000)])
    ok = True
    for spec in catalogue_specs():
        v = cat.eval_psi(spec, grid)
        ok &= bool(v[0] == 0 and np.all(v >= 0) and np.all(np.diff(v) >= 0))
    return Check("psi_nonneg_monotone_zero_at_origin", ok, "")


def _rv_probe() -> Check:
    worst = 0.0
    for spec in catalogue_specs():
        for x in (2.0, 4.0):
            worst = max(worst, abs(cat.rv_index_probe(spec, 1e8, x) - spec.rv_index) / spec.rv_index)
    return Check("rv_index_probe", worst <= 0.03, f"max_rel_dev={worst:.3g}")


def _geometry(seed: int) -> Check:
    from .rng import RngStream
    ok = True
    for dom in (geo.ball(1.0), geo.annulus(1.0, 2.0), geo.ball(2.0, 3)):
        for a in np.linspace(dom.R / 40, dom.R / 2, 20):
            _, per = dom.layer_bounds(a)
            lo, hi = dom.perimeter_bracket(a)
            ok &= lo - 1e-12 <= per <= hi + 1e-12
        pts = dom.sample_uniform(RngStream(seed, 1), 20_000)
        ok &= bool(np.all(dom.contains(pts)))
    return Check("geometry_layers_and_sampling", bool(ok), "")


def _ecf(seed: int) -> Check:
    worst = 0.0
    for spec in (cat.brownian(1), cat.stable(1.5, 1), cat.truncate(cat.stable(1.5, 1))):
        x = sample_increments(spec, 1.0, 200_000, seed, 11, jump_budget=16)[:, 0]
        for xi in (0.5, 1.0, 2.0):
            c = np.cos(xi * x)
            z = abs(c.mean() - math.exp(-cat.truncated_psi_1d(spec, xi))) / (c.std() / math.sqrt(x.size))
            worst = max(worst, z)
    return Check("ecf_matches_exponent", worst <= 3.5, f"max_z={worst:.2f}")


def _determinism(seed: int) -> Check:
    spec = cat.stable(1.5, 2)
    a = sample_increments(spec, 0.1, 5000, seed, 3, workers=1, )
    b = sample_increments(spec, 0.1, 5000, seed, 3, workers=4)
    return Check("bit_identical_streams", bool(np.array_equal(a, b)), "")


def _sup_monotone(seed: int) -> Check:
    s = nested_sups(cat.stable(1.5, 1), 1.0, 1024, [16, 4, 1], 2000, seed, 5)
    return Check("nested_grid_sup_monotone", bool(np.all(np.diff(s, axis=1) >= 0)), "")


def _mean_sup_closed_form() -> Check:
    v = mean_sup_stable(2.0).value
    return Check("mean_sup_alpha2_closed_form", abs(v - 2 / math.sqrt(math.pi)) <= 1e-12, f"value={v:.15g}")


def _sandwich(seed: int) -> Check:
    rows = sandwich_experiment(cat.stable(1.5, 2), 1.0, 0.5, [1e-2], 2000, k=16, seed=seed)
    return Check("sandwich_pathwise_ordering", all(r.ordered for r in rows), "")


def _time_monotone(seed: int) -> Check:
    q = survival_curve(cat.stable(1.5, 2), geo.ball(1.0), [0.0025, 0.005, 0.01], 4000, 64, seed)
    return Check("heat_content_time_monotone", bool(np.all(np.diff(q) <= 0)), f"q={np.round(q, 5).tolist()}")


def _brownian_crossing(seed: int) -> Check:
    cp = halfspace_crossing_prob(cat.brownian(1), [1.0], 0.25, 1024, 40_000, seed)
    exact = special.erfc(1.0)
    z = abs(cp.p[0] - exact) / cp.se[0]
    return Check("brownian_halfspace_reflection", z <= 3, f"p={cp.p[0]:.5f} exact={exact:.5f} z={z:.2f}")


def _homogeneity() -> Check:
    spec = cat.brownian(2)
    p1 = predicted_heat_loss(spec, geo.ball(1.0), 1e-4)
    p2 = predicted_heat_loss(spec, geo.ball(2.0), 1e-4)
    return Check("prediction_linear_in_perimeter", p2 == 2 * p1 and abs(p1 - 4 * math.sqrt(math.pi) * 1e-2) < 1e-15,
                 f"{p1:.10g}")


def run_invariants(seed: int = 0) -> list[Check]:
    checks: list[Callable[[], Check]] = [
        _psi_roundtrip, _psi_shape, _rv_probe, lambda: _geometry(seed), lambda: _ecf(seed),
        lambda: _determinism(seed), lambda: _sup_monotone(seed), _mean_sup_closed_form,
        lambda: _sandwich(seed), lambda: _time_monotone(seed), lambda: _brownian_crossing(seed), _homogeneity]
    out = []
    for fn in checks:
        try:
            out.append(fn())
        except Exception as exc:  # report, keep going
            out.append(Check(getattr(fn, "__name__", "check"), False, f"error={exc!r}"))
    return out


__all__ = ["Check", "run_invariants", "catalogue_specs", "BROWNIAN_MEAN_SUP"]
