"""Monte Carlo heat content, heat loss, and the boundary-layer experiments.

Survival is grid-monitored: a path survives when every skeleton point stays in
the domain.  Each estimate also records the same statistic on the half-resolution
grid (every second point) so a Richardson shift in n^(-1/alpha) can be reported
and used to flag under-resolved rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import catalogue as cat
from .asymptotics import MeanSupValue, convergence_diagnostics, Diagnostics, in_asymptotic_regime, limit_constant
from .geometry import Domain, DomainError
from .rng import experiment_id
from .sampling import exit_steps, nested_sups, sandwich_integrals

SCHEDULE_K = 64.0
SCHEDULE_GAMMA = 0.5
BOUNDARY_FRACTION = 0.8
LAYER_SCALES = 8.0
QUAD_NODES = 64
QUAD_STRETCH = 1e-4
QUAD_TOL = 0.005
DEFAULT_TOL = 0.05

CSV_FIELDS = ("t", "psi_inv", "q_hat", "q_se", "loss", "loss_se", "scaled_loss", "scaled_se", "target", "rel_gap",
              "n_paths", "n_steps", "flagged")


def step_schedule(t: float, k: float = SCHEDULE_K, gamma: float = SCHEDULE_GAMMA) -> int:
    """ceil(K t^-gamma), rounded up to an even count so the half grid is nested."""
    n = max(int(math.ceil(k * t ** (-gamma) - 1e-9)), 2)
    return n + (n % 2)


def richardson_factor(alpha: float) -> float:
    """1 / (2^(1/alpha) - 1): multiplies (fine - coarse) to give the extrapolated shift."""
    return 1.0 / (2.0 ** (1.0 / alpha) - 1.0)


def _label(*parts) -> int:
    return experiment_id("|".join(repr(p) for p in parts))


@dataclass(frozen=True)
class LayerPlan:
    a: float
    boundary_fraction: float = BOUNDARY_FRACTION

    def __post_init__(self) -> None:
        if not 0.0 < self.boundary_fraction < 1.0:
            raise ValueError("boundary fraction must lie in (0, 1)")

    @property
    def fractions(self) -> tuple[float, float]:
        return 1.0 - self.boundary_fraction, self.boundary_fraction


def default_layer_plan(spec: cat.LevyProcessSpec, domain: Domain, t_min: float) -> LayerPlan:
    return LayerPlan(min(domain.R / 2, LAYER_SCALES * cat.time_scale(spec, t_min)))


@dataclass(frozen=True)
class HeatContentEstimate:
    t: float
    q_hat: float
    q_se: float
    loss: float
    loss_se: float
    n_paths: int
    n_steps: int
    loss_coarse: float = float("nan")
    interior_loss: float = float("nan")
    interior_loss_se: float = float("nan")


@dataclass(frozen=True)
class _Stratum:
    name: str
    volume: float
    shells: np.ndarray
    n: int


def _strata(domain: Domain, n_paths: int, plan: LayerPlan | None) -> list[_Stratum]:
    if plan is None:
        return [_Stratum("all", domain.volume, np.array([[domain.inner, domain.outer]]), n_paths)]
    vol_in, _ = domain.layer_bounds(plan.a)
    sh = domain.shells(plan.a)
    n_b = int(round(plan.boundary_fraction * n_paths))
    n_b = min(max(n_b, 1), n_paths - 1)
    return [_Stratum("interior", vol_in, sh["interior"], n_paths - n_b),
            _Stratum("layer", domain.volume - vol_in, sh["layer"], n_b)]


def _exit_kind(domain: Domain) -> int:
    return 1 if domain.kind == "annulus" else 0


def estimate_Q(spec: cat.LevyProcessSpec, domain: Domain, t: float, n_paths: int, n_steps: int,
               layer_plan: LayerPlan | str | None = "auto", seed: int = 0, workers: int = 1,
               label: str = "Q") -> HeatContentEstimate:
    """Stratified estimate of Q_D(t) = int_D P_x(tau_D > t) dx.

    ``layer_plan="auto"`` uses the default depth for this t; ``None`` samples
    start points uniformly over the whole domain.
    """
    if not t > 0:
        raise ValueError("t must be > 0")
    if n_paths < 2 or n_steps < 1:
        raise ValueError("need n_paths >= 2 and n_steps >= 1")
    if spec.dimension != domain.dimension:
        raise DomainError(f"process dimension {spec.dimension} differs from domain dimension {domain.dimension}")
    if layer_plan == "auto":
        layer_plan = default_layer_plan(spec, domain, t)
    loss = loss_c = var = 0.0
    interior = (float("nan"), float("nan"))
    for st in _strata(domain, n_paths, layer_plan):
        ef, ec = exit_steps(spec, _exit_kind(domain), domain.inner, domain.outer, st.shells, t, n_steps, st.n,
                            seed, _label(label, st.name, t), workers)
        p = float(np.count_nonzero(ef <= n_steps)) / st.n
        pc = float(np.count_nonzero(ec <= n_steps)) / st.n
        loss += st.volume * p
        loss_c += st.volume * pc
        v = st.volume ** 2 * p * (1 - p) / st.n
        var += v
        if st.name == "interior":
            interior = (st.volume * p, math.sqrt(v))
    loss = min(max(loss, 0.0), domain.volume)
    q = domain.volume - loss
    se = math.sqrt(var)
    return HeatContentEstimate(t, q, se, domain.volume - q, se, n_paths, n_steps, loss_c, *interior)


def survival_curve(spec: cat.LevyProcessSpec, domain: Domain, times, n_paths: int, n_steps: int, seed: int = 0,
                   workers: int = 1) -> np.ndarray:
    """Unstratified Q estimates at several times from ONE set of skeletons.

    Every time must be a grid point of the ``n_steps`` grid on [0, max(times)],
    so the estimates are exactly nonincreasing in t.
    """
    times = np.asarray(times, dtype=float)
    t_end = float(times.max())
    idx = np.rint(times / t_end * n_steps).astype(np.int64)
    if np.any(np.abs(idx * t_end / n_steps - times) > 1e-9 * t_end):
        raise ValueError("every time must lie on the skeleton grid")
    ef, _ = exit_steps(spec, _exit_kind(domain), domain.inner, domain.outer,
                       np.array([[domain.inner, domain.outer]]), t_end, n_steps, n_paths, seed,
                       _label("survival", t_end, n_steps), workers)
    return np.array([domain.volume * np.count_nonzero(ef > m) / n_paths for m in idx])


@dataclass(frozen=True)
class InteriorRow:
    t: float
    loss: float
    loss_se: float
    ratio: float
    ratio_se: float
    n_paths: int
    n_steps: int


def interior_loss_experiment(spec: cat.LevyProcessSpec, domain: Domain, a: float, t_grid, n_paths: int,
                             k: float = SCHEDULE_K, gamma: float = SCHEDULE_GAMMA, seed: int = 0,
                             workers: int = 1) -> list[InteriorRow]:
    """int over the depth->=a part of P_x(tau_D <= t) dx, and its ratio to t."""
    vol, _ = domain.layer_bounds(a)
    shells = domain.shells(a)["interior"]
    rows = []
    for t in t_grid:
        n = step_schedule(t, k, gamma)
        ef, _ = exit_steps(spec, _exit_kind(domain), domain.inner, domain.outer, shells, t, n, n_paths, seed,
                           _label("interior", a, t), workers)
        p = float(np.count_nonzero(ef <= n)) / n_paths
        loss, se = vol * p, vol * math.sqrt(p * (1 - p) / n_paths)
        rows.append(InteriorRow(t, loss, se, loss / t, se / t, n_paths, n))
    return rows


# --- half-space and the ball sandwich ------------------------------------------

@dataclass(frozen=True)
class CrossingProb:
    u: np.ndarray
    p: np.ndarray  # extrapolated
    se: np.ndarray
    p_fine: np.ndarray
    p_coarse: np.ndarray


def halfspace_crossing_prob(spec: cat.LevyProcessSpec, u, t: float, n_steps: int, n_paths: int, seed: int = 0,
                            workers: int = 1) -> CrossingProb:
    """P(sup of the 1-d skeleton on [0, t] >= u), extrapolated from n and n/2 steps.

    By isotropy this is the probability of leaving the half-space
    {x_d > 0} before t when starting at height u.
    """
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if np.any(u <= 0):
        raise ValueError("start heights must be > 0")
    n = n_steps + (n_steps % 2)
    sups = nested_sups(spec, t, n, [1, 2], n_paths, seed, _label("halfspace", t, n), workers)
    r = richardson_factor(spec.rv_index)
    hit_f = sups[:, :1] >= u[None, :]
    hit_c = sups[:, 1:] >= u[None, :]
    h = hit_f + r * (hit_f.astype(float) - hit_c)
    return CrossingProb(u, h.mean(axis=0), h.std(axis=0, ddof=1) / math.sqrt(n_paths), hit_f.mean(axis=0),
                        hit_c.mean(axis=0))


def quadrature_grid(a: float, n_nodes: int = QUAD_NODES, stretch: float = QUAD_STRETCH):
    """Midpoint nodes and weights on (0, a) with cells growing geometrically away from 0."""
    k = np.arange(1, n_nodes + 1)
    edges = np.concatenate([[0.0], a * stretch ** ((n_nodes - k) / (n_nodes - 1))])
    return 0.5 * (edges[1:] + edges[:-1]), np.diff(edges)


@dataclass(frozen=True)
class IntegralRow:
    """psi^{-1}(1/t) * int_0^a P(exit before t from height u) du for one domain."""

    t: float
    psi_inv: float
    value: float
    se: float
    fine: float
    coarse: float
    doubled_nodes: float
    n_paths: int
    n_steps: int
    flagged: bool


def _integral_row(t, psi_inv, fine_a, coarse_a, fine_b, alpha, n_paths, n_steps, target, tol) -> IntegralRow:
    r = richardson_factor(alpha)
    h = psi_inv * (fine_a + r * (fine_a - coarse_a))
    value = float(h.mean())
    f, c, b = (psi_inv * float(x.mean()) for x in (fine_a, coarse_a, fine_b))
    quad_bad = abs(b - f) > QUAD_TOL * max(abs(f), 1e-300)
    rich_bad = abs(value - f) > tol / 2 * target
    return IntegralRow(t, psi_inv, value, float(h.std(ddof=1) / math.sqrt(n_paths)), f, c, b, n_paths, n_steps,
                       bool(quad_bad or rich_bad))


def halfspace_limit_experiment(spec: cat.LevyProcessSpec, a: float, t_grid, n_paths: int, k: float = SCHEDULE_K,
                               gamma: float = SCHEDULE_GAMMA, seed: int = 0, workers: int = 1,
                               tol: float = DEFAULT_TOL) -> list[IntegralRow]:
    """Rows should approach E[sup Y] as t decreases."""
    if not a > 0:
        raise ValueError("a must be > 0")
    nodes_a, w_a = quadrature_grid(a, QUAD_NODES)
    nodes_b, w_b = quadrature_grid(a, 2 * QUAD_NODES)
    target = limit_constant(spec.rv_index).value
    rows = []
    for t in t_grid:
        n = step_schedule(t, k, gamma)
        sups = nested_sups(spec, t, n, [1, 2], n_paths, seed, _label("halfspace-limit", t), workers)
        fa = (sups[:, :1] >= nodes_a[None, :]) @ w_a
        ca = (sups[:, 1:] >= nodes_a[None, :]) @ w_a
        fb = (sups[:, :1] >= nodes_b[None, :]) @ w_b
        psi_inv = cat.inverse_psi(spec.scaling_spec, 1.0 / t)
        rows.append(_integral_row(t, psi_inv, fa, ca, fb, spec.rv_index, n_paths, n, target, tol))
    return rows


DOMAINS = ("ball", "halfspace", "outer_ball")


@dataclass(frozen=True)
class SandwichRow:
    t: float
    rows: dict  # domain name -> IntegralRow
    gap_inner: float  # ball minus half-space, scaled
    gap_inner_se: float
    gap_outer: float  # half-space minus outer ball, scaled
    gap_outer_se: float
    ordered: bool  # per-path ordering on both grid levels and both node sets


def sandwich_experiment(spec: cat.LevyProcessSpec, R: float, a: float, t_grid, n_paths: int,
                        k: float = SCHEDULE_K, gamma: float = SCHEDULE_GAMMA, seed: int = 0, workers: int = 1,
                        tol: float = DEFAULT_TOL) -> list[SandwichRow]:
    """Exit integrals for B((0,R),R), the half-space and the complement of B((0,-R),R) on shared skeletons."""
    if not 0 < a <= R / 2:
        raise DomainError(f"a={a} outside (0, R/2] with R={R}")
    nodes_a, w_a = quadrature_grid(a, QUAD_NODES)
    nodes_b, w_b = quadrature_grid(a, 2 * QUAD_NODES)
    target = limit_constant(spec.rv_index).value
    r = richardson_factor(spec.rv_index)
    out = []
    for t in t_grid:
        n = step_schedule(t, k, gamma)
        vals = sandwich_integrals(spec, R, nodes_a, w_a, nodes_b, w_b, t, n, n_paths, seed,
                                  _label("sandwich", R, t), workers)
        psi_inv = cat.inverse_psi(spec.scaling_spec, 1.0 / t)
        rows = {name: _integral_row(t, psi_inv, vals[:, j, 0, 0], vals[:, j, 1, 0], vals[:, j, 0, 1],
                                    spec.rv_index, n_paths, n, target, tol) for j, name in enumerate(DOMAINS)}
        ext = psi_inv * (vals[:, :, 0, 0] + r * (vals[:, :, 0, 0] - vals[:, :, 1, 0]))
        g_in, g_out = ext[:, 0] - ext[:, 1], ext[:, 1] - ext[:, 2]
        ordered = bool(np.all(vals[:, 0] >= vals[:, 1]) and np.all(vals[:, 1] >= vals[:, 2]))
        sq = math.sqrt(n_paths)
        out.append(SandwichRow(t, rows, float(g_in.mean()), float(g_in.std(ddof=1) / sq), float(g_out.mean()),
                               float(g_out.std(ddof=1) / sq), ordered))
    return out


def ball_experiment(spec, R, a, t_grid, n_paths, **kw) -> list[IntegralRow]:
    return [row.rows["ball"] for row in sandwich_experiment(spec, R, a, t_grid, n_paths, **kw)]


def outer_ball_experiment(spec, R, a, t_grid, n_paths, **kw) -> list[IntegralRow]:
    return [row.rows["outer_ball"] for row in sandwich_experiment(spec, R, a, t_grid, n_paths, **kw)]


def cancellation_gap(spec, R, a, t_grid, n_paths, **kw) -> list[SandwichRow]:
    """Scaled (ball - half-space) and (half-space - outer ball) integrals; both tend to 0."""
    return sandwich_experiment(spec, R, a, t_grid, n_paths, **kw)


# --- theorem scan ---------------------------------------------------------------

@dataclass(frozen=True)
class ReportRow:
    t: float
    psi_inv: float
    q_hat: float
    q_se: float
    loss: float
    loss_se: float
    scaled_loss: float
    scaled_se: float
    target: float
    rel_gap: float
    n_paths: int
    n_steps: int
    flagged: bool
    richardson_shift: float = 0.0
    in_regime: bool = True
    interior_loss: float = float("nan")

    def csv_values(self) -> list:
        return [getattr(self, f) for f in CSV_FIELDS]


@dataclass
class AsymptoticReport:
    spec: cat.LevyProcessSpec
    domain: Domain
    constant: MeanSupValue
    rows: list
    diagnostics: Diagnostics | None = None
    estimates: list = field(default_factory=list)

    @property
    def any_flagged(self) -> bool:
        return any(r.flagged for r in self.rows)


def run_theorem_scan(spec: cat.LevyProcessSpec, domain: Domain, t_grid, n_paths: int, seed: int = 0,
                     k: float = SCHEDULE_K, gamma: float = SCHEDULE_GAMMA, layer_a: float | None = None,
                     boundary_fraction: float = BOUNDARY_FRACTION, tol: float = DEFAULT_TOL, workers: int = 1,
                     label: str = "scan", constant: MeanSupValue | None = None) -> AsymptoticReport:
    """Scaled heat loss psi^{-1}(1/t) (|D| - Q) against |boundary| E[sup Y] on a grid of times."""
    t_grid = [float(t) for t in t_grid]
    if len(t_grid) < 3:
        raise ValueError("a scan needs at least 3 times")
    constant = constant or limit_constant(spec.rv_index)
    target = domain.perimeter * constant.value
    a = layer_a if layer_a is not None else default_layer_plan(spec, domain, min(t_grid)).a
    plan = LayerPlan(a, boundary_fraction)
    r = richardson_factor(spec.rv_index)
    rows, ests = [], []
    for t in t_grid:
        n = step_schedule(t, k, gamma)
        est = estimate_Q(spec, domain, t, n_paths, n, plan, seed, workers, label)
        psi_inv = cat.inverse_psi(spec.scaling_spec, 1.0 / t)
        scaled, scaled_se = psi_inv * est.loss, psi_inv * est.loss_se
        shift = psi_inv * r * (est.loss - est.loss_coarse)
        regime = in_asymptotic_regime(spec, domain, t)
        flagged = (not regime) or abs(shift) > tol / 2 * target or scaled_se > tol / 4 * target
        rows.append(ReportRow(t, psi_inv, est.q_hat, est.q_se, est.loss, est.loss_se, scaled, scaled_se, target,
                              (scaled - target) / target, est.n_paths, est.n_steps, bool(flagged), shift, regime,
                              est.interior_loss))
        ests.append(est)
    diag = convergence_diagnostics([r_.t for r_ in rows], [r_.rel_gap for r_ in rows],
                                   [r_.scaled_se / target for r_ in rows], [r_.in_regime for r_ in rows])
    return AsymptoticReport(spec, domain, constant, rows, diag, ests)


@dataclass(frozen=True)
class CorollaryReport:
    base: AsymptoticReport
    truncated: AsymptoticReport
    diff: np.ndarray  # truncated minus base scaled loss, per t
    diff_se: np.ndarray  # combined standard error sqrt(se_b^2 + se_t^2)


def corollary_experiment(base: cat.LevyProcessSpec, cutoff: float, domain: Domain, t_grid, n_paths: int,
                         seed: int = 0, **kw) -> CorollaryReport:
    """Scans of the untruncated and truncated process on shared random streams.

    The base arm is sampled through the same compound-Poisson representation
    with an infinite cutoff, so the two arms differ only in the dropped jumps.
    """
    if base.kind == "truncated":
        raise ValueError("pass the untruncated base spec")
    kw.setdefault("label", "corollary")
    rep_b = run_theorem_scan(cat.truncate(base, math.inf), domain, t_grid, n_paths, seed, **kw)
    rep_t = run_theorem_scan(cat.truncate(base, cutoff), domain, t_grid, n_paths, seed, **kw)
    d = np.array([rt.scaled_loss - rb.scaled_loss for rb, rt in zip(rep_b.rows, rep_t.rows)])
    se = np.array([math.hypot(rb.scaled_se, rt.scaled_se) for rb, rt in zip(rep_b.rows, rep_t.rows)])
    return CorollaryReport(rep_b, rep_t, d, se)
