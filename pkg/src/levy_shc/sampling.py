"""Increment, skeleton and supremum samplers for every catalogue process.

All processes are sampled as subordinate Brownian motions: an increment over
``dt`` is ``sqrt(2 S) * Z`` with ``Z`` standard normal in R^d and ``S`` the
subordinator increment.  ``S`` is drawn exactly where an elementary sampler
exists (Kanter for positive stable laws, rejection for the tempered
subordinator of the relativistic process).  Truncated and log-modulated
processes use a compound-Poisson approximation: subordinator jumps above a
threshold ``s_eps`` are drawn one by one, jumps below it are replaced by their
mean, which makes the corresponding spatial jumps a variance-matched Gaussian.

Kernels work on blocks of path indices; path ``i`` always draws from the
stream keyed by ``mix(seed, experiment, i)``.
"""

from __future__ import annotations

import functools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from types import SimpleNamespace

import numba
import numpy as np
from scipy import optimize

from . import catalogue as cat
from .rng import STATE_SIZE, RngStream, exponential, init_state, mix_key, normal, uniform

# expected number of explicitly sampled subordinator jumps over one sampling horizon
DEFAULT_JUMP_BUDGET = 256.0
RETRY_CAP = 1_000_000
MAX_HALVINGS = 40
BLOCK = 2048

# sampling recipes; each gets its own compiled kernels
MODE_GAUSS, MODE_CMS, MODE_SUBORD, MODE_TEMPERED, MODE_CP = range(5)
# fp layout
_F_GAUSS, _F_RHO1, _F_RHO2, _F_TRHO, _F_KAPPA, _F_ALPHA1D, _F_ARRHO1, _F_ARRHO2, _F_ARKAPPA, _F_CUTOFF = range(10)
# ip layout
_I_NSTABLE, _I_TEMPERED, _I_CMS, _I_ARMODE, _I_ARNCOMP, _I_TRUNC = range(6)
# ar layout
_A_SEPS, _A_RATE, _A_RATE1, _A_MU = range(4)


class SamplerFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class SamplerPlan:
    """Numeric description of a spec, ready for the numba kernels."""

    spec: cat.LevyProcessSpec
    fp: np.ndarray
    ip: np.ndarray
    ar: np.ndarray
    log_s: np.ndarray
    log_tail: np.ndarray
    mode: int = 0

    @property
    def d(self) -> int:
        return self.spec.dimension


@dataclass(frozen=True)
class PathGrid:
    t_end: float
    n_steps: int
    positions: np.ndarray  # (n_steps + 1, d)
    stream_key: int

    @property
    def dt(self) -> float:
        return self.t_end / self.n_steps


def _stable_rate(rho: float, s: float) -> float:
    return cat.stable_tail_rate(rho, s)


def make_plan(spec: cat.LevyProcessSpec, horizon: float, jump_budget: float = DEFAULT_JUMP_BUDGET) -> SamplerPlan:
    """Build the sampler description.

    ``horizon`` is the time span one sampling call covers (a single increment
    or a whole path); the compound-Poisson threshold is set so that about
    ``jump_budget`` subordinator jumps are drawn explicitly over it.
    """
    fp = np.zeros(10)
    ip = np.zeros(6, dtype=np.int64)
    ar = np.zeros(4)
    log_s = np.zeros(1)
    log_tail = np.zeros(1)
    fp[_F_CUTOFF] = np.inf
    truncated = spec.kind == "truncated"
    proc = spec.base if truncated else spec
    k, a = proc.kind, proc.alpha
    if k == "brownian" or (k == "stable" and a == 2.0):
        fp[_F_GAUSS] = 1.0
    elif k == "jump_diffusion":
        fp[_F_GAUSS] = proc.gaussian_coefficient
    if truncated:
        ip[_I_TRUNC] = 1
        fp[_F_CUTOFF] = spec.cutoff

    needs_ar = k in ("log_up", "log_down") or (truncated and k != "brownian" and not (k == "stable" and a == 2.0))
    if not needs_ar:
        if k == "stable" and a < 2.0:
            if spec.dimension == 1:
                ip[_I_CMS] = 1
                fp[_F_ALPHA1D] = a
            else:
                ip[_I_NSTABLE] = 1
                fp[_F_RHO1] = a / 2
        elif k == "mixed_stable":
            ip[_I_NSTABLE] = 2
            fp[_F_RHO1], fp[_F_RHO2] = a / 2, proc.beta / 2
        elif k == "jump_diffusion":
            ip[_I_NSTABLE] = 1
            fp[_F_RHO1] = a / 2
        elif k == "relativistic_stable":
            ip[_I_TEMPERED] = 1
            fp[_F_TRHO], fp[_F_KAPPA] = a / 2, proc.m ** (2 / a)
        if ip[_I_CMS]:
            mode = MODE_CMS
        elif ip[_I_TEMPERED]:
            mode = MODE_TEMPERED
        elif ip[_I_NSTABLE]:
            mode = MODE_SUBORD
        else:
            mode = MODE_GAUSS
        return SamplerPlan(spec, fp, ip, ar, log_s, log_tail, mode)

    target_rate = jump_budget / horizon
    if k in ("log_up", "log_down"):
        from .levy_tables import log_table
        table = log_table(proc)
        ip[_I_ARMODE] = 2
        s_eps = table.threshold_for_rate(target_rate)
        if truncated:
            s_eps = min(s_eps, spec.cutoff ** 2 / 200.0)
        ar[_A_SEPS] = s_eps
        ar[_A_RATE] = table.tail(s_eps)
        ar[_A_RATE1] = ar[_A_RATE]
        ar[_A_MU] = table.small_mean(s_eps)
        log_s, log_tail = table.log_s, table.log_tail
        return SamplerPlan(spec, fp, ip, ar, log_s, log_tail, MODE_CP)

    ip[_I_ARMODE] = 1
    if k == "mixed_stable":
        rhos = [a / 2, proc.beta / 2]
    else:
        rhos = [a / 2]
    ip[_I_ARNCOMP] = len(rhos)
    fp[_F_ARRHO1] = rhos[0]
    if len(rhos) == 2:
        fp[_F_ARRHO2] = rhos[1]
    if k == "relativistic_stable":
        fp[_F_ARKAPPA] = proc.m ** (2 / a)
    total = lambda s: sum(_stable_rate(r, s) for r in rhos)
    s_eps = optimize.brentq(lambda ls: math.log(total(math.exp(ls))) - math.log(target_rate), -700, 700)
    s_eps = math.exp(s_eps)
    if truncated:
        s_eps = min(s_eps, spec.cutoff ** 2 / 200.0)
    ar[_A_SEPS] = s_eps
    ar[_A_RATE] = total(s_eps)
    ar[_A_RATE1] = _stable_rate(rhos[0], s_eps)
    ar[_A_MU] = cat.subordinator_small_mean(proc, s_eps)
    return SamplerPlan(spec, fp, ip, ar, log_s, log_tail, MODE_CP)


# --- numba primitives --------------------------------------------------------

@numba.njit(cache=True, nogil=True, inline="always")
def log_positive_stable(rho, state):
    """log S for Kanter's representation: E[exp(-lam S)] = exp(-lam**rho), 0 < rho < 1."""
    theta = np.pi * uniform(state)
    log_e = np.log(exponential(state))
    c = (1.0 - rho) / rho
    return (np.log(np.sin(rho * theta)) + c * np.log(np.sin((1.0 - rho) * theta))
            - np.log(np.sin(theta)) / rho - c * log_e)


@numba.njit(cache=True, nogil=True, inline="always")
def positive_stable(rho, state):
    return np.exp(log_positive_stable(rho, state))


@numba.njit(cache=True, nogil=True, inline="always")
def symmetric_stable(alpha, state):
    """Chambers-Mallows-Stuck: E[exp(i xi Y)] = exp(-|xi|**alpha)."""
    v = np.pi * (uniform(state) - 0.5)
    w = exponential(state)
    return (np.sin(alpha * v) / np.cos(v) ** (1.0 / alpha)
            * (np.cos((1.0 - alpha) * v) / w) ** ((1.0 - alpha) / alpha))


@numba.njit(cache=True, nogil=True)
def _tempered_stable(rho, kappa, dt, state):
    """Increment of the subordinator with exponent (lam + kappa)**rho - kappa**rho.

    Rejection from the stable increment.  The interval is first split into
    2^k pieces with kappa**rho * h <= 1, so each piece needs at most e tries on
    average; on retry exhaustion the remaining pieces are halved again.
    Returns -1.0 on total failure.
    """
    pieces = 1
    h = dt
    mass = kappa ** rho * dt
    while mass > 1.0 and pieces < 2 ** 30:
        pieces *= 2
        h *= 0.5
        mass *= 0.5
    done = 0
    total = 0.0
    halvings = 0
    scale = h ** (1.0 / rho)
    while done < pieces:
        ok = False
        s = 0.0
        for _ in range(RETRY_CAP):
            s = scale * positive_stable(rho, state)
            if uniform(state) <= np.exp(-kappa * s):
                ok = True
                break
        if ok:
            total += s
            done += 1
        else:
            halvings += 1
            if halvings > MAX_HALVINGS:
                return -1.0
            pieces = 2 * (pieces - done)
            done = 0
            h = 0.5 * h
            scale = h ** (1.0 / rho)
    return total


@numba.njit(cache=True, nogil=True)
def _table_jump(log_s, log_tail, s_eps, rate, state):
    # inverse of the tabulated tail: find s with tail(s) = rate * U
    target = np.log(rate * uniform(state))
    lo = 0
    hi = log_s.shape[0] - 1
    if target >= log_tail[0]:
        return np.exp(log_s[0])
    if target <= log_tail[hi]:
        # beyond the grid the tail is a power law; extrapolate with the last slope
        slope = (log_tail[hi] - log_tail[hi - 1]) / (log_s[hi] - log_s[hi - 1])
        return np.exp(log_s[hi] + (target - log_tail[hi]) / slope)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if log_tail[mid] > target:
            lo = mid
        else:
            hi = mid
    w = (target - log_tail[lo]) / (log_tail[hi] - log_tail[lo])
    s = np.exp(log_s[lo] + w * (log_s[hi] - log_s[lo]))
    return max(s, s_eps)


@numba.njit(cache=True, nogil=True)
def _jumps(fp, ip, ar, log_s, log_tail, dt, d, state, out, work):
    """Compound-Poisson part over ``dt``: adds kept spatial jumps to ``out``,
    returns the subordinator mass to be turned into a Gaussian step."""
    s_gauss = 0.0
    rate = ar[1]
    cut2 = fp[9] * fp[9]
    clock = exponential(state) / rate
    while clock < dt:
        keep = True
        if ip[3] == 1:
            rho = fp[6]
            if ip[4] == 2 and uniform(state) * rate > ar[2]:
                rho = fp[7]
            s = ar[0] * uniform(state) ** (-1.0 / rho)
            if fp[8] > 0.0:
                keep = uniform(state) <= np.exp(-fp[8] * s)
        else:
            s = _table_jump(log_s, log_tail, ar[0], rate, state)
        if keep:
            if ip[5] == 1:
                sc = np.sqrt(2.0 * s)
                r2 = 0.0
                for j in range(d):
                    work[j] = sc * normal(state)
                    r2 += work[j] * work[j]
                if r2 <= cut2:
                    for j in range(d):
                        out[j] += work[j]
            else:
                s_gauss += s
        clock += exponential(state) / rate
    return s_gauss



@functools.lru_cache(maxsize=None)
def kernels(mode: int) -> SimpleNamespace:
    """Numba kernels specialised to one sampling mode.

    ``mode`` is frozen into the closures, so each compiled kernel carries only
    the code of its own recipe.
    """

    @numba.njit(nogil=True)
    def step_consts(fp, dt):
        # per-dt constants: [gaussian scale, log-scale of component 1, of component 2, 1-d stable scale]
        c = np.zeros(4)
        c[0] = np.sqrt(2.0 * fp[0] * dt)
        if mode == MODE_SUBORD:
            c[1] = np.log(dt) / fp[1]
            if fp[2] > 0.0:
                c[2] = np.log(dt) / fp[2]
        if mode == MODE_CMS:
            c[3] = dt ** (1.0 / fp[5])
        return c

    @numba.njit(nogil=True, inline="always")
    def inc(fp, ip, ar, log_s, log_tail, dt, c, d, state, out, work):
        if mode == MODE_GAUSS:
            for j in range(d):
                out[j] = c[0] * normal(state)
            return 0
        if mode == MODE_CMS:
            out[0] = c[3] * symmetric_stable(fp[5], state)
            return 0
        s = fp[0] * dt
        if mode == MODE_SUBORD:
            s += np.exp(log_positive_stable(fp[1], state) + c[1])
            if ip[0] == 2:
                s += np.exp(log_positive_stable(fp[2], state) + c[2])
        if mode == MODE_TEMPERED:
            st = _tempered_stable(fp[3], fp[4], dt, state)
            if st < 0.0:
                return -1
            s += st
        if mode == MODE_CP:
            for j in range(d):
                out[j] = 0.0
            s += ar[3] * dt + _jumps(fp, ip, ar, log_s, log_tail, dt, d, state, out, work)
            sc = np.sqrt(2.0 * s)
            for j in range(d):
                out[j] += sc * normal(state)
            return 0
        sc = np.sqrt(2.0 * s)
        for j in range(d):
            out[j] = sc * normal(state)
        return 0

    @numba.njit(nogil=True)
    def increments(fp, ip, ar, log_s, log_tail, dt, d, seed, experiment, i0, out):
        state = np.zeros(STATE_SIZE, dtype=np.uint64)
        work = np.zeros(d)
        c = step_consts(fp, dt)
        fails = 0
        for i in range(out.shape[0]):
            init_state(state, mix_key(seed, experiment, np.uint64(i0 + i)))
            if inc(fp, ip, ar, log_s, log_tail, dt, c, d, state, out[i], work) < 0:
                fails += 1
        return fails

    @numba.njit(nogil=True)
    def one_increment(fp, ip, ar, log_s, log_tail, dt, d, state, out):
        work = np.zeros(d)
        return inc(fp, ip, ar, log_s, log_tail, dt, step_consts(fp, dt), d, state, out, work)

    @numba.njit(nogil=True)
    def skeleton(fp, ip, ar, log_s, log_tail, dt, d, state, positions):
        work = np.zeros(d)
        step = np.zeros(d)
        c = step_consts(fp, dt)
        for k in range(1, positions.shape[0]):
            if inc(fp, ip, ar, log_s, log_tail, dt, c, d, state, step, work) < 0:
                return -1
            for j in range(d):
                positions[k, j] = positions[k - 1, j] + step[j]
        return 0

    @numba.njit(nogil=True)
    def sups(fp, ip, ar, log_s, log_tail, dt, n_fine, strides, seed, experiment, i0, out):
        """Running maxima of 1-d skeletons on nested grids (every ``strides[l]``-th step)."""
        state = np.zeros(STATE_SIZE, dtype=np.uint64)
        work = np.zeros(1)
        step = np.zeros(1)
        c = step_consts(fp, dt)
        nl = strides.shape[0]
        fails = 0
        for i in range(out.shape[0]):
            init_state(state, mix_key(seed, experiment, np.uint64(i0 + i)))
            for l in range(nl):
                out[i, l] = 0.0
            x = 0.0
            for k in range(1, n_fine + 1):
                if inc(fp, ip, ar, log_s, log_tail, dt, c, 1, state, step, work) < 0:
                    fails += 1
                    break
                x += step[0]
                for l in range(nl):
                    if k % strides[l] == 0 and x > out[i, l]:
                        out[i, l] = x
        return fails

    @numba.njit(nogil=True)
    def exits(fp, ip, ar, log_s, log_tail, dt, n, d, annulus, r_in, r_out, shells, seed, experiment, i0,
              exit_fine, exit_coarse):
        """First exit steps from a ball or an annulus centred at the origin.

        Start points are uniform on the union of radial shells ``shells[m] = (lo, hi)``.
        ``exit_fine[i]`` is the first step index outside the domain (``n + 1`` if
        the skeleton survives); ``exit_coarse`` the same on the subgrid of even
        indices plus the endpoint.
        """
        state = np.zeros(STATE_SIZE, dtype=np.uint64)
        work = np.zeros(d)
        step = np.zeros(d)
        x = np.zeros(d)
        c = step_consts(fp, dt)
        m = shells.shape[0]
        vol = np.zeros(m)
        for s in range(m):
            vol[s] = shells[s, 1] ** d - shells[s, 0] ** d
        total = vol.sum()
        r_in2 = r_in * r_in
        r_out2 = r_out * r_out
        fails = 0
        for i in range(exit_fine.shape[0]):
            init_state(state, mix_key(seed, experiment, np.uint64(i0 + i)))
            # radial inversion over the union of shells, direction from a normalised Gaussian
            v = uniform(state) * total
            s = 0
            while s < m - 1 and v > vol[s]:
                v -= vol[s]
                s += 1
            rad = min((shells[s, 0] ** d + v) ** (1.0 / d), shells[s, 1])
            nrm = 0.0
            for j in range(d):
                x[j] = normal(state)
                nrm += x[j] * x[j]
            nrm = np.sqrt(nrm)
            r2 = 0.0
            for j in range(d):
                x[j] *= rad / nrm
                r2 += x[j] * x[j]
            ef = n + 1
            ec = n + 1
            if r2 >= r_out2 or (annulus and r2 <= r_in2):
                ef = 0
                ec = 0
            else:
                for k in range(1, n + 1):
                    if inc(fp, ip, ar, log_s, log_tail, dt, c, d, state, step, work) < 0:
                        fails += 1
                        break
                    r2 = 0.0
                    for j in range(d):
                        x[j] += step[j]
                        r2 += x[j] * x[j]
                    if r2 >= r_out2 or (annulus and r2 <= r_in2):
                        if ef > n:
                            ef = k
                        if k % 2 == 0 or k == n:
                            ec = k
                            break
            exit_fine[i] = ef
            exit_coarse[i] = ec
        return fails

    @numba.njit(nogil=True)
    def sandwich(fp, ip, ar, log_s, log_tail, dt, n, d, radius, nodes_a, w_a, nodes_b, w_b,
                 seed, experiment, i0, out):
        """Exit integrals over start heights u for three nested domains on shared skeletons.

        Domains, in the canonical boundary frame: the ball B((0, R), R), the upper
        half-space H, and the complement of B((0, -R), R).  The start point is
        (0, u) for every quadrature node u, and all nodes reuse one skeleton.
        Column layout of ``out``: [domain * 4 + level * 2 + grid] with domain
        0 = ball, 1 = half-space, 2 = outer ball; level 0 = fine, 1 = coarse;
        grid 0 = ``nodes_a``, 1 = ``nodes_b``.
        """
        state = np.zeros(STATE_SIZE, dtype=np.uint64)
        work = np.zeros(d)
        step = np.zeros(d)
        z = np.zeros(d)
        c = step_consts(fp, dt)
        ka = nodes_a.shape[0]
        kb = nodes_b.shape[0]
        no_marks_a = np.zeros(ka, dtype=np.bool_)
        no_marks_b = np.zeros(kb, dtype=np.bool_)
        marks_a = np.zeros((2, ka), dtype=np.bool_)
        marks_b = np.zeros((2, kb), dtype=np.bool_)
        min_zd = np.zeros(2)
        max_l = np.zeros(2)
        min_u = np.zeros(2)
        hi_pre = np.zeros(2)
        r2cap = radius * radius
        fails = 0
        for i in range(out.shape[0]):
            init_state(state, mix_key(seed, experiment, np.uint64(i0 + i)))
            for j in range(d):
                z[j] = 0.0
            for lv in range(2):
                min_zd[lv] = np.inf
                max_l[lv] = -np.inf
                min_u[lv] = np.inf
                hi_pre[lv] = -np.inf
                marks_a[lv, :] = False
                marks_b[lv, :] = False
            for k in range(1, n + 1):
                if inc(fp, ip, ar, log_s, log_tail, dt, c, d, state, step, work) < 0:
                    fails += 1
                    break
                for j in range(d):
                    z[j] += step[j]
                zd = z[d - 1]
                side2 = 0.0
                for j in range(d - 1):
                    side2 += z[j] * z[j]
                for lv in range(2):
                    if lv == 1 and k % 2 != 0 and k != n:
                        continue
                    if zd < min_zd[lv]:
                        min_zd[lv] = zd
                    if side2 >= r2cap:
                        max_l[lv] = np.inf
                    else:
                        h = np.sqrt(r2cap - side2)
                        lcut = radius - h - zd
                        ucut = radius + h - zd
                        if lcut > max_l[lv]:
                            max_l[lv] = lcut
                        if ucut < min_u[lv]:
                            min_u[lv] = ucut
                        lo = -radius - h - zd
                        hi = -radius + h - zd
                        if hi >= 0.0:
                            if lo <= 0.0:
                                if hi > hi_pre[lv]:
                                    hi_pre[lv] = hi
                            else:
                                for q in range(ka):
                                    if lo <= nodes_a[q] <= hi:
                                        marks_a[lv, q] = True
                                for q in range(kb):
                                    if lo <= nodes_b[q] <= hi:
                                        marks_b[lv, q] = True
            for lv in range(2):
                col = lv * 2
                out[i, 0 + col] = _node_integral(nodes_a, w_a, max_l[lv], min_u[lv], no_marks_a)
                out[i, 1 + col] = _node_integral(nodes_b, w_b, max_l[lv], min_u[lv], no_marks_b)
                out[i, 4 + col] = _node_integral(nodes_a, w_a, -min_zd[lv], np.inf, no_marks_a)
                out[i, 5 + col] = _node_integral(nodes_b, w_b, -min_zd[lv], np.inf, no_marks_b)
                out[i, 8 + col] = _node_integral(nodes_a, w_a, hi_pre[lv], np.inf, marks_a[lv])
                out[i, 9 + col] = _node_integral(nodes_b, w_b, hi_pre[lv], np.inf, marks_b[lv])
        return fails

    return SimpleNamespace(increments=increments, one_increment=one_increment, skeleton=skeleton, sups=sups,
                           exits=exits, sandwich=sandwich)


@numba.njit(cache=True, nogil=True)
def _node_integral(nodes, weights, lo_cut, hi_cut, marks):
    # sum of weights of nodes u with u <= lo_cut or u >= hi_cut or marked
    acc = 0.0
    for k in range(nodes.shape[0]):
        u = nodes[k]
        if u <= lo_cut or u >= hi_cut or marks[k]:
            acc += weights[k]
    return acc


# --- Python-level API --------------------------------------------------------

def _plan_args(plan: SamplerPlan):
    return plan.fp, plan.ip, plan.ar, plan.log_s, plan.log_tail


def run_blocks(task, n: int, workers: int = 1, block: int = BLOCK) -> int:
    """Run ``task(i0, i1)`` over fixed blocks of path indices; returns summed failure count.

    Block boundaries do not depend on ``workers`` and every block writes a
    disjoint output slice, so results are identical for any worker count.
    """
    starts = list(range(0, n, block))
    if workers <= 1 or len(starts) == 1:
        fails = [task(s, min(s + block, n)) for s in starts]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            fails = list(pool.map(lambda s: task(s, min(s + block, n)), starts))
    return int(sum(fails))


def _check(fails: int, spec) -> None:
    if fails:
        raise SamplerFailure(f"{fails} path(s) of {spec} exhausted the rejection retry cap "
                             f"({RETRY_CAP} tries after {MAX_HALVINGS} step halvings)")


def _u64(x: int) -> np.uint64:
    return np.uint64(int(x) % 2**64)


def sample_increment(spec: cat.LevyProcessSpec, dt: float, rng: RngStream,
                     jump_budget: float = DEFAULT_JUMP_BUDGET) -> np.ndarray:
    """One increment over ``dt`` with characteristic function exp(-dt psi(|xi|))."""
    if not dt > 0:
        raise ValueError("dt must be > 0")
    plan = make_plan(spec, dt, jump_budget)
    out = np.zeros(spec.dimension)
    if kernels(plan.mode).one_increment(*_plan_args(plan), dt, spec.dimension, rng.state, out) < 0:
        _check(1, spec)
    return out


def sample_increments(spec: cat.LevyProcessSpec, dt: float, n: int, seed: int, experiment: int = 0,
                      workers: int = 1, jump_budget: float = DEFAULT_JUMP_BUDGET) -> np.ndarray:
    """``n`` independent increments, increment ``i`` drawn from stream ``i``."""
    plan = make_plan(spec, dt, jump_budget)
    out = np.zeros((n, spec.dimension))
    fails = run_blocks(lambda a, b: kernels(plan.mode).increments(*_plan_args(plan), dt, spec.dimension, _u64(seed),
                                                       _u64(experiment), a, out[a:b]), n, workers)
    _check(fails, spec)
    return out


def sample_path_skeleton(spec: cat.LevyProcessSpec, start, t_end: float, n_steps: int, rng: RngStream,
                         jump_budget: float = DEFAULT_JUMP_BUDGET) -> PathGrid:
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    start = np.asarray(start, dtype=float).reshape(spec.dimension)
    plan = make_plan(spec, t_end, jump_budget)
    positions = np.zeros((n_steps + 1, spec.dimension))
    positions[0] = start
    key = rng.key
    if kernels(plan.mode).skeleton(*_plan_args(plan), t_end / n_steps, spec.dimension, rng.state, positions) < 0:
        _check(1, spec)
    return PathGrid(t_end, n_steps, positions, key)


def sample_sup_1d(spec: cat.LevyProcessSpec, t_end: float, n_steps: int, rng: RngStream,
                  jump_budget: float = DEFAULT_JUMP_BUDGET) -> float:
    """Grid maximum of one 1-d skeleton started at 0; never exceeds the true supremum."""
    if spec.dimension != 1:
        raise ValueError("sample_sup_1d needs a one-dimensional spec")
    path = sample_path_skeleton(spec, [0.0], t_end, n_steps, rng, jump_budget)
    return float(path.positions[:, 0].max())


def nested_sups(spec: cat.LevyProcessSpec, t_end: float, n_fine: int, strides, n_paths: int, seed: int,
                experiment: int, workers: int = 1, jump_budget: float = DEFAULT_JUMP_BUDGET) -> np.ndarray:
    """Grid suprema of ``n_paths`` 1-d skeletons on nested subgrids.

    Column ``l`` monitors every ``strides[l]``-th point of the ``n_fine``-step
    skeleton, so for a shared path a finer column is never smaller.
    """
    if spec.dimension != 1:
        spec = spec.with_dimension(1)
    strides = np.asarray(strides, dtype=np.int64)
    if np.any(n_fine % strides):
        raise ValueError("strides must divide n_fine")
    plan = make_plan(spec, t_end, jump_budget)
    out = np.zeros((n_paths, strides.size))
    fails = run_blocks(lambda a, b: kernels(plan.mode).sups(*_plan_args(plan), t_end / n_fine, n_fine, strides, _u64(seed),
                                                _u64(experiment), a, out[a:b]), n_paths, workers)
    _check(fails, spec)
    return out


def exit_steps(spec: cat.LevyProcessSpec, kind: int, r_in: float, r_out: float, shells, t_end: float,
               n_steps: int, n_paths: int, seed: int, experiment: int, workers: int = 1,
               jump_budget: float = DEFAULT_JUMP_BUDGET):
    """First exit step indices from a centred ball/annulus.

    Returns (fine, coarse); the coarse grid keeps every second point and the
    endpoint, so for even ``n_steps`` it is the half-resolution skeleton.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    plan = make_plan(spec, t_end, jump_budget)
    shells = np.ascontiguousarray(shells, dtype=float).reshape(-1, 2)
    ef = np.zeros(n_paths, dtype=np.int64)
    ec = np.zeros(n_paths, dtype=np.int64)
    fails = run_blocks(lambda a, b: kernels(plan.mode).exits(*_plan_args(plan), t_end / n_steps, n_steps, spec.dimension,
                                                          kind == 1,
                                                 r_in, r_out, shells, _u64(seed), _u64(experiment), a,
                                                 ef[a:b], ec[a:b]), n_paths, workers)
    _check(fails, spec)
    return ef, ec


def sandwich_integrals(spec: cat.LevyProcessSpec, radius: float, nodes_a, w_a, nodes_b, w_b, t_end: float,
                       n_steps: int, n_paths: int, seed: int, experiment: int, workers: int = 1,
                       jump_budget: float = DEFAULT_JUMP_BUDGET) -> np.ndarray:
    """Per-path exit integrals, shape (n_paths, 3 domains, 2 levels, 2 grids)."""
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if spec.dimension < 2:
        raise ValueError("the ball experiments need dimension >= 2")
    plan = make_plan(spec, t_end, jump_budget)
    out = np.zeros((n_paths, 12))
    args = [np.ascontiguousarray(v, dtype=float) for v in (nodes_a, w_a, nodes_b, w_b)]
    fails = run_blocks(lambda a, b: kernels(plan.mode).sandwich(*_plan_args(plan), t_end / n_steps, n_steps, spec.dimension,
                                                     radius, *args, _u64(seed), _u64(experiment), a, out[a:b]),
                       n_paths, workers)
    _check(fails, spec)
    return out.reshape(n_paths, 3, 2, 2)
