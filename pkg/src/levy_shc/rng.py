"""Counter-based random streams (Philox4x32-10) for reproducible parallel sampling.

Every simulated path owns a stream keyed by ``mix(seed, experiment_id, path_index)``,
so results never depend on how paths are distributed over workers.

Stream state lives in a small ``uint64`` array so numba kernels can carry it::

    state[0]  64-bit Philox key
    state[1]  64-bit block counter
    state[2]  buffered second 64-bit word of the last block
    state[4]  1 if state[2] is unused
    (state[3] and state[5] are reserved)
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numba
import numpy as np

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_MASK32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
_S11 = np.uint64(11)

STATE_SIZE = 6
_INV_2_53 = 1.0 / 9007199254740992.0


@numba.njit(cache=True, nogil=True, inline="always")
def philox4x32(c0, c1, c2, c3, k0, k1):
    """Ten Philox rounds on a 4x32 counter with a 2x32 key (all passed as uint64)."""
    for r in range(10):
        p0 = _M0 * c0
        p1 = _M1 * c2
        n0 = ((p1 >> _S32) ^ c1 ^ k0) & _MASK32
        n1 = p1 & _MASK32
        n2 = ((p0 >> _S32) ^ c3 ^ k1) & _MASK32
        n3 = p0 & _MASK32
        c0, c1, c2, c3 = n0, n1, n2, n3
        if r < 9:
            k0 = (k0 + _W0) & _MASK32
            k1 = (k1 + _W1) & _MASK32
    return c0, c1, c2, c3


@numba.njit(cache=True, nogil=True)
def splitmix64(x):
    x = x + np.uint64(0x9E3779B97F4A7C15)
    z = x
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@numba.njit(cache=True, nogil=True)
def mix_key(seed, experiment, index):
    h = splitmix64(np.uint64(seed))
    h = splitmix64(h ^ np.uint64(experiment))
    return splitmix64(h ^ splitmix64(np.uint64(index)))


@numba.njit(cache=True, nogil=True)
def init_state(state, key):
    state[0] = key
    for j in range(1, STATE_SIZE):
        state[j] = np.uint64(0)


@numba.njit(cache=True, nogil=True, inline="always")
def next_u64(state):
    if state[4] == np.uint64(0):
        key = state[0]
        ctr = state[1]
        state[1] = ctr + np.uint64(1)
        r0, r1, r2, r3 = philox4x32(ctr & _MASK32, ctr >> _S32, np.uint64(0), np.uint64(0),
                                    key & _MASK32, key >> _S32)
        state[2] = (r2 << _S32) | r3
        state[4] = np.uint64(1)
        return (r0 << _S32) | r1
    state[4] = np.uint64(0)
    return state[2]


@numba.njit(cache=True, nogil=True, inline="always")
def uniform(state):
    """Uniform on the open interval (0, 1) with 53 random bits."""
    return ((next_u64(state) >> _S11) + 0.5) * _INV_2_53


def _ziggurat_tables(n: int = 128, r: float = 3.442619855899, v: float = 9.91256303526217e-3):
    # Marsaglia-Tsang layers for the half-normal density exp(-x^2/2)
    m1 = 2.0 ** 31
    kn = np.zeros(n, dtype=np.int64)
    wn = np.zeros(n)
    fn = np.zeros(n)
    dn = tn = r
    q = v / np.exp(-0.5 * dn * dn)
    kn[0] = int((dn / q) * m1)
    wn[0], wn[n - 1] = q / m1, dn / m1
    fn[0], fn[n - 1] = 1.0, np.exp(-0.5 * dn * dn)
    for i in range(n - 2, 0, -1):
        dn = np.sqrt(-2.0 * np.log(v / dn + np.exp(-0.5 * dn * dn)))
        kn[i + 1] = int((dn / tn) * m1)
        tn = dn
        fn[i] = np.exp(-0.5 * dn * dn)
        wn[i] = dn / m1
    return kn, wn, fn


_KN, _WN, _FN = _ziggurat_tables()
_ZIG_R = 3.442619855899


@numba.njit(cache=True, nogil=True, inline="always")
def normal(state):
    """Standard normal by the ziggurat method.

    Each attempt takes one 64-bit word: the low 7 bits pick the layer and the
    high 32 bits, read as a signed integer, give sign and magnitude, so the
    two never share bits.
    """
    while True:
        w = next_u64(state)
        iz = np.int64(w & np.uint64(127))
        hz = np.int64(w >> _S32)
        if hz >= 2147483648:
            hz -= 4294967296
        if abs(hz) < _KN[iz]:
            return hz * _WN[iz]
        x = hz * _WN[iz]
        if iz == 0:
            # tail beyond r
            while True:
                xt = -np.log(uniform(state)) / _ZIG_R
                y = -np.log(uniform(state))
                if y + y >= xt * xt:
                    break
            return _ZIG_R + xt if hz > 0 else -_ZIG_R - xt
        if _FN[iz] + uniform(state) * (_FN[iz - 1] - _FN[iz]) < np.exp(-0.5 * x * x):
            return x


@numba.njit(cache=True, nogil=True, inline="always")
def exponential(state):
    return -np.log(uniform(state))


def experiment_id(label: str) -> int:
    """Stable 64-bit id for an experiment label."""
    return int.from_bytes(hashlib.blake2b(label.encode("utf-8"), digest_size=8).digest(), "little")


def stream_key(seed: int, experiment: int, index: int) -> int:
    return int(mix_key(np.uint64(seed % 2**64), np.uint64(experiment % 2**64), np.uint64(index % 2**64)))


@numba.njit(cache=True, nogil=True)
def _fill_uniform(state, out):
    for i in range(out.shape[0]):
        out[i] = uniform(state)


@numba.njit(cache=True, nogil=True)
def _fill_normal(state, out):
    for i in range(out.shape[0]):
        out[i] = normal(state)


@dataclass
class RngStream:
    """One reproducible stream; ``split`` derives independent child streams."""

    seed: int
    stream_id: int = 0
    state: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.state = np.zeros(STATE_SIZE, dtype=np.uint64)
        init_state(self.state, np.uint64(stream_key(self.seed, self.stream_id, 0)))

    @property
    def key(self) -> int:
        return int(self.state[0])

    def split(self, index: int) -> "RngStream":
        return RngStream(self.seed, int(mix_key(np.uint64(self.stream_id % 2**64), np.uint64(index % 2**64),
                                                np.uint64(0x5EED))))

    def uniform(self, n: int) -> np.ndarray:
        out = np.empty(n)
        _fill_uniform(self.state, out)
        return out

    def normal(self, n: int) -> np.ndarray:
        out = np.empty(n)
        _fill_normal(self.state, out)
        return out
