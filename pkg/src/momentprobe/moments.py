"""Normally ordered moment tables.

A moment table stores M(j, k) = <a_1^dag^k1 ... a_m^dag^km  a_1^j1 ... a_m^jm>
for all multi-indices j, k inside a per-mode box.  Quadrature convention is
x = (a + a^dag)/2, p = (a - a^dag)/(2i), so a coherent amplitude alpha has
mean (Re alpha, Im alpha) and every coherent state has covariance I/4.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import DimensionError, OrderUnsupportedError, TruncationError

MAX_GAUSSIAN_FACTORS = 32

Index = tuple[int, ...]


def as_index(value: int | Sequence[int], modes: int, name: str = "index") -> Index:
    """Normalize an int or sequence to a per-mode tuple of ints."""
    if isinstance(value, (int, np.integer)):
        out = (int(value),) * modes
    else:
        out = tuple(int(v) for v in value)
    if len(out) != modes:
        raise DimensionError(f"{name} has {len(out)} modes, expected {modes}")
    if any(v < 0 for v in out):
        raise DimensionError(f"{name} must be nonnegative, got {out}")
    return out


def iter_box(cutoff: Index) -> Iterator[Index]:
    """Yield all multi-indices with component i in 0..cutoff[i]."""
    return itertools.product(*(range(c + 1) for c in cutoff))


@dataclass
class MomentTable:
    """Dense table of normally ordered moments over an index box.

    Attributes:
        modes: Number of modes.
        cutoff: Per-mode maximum of each of j and k.
        entries: Mapping (j, k) -> complex moment, with j and k per-mode
            tuples.  Entries may be omitted when negligibly small.
        meta: Free-form provenance and warnings.
    """

    modes: int
    cutoff: Index
    entries: dict[tuple[Index, Index], complex]
    meta: dict = field(default_factory=dict)

    def value(self, j: int | Sequence[int], k: int | Sequence[int]) -> complex:
        jj = as_index(j, self.modes, "j")
        kk = as_index(k, self.modes, "k")
        return complex(self.entries.get((jj, kk), 0.0))


@dataclass
class GaussianState:
    """Gaussian state as quadrature mean and covariance in xpxp order.

    ``mean`` has length 2m and ``cov`` is 2m x 2m symmetric.  The covariance
    is not required to be a physical one; formally defined tables are still
    produced, which is what calibration against idealized inputs needs.
    """

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self) -> None:
        self.mean = np.asarray(self.mean, dtype=float).reshape(-1)
        self.cov = np.asarray(self.cov, dtype=float)
        n = self.mean.shape[0]
        if n == 0 or n % 2:
            raise DimensionError(f"mean length must be positive and even, got {n}")
        if self.cov.shape != (n, n):
            raise DimensionError(
                f"cov shape {self.cov.shape} does not match mean length {n}")
        if not np.allclose(self.cov, self.cov.T, atol=1e-12):
            raise DimensionError("cov must be symmetric")
        self.cov = 0.5 * (self.cov + self.cov.T)

    @property
    def modes(self) -> int:
        return self.mean.shape[0] // 2


def coherent_moments(alpha: complex | Sequence[complex],
                     cutoff: int | Sequence[int] = 6) -> MomentTable:
    """Moment table of a coherent state: M(j, k) = alpha^j conj(alpha)^k."""
    amps = (alpha,) if np.isscalar(alpha) else tuple(alpha)
    modes = len(amps)
    cut = as_index(cutoff, modes, "cutoff")
    entries: dict[tuple[Index, Index], complex] = {}
    for j in iter_box(cut):
        for k in iter_box(cut):
            v = 1.0 + 0.0j
            for s, a in enumerate(amps):
                v *= complex(a) ** j[s] * np.conj(complex(a)) ** k[s]
            entries[(j, k)] = complex(v)
    return MomentTable(modes, cut, entries)


def fock_moments(n: int | Sequence[int],
                 cutoff: int | Sequence[int] = 6) -> MomentTable:
    """Moment table of a number state; diagonal with falling factorials."""
    ns = (n,) if isinstance(n, (int, np.integer)) else tuple(n)
    modes = len(ns)
    cut = as_index(cutoff, modes, "cutoff")
    entries: dict[tuple[Index, Index], complex] = {}
    for j in iter_box(cut):
        v = 1.0
        for s, nn in enumerate(ns):
            if j[s] > nn:
                v = 0.0
                break
            v *= math.perm(int(nn), j[s])
        entries[(j, j)] = complex(v)
    return MomentTable(modes, cut, entries)


def thermal_moments(nbar: float | Sequence[float],
                    cutoff: int | Sequence[int] = 6) -> MomentTable:
    """Moment table of a thermal state: M(j, j) = prod_s j_s! nbar_s^j_s."""
    ns = (nbar,) if np.isscalar(nbar) else tuple(nbar)
    modes = len(ns)
    cut = as_index(cutoff, modes, "cutoff")
    entries: dict[tuple[Index, Index], complex] = {}
    for j in iter_box(cut):
        v = 1.0
        for s, nn in enumerate(ns):
            v *= math.factorial(j[s]) * float(nn) ** j[s]
        entries[(j, j)] = complex(v)
    return MomentTable(modes, cut, entries)


def _pair_covariances(state: GaussianState) -> tuple[np.ndarray, np.ndarray]:
    """Covariances of the formal variables (a_s, a_t) and (a_s, a^dag_t).

    Computed from the mean-subtracted covariance minus the coherent floor,
    so a coherent state has all pair covariances equal to zero.
    """
    m = state.modes
    c = state.cov - 0.25 * np.eye(2 * m)
    xx = c[0::2, 0::2]
    xp = c[0::2, 1::2]
    px = c[1::2, 0::2]
    pp = c[1::2, 1::2]
    aa = xx - pp + 1j * (xp + px)
    ac = xx + pp + 1j * (px - xp)
    return aa, ac


def gaussian_moments(state: GaussianState,
                     cutoff: int | Sequence[int] = 6) -> MomentTable:
    """Moment table of a Gaussian state via moment-factorization recursion.

    Works for any symmetric covariance, physical or not.  Total moment
    order (sum of all j and k components) is capped; beyond the cap the
    recursion would be too deep to trust or afford.

    Raises:
        OrderUnsupportedError: If the box needs moments of total order
            above MAX_GAUSSIAN_FACTORS.
    """
    m = state.modes
    cut = as_index(cutoff, m, "cutoff")
    if 2 * sum(cut) > MAX_GAUSSIAN_FACTORS:
        raise OrderUnsupportedError(
            f"total moment order {2 * sum(cut)} exceeds supported "
            f"maximum {MAX_GAUSSIAN_FACTORS}")
    aa, ac = _pair_covariances(state)
    mu = state.mean[0::2] + 1j * state.mean[1::2]

    def mean_of(var: tuple[int, int]) -> complex:
        kind, s = var
        return mu[s] if kind == 0 else np.conj(mu[s])

    def cov_of(v: tuple[int, int], w: tuple[int, int]) -> complex:
        (kv, s), (kw, t) = v, w
        if kv == 0 and kw == 0:
            return aa[s, t]
        if kv == 0 and kw == 1:
            return ac[s, t]
        if kv == 1 and kw == 0:
            return ac[t, s]
        return np.conj(aa[s, t])

    memo: dict[tuple[Index, Index], complex] = {}

    def expect(j: Index, k: Index) -> complex:
        if sum(j) + sum(k) == 0:
            return 1.0 + 0.0j
        key = (j, k)
        if key in memo:
            return memo[key]
        if any(js > 0 for js in j):
            s = next(i for i, js in enumerate(j) if js > 0)
            v = (0, s)
            rest_j = j[:s] + (j[s] - 1,) + j[s + 1:]
            rest_k = k
        else:
            s = next(i for i, ks in enumerate(k) if ks > 0)
            v = (1, s)
            rest_j = j
            rest_k = k[:s] + (k[s] - 1,) + k[s + 1:]
        total = mean_of(v) * expect(rest_j, rest_k)
        for t in range(m):
            if rest_j[t] > 0:
                w = (0, t)
                red = rest_j[:t] + (rest_j[t] - 1,) + rest_j[t + 1:]
                total += cov_of(v, w) * rest_j[t] * expect(red, rest_k)
            if rest_k[t] > 0:
                w = (1, t)
                red = rest_k[:t] + (rest_k[t] - 1,) + rest_k[t + 1:]
                total += cov_of(v, w) * rest_k[t] * expect(rest_j, red)
        memo[key] = total
        return total

    entries: dict[tuple[Index, Index], complex] = {}
    for j in iter_box(cut):
        for k in iter_box(cut):
            entries[(j, k)] = complex(expect(j, k))
    return MomentTable(m, cut, entries)


def gaussian_low_moments(state: GaussianState) -> tuple[tuple[complex, float, complex], ...]:
    """Closed forms for (M_10, M_11, M_20) of each mode.

    M_10 = mean amplitude, M_11 = Vxx + Vpp - 1/2 + |M_10|^2 and
    M_20 = Vxx - Vpp + 2i Vxp + M_10^2, with single-mode marginals of the
    covariance.  Returns one (m10, m11, m20) triple per mode.
    """
    out = []
    for s in range(state.modes):
        x, p = 2 * s, 2 * s + 1
        m10 = state.mean[x] + 1j * state.mean[p]
        vxx, vpp, vxp = state.cov[x, x], state.cov[p, p], state.cov[x, p]
        m11 = float(vxx + vpp - 0.5 + abs(m10) ** 2)
        m20 = (vxx - vpp + 2j * vxp) + m10 ** 2
        out.append((complex(m10), m11, complex(m20)))
    return tuple(out)


def apply_tensor(tensor, table: MomentTable) -> MomentTable:
    """Propagate a moment table through a process tensor.

    M_out(j, k) = sum over the tensor input box of E[(j,k),(m,n)] M_in(m, n).
    The summation box is recorded in the result metadata; if the input table
    holds moments beyond the tensor's input box a truncation warning is
    recorded, since that content cannot influence the sum.

    Raises:
        DimensionError: If mode counts differ.
        TruncationError: If the table does not cover the tensor input box.
    """
    if tensor.modes != table.modes:
        raise DimensionError(
            f"tensor has {tensor.modes} modes, table has {table.modes}")
    cin = tensor.cutoff_in
    if any(tc < ci for tc, ci in zip(table.cutoff, cin)):
        raise TruncationError(
            f"input table cutoff {table.cutoff} does not cover tensor "
            f"input cutoff {cin}")
    meta: dict = {"summation_cutoff": cin}
    if any(tc > ci for tc, ci in zip(table.cutoff, cin)):
        meta["truncation_warning"] = (
            f"input moments above tensor input cutoff {cin} were ignored")
    rows: dict[tuple[Index, Index], list[tuple[Index, Index, complex]]] = {}
    for (jj, kk, mm, nn), ev in tensor.entries.items():
        rows.setdefault((jj, kk), []).append((mm, nn, ev))
    entries: dict[tuple[Index, Index], complex] = {}
    for j in iter_box(tensor.cutoff_out):
        for k in iter_box(tensor.cutoff_out):
            acc = 0.0 + 0.0j
            for mm, nn, ev in rows.get((j, k), ()):
                acc += ev * table.entries.get((mm, nn), 0.0)
            entries[(j, k)] = complex(acc)
    return MomentTable(table.modes, tensor.cutoff_out, entries, meta)
