"""Process catalog: closed-form moment responses and transfer tensors.

A process maps input moment tables to output moment tables linearly,

    M_out(j, k) = sum_{m,n} E[(j,k),(m,n)] M_in(m, n),

and coherent-state probes expose E directly because their moments are
monomials in (alpha, conj alpha).  Each catalog member provides the probe
response in closed form and, except for generic Gaussian channels, the
tensor itself.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigError, DimensionError, UnsupportedProcessError
from .moments import (GaussianState, Index, MomentTable, as_index,
                      gaussian_moments, iter_box)


@dataclass
class ProcessTensor:
    """Dense transfer tensor over an output box times an input box.

    Attributes:
        modes: Number of modes.
        cutoff_out: Per-mode bound on output indices j, k.
        cutoff_in: Per-mode bound on input indices m, n.
        entries: Mapping (j, k, m, n) -> complex, with per-mode tuples.
        meta: Free-form provenance, conditioning and warning records.
    """

    modes: int
    cutoff_out: Index
    cutoff_in: Index
    entries: dict[tuple[Index, Index, Index, Index], complex]
    meta: dict = field(default_factory=dict)

    def value(self, j, k, m, n) -> complex:
        key = (as_index(j, self.modes, "j"), as_index(k, self.modes, "k"),
               as_index(m, self.modes, "m"), as_index(n, self.modes, "n"))
        return complex(self.entries.get(key, 0.0))


@dataclass(frozen=True)
class GaussianTriplet:
    """Gaussian map acting as mean -> scale @ mean + shift and
    cov -> scale @ cov @ scale.T + noise, all in xpxp quadrature order."""

    scale: np.ndarray
    noise: np.ndarray
    shift: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "scale", np.asarray(self.scale, dtype=float))
        object.__setattr__(self, "noise", np.asarray(self.noise, dtype=float))
        object.__setattr__(self, "shift",
                           np.asarray(self.shift, dtype=float).reshape(-1))
        n = self.shift.shape[0]
        if n == 0 or n % 2:
            raise DimensionError(f"shift length must be positive and even, got {n}")
        if self.scale.shape != (n, n) or self.noise.shape != (n, n):
            raise DimensionError("scale and noise must be 2m x 2m")

    @property
    def modes(self) -> int:
        return self.shift.shape[0] // 2

    def compose(self, inner: "GaussianTriplet") -> "GaussianTriplet":
        """Triplet of (self after inner)."""
        if inner.modes != self.modes:
            raise DimensionError("mode counts differ")
        return GaussianTriplet(
            scale=self.scale @ inner.scale,
            noise=self.scale @ inner.noise @ self.scale.T + self.noise,
            shift=self.scale @ inner.shift + self.shift)


@dataclass(frozen=True)
class Identity:
    pass


@dataclass(frozen=True)
class Attenuation:
    """Amplitude damping by a factor eta in (0, 1)."""

    eta: float

    def __post_init__(self) -> None:
        if not 0.0 < self.eta < 1.0:
            raise ConfigError(f"process.eta: must be in (0, 1), got {self.eta}")


@dataclass(frozen=True)
class Displacement:
    beta: complex

    def __post_init__(self) -> None:
        object.__setattr__(self, "beta", complex(self.beta))


@dataclass(frozen=True)
class PhotonAdd:
    pass


@dataclass(frozen=True)
class PhotonSub:
    pass


@dataclass(frozen=True)
class BeamSplitter:
    """Two-mode mixer with a1 -> t a1 - r a2 and a2 -> r a1 + t a2."""

    t: float
    r: float

    def __post_init__(self) -> None:
        if abs(self.t ** 2 + self.r ** 2 - 1.0) > 1e-12:
            raise ConfigError(
                f"process.t/r: t^2 + r^2 must equal 1 within 1e-12, "
                f"got {self.t ** 2 + self.r ** 2}")


@dataclass(frozen=True)
class CatGeneration:
    """Balanced coherent-superposition generator.

    Scales the (j, k) moment by 1, i or -i depending on parities; the
    (0, 0) entry stays 1 so the map is trace preserving.
    """


@dataclass(frozen=True)
class NLA:
    """Noiseless linear amplifier of gain g > 1 with a scissors cutoff.

    The heralded output moment is g^(j+k) P(alpha) alpha^j conj(alpha)^k
    with P the success probability.  With ``vacuum_branch`` the (0, 0)
    row is pinned to the trace of the input, matching a device that
    renormalizes on success.
    """

    gain: float
    scissors: int
    vacuum_branch: bool = True

    def __post_init__(self) -> None:
        if not self.gain > 1.0:
            raise ConfigError(f"process.gain: must exceed 1, got {self.gain}")
        if int(self.scissors) != self.scissors or self.scissors < 1:
            raise ConfigError(
                f"process.scissors: must be a positive integer, got {self.scissors}")
        object.__setattr__(self, "scissors", int(self.scissors))


@dataclass(frozen=True)
class Decoherence:
    """Amplitude decay at rate gamma into a bath of occupation n_bath."""

    n_bath: float
    gamma: float
    tau: float

    def __post_init__(self) -> None:
        if self.n_bath < 0:
            raise ConfigError(f"process.n_bath: must be >= 0, got {self.n_bath}")
        if not self.gamma > 0:
            raise ConfigError(f"process.gamma: must be > 0, got {self.gamma}")
        if self.tau < 0:
            raise ConfigError(f"process.tau: must be >= 0, got {self.tau}")


@dataclass(frozen=True)
class GaussianChannel:
    triplet: GaussianTriplet


ProcessSpec = (Identity | Attenuation | Displacement | PhotonAdd | PhotonSub
               | BeamSplitter | CatGeneration | NLA | Decoherence | GaussianChannel)


def process_modes(spec: ProcessSpec) -> int:
    if isinstance(spec, BeamSplitter):
        return 2
    if isinstance(spec, GaussianChannel):
        return spec.triplet.modes
    return 1


def _cat_factor(j: int, k: int) -> complex:
    return 0.5 * (1.0 + (-1.0) ** (j + k) + 1j * ((-1.0) ** j - (-1.0) ** k))


def nla_success_probability(gain: float, scissors: int,
                            alpha: complex) -> tuple[float, bool]:
    """Success probability of the amplifier on a coherent input.

    Returns the raw value together with a reliability flag; the closed
    form assumes the scissors cutoff dominates the amplified amplitude,
    which fails once scissors <= 10 g |alpha|.
    """
    u = abs(alpha) ** 2
    c = gain ** 2 - 1.0
    value = math.exp(c * u) / c ** scissors
    reliable = scissors > 10.0 * gain * abs(alpha)
    return value, reliable


def output_moments(spec: ProcessSpec, alpha: complex | Sequence[complex],
                   index: tuple) -> complex:
    """Single output moment for a coherent probe.

    Args:
        spec: Catalog process.
        alpha: Probe amplitude; a pair for two-mode processes.
        index: (j, k) output index, per-mode tuples for multi-mode.

    Returns:
        M_out(j, k) evaluated at the probe.
    """
    m = process_modes(spec)
    j, k = index
    jj = as_index(j, m, "j")
    kk = as_index(k, m, "k")
    amps = (alpha,) if np.isscalar(alpha) else tuple(alpha)
    if len(amps) != m:
        raise DimensionError(f"probe has {len(amps)} modes, expected {m}")
    a = complex(amps[0])

    if isinstance(spec, Identity):
        return a ** jj[0] * np.conj(a) ** kk[0]
    if isinstance(spec, Attenuation):
        b = spec.eta * a
        return b ** jj[0] * np.conj(b) ** kk[0]
    if isinstance(spec, Displacement):
        b = a + spec.beta
        return b ** jj[0] * np.conj(b) ** kk[0]
    if isinstance(spec, PhotonSub):
        return a ** (jj[0] + 1) * np.conj(a) ** (kk[0] + 1)
    if isinstance(spec, PhotonAdd):
        j0, k0 = jj[0], kk[0]
        out = a ** (j0 + 1) * np.conj(a) ** (k0 + 1)
        out += (j0 + k0 + 1) * a ** j0 * np.conj(a) ** k0
        if j0 >= 1 and k0 >= 1:
            out += j0 * k0 * a ** (j0 - 1) * np.conj(a) ** (k0 - 1)
        return out
    if isinstance(spec, CatGeneration):
        return _cat_factor(jj[0], kk[0]) * a ** jj[0] * np.conj(a) ** kk[0]
    if isinstance(spec, NLA):
        j0, k0 = jj[0], kk[0]
        if spec.vacuum_branch and j0 == 0 and k0 == 0:
            return 1.0 + 0.0j
        p, _ = nla_success_probability(spec.gain, spec.scissors, a)
        return spec.gain ** (j0 + k0) * p * a ** j0 * np.conj(a) ** k0
    if isinstance(spec, Decoherence):
        j0, k0 = jj[0], kk[0]
        nu = math.exp(-spec.gamma * spec.tau)
        out = 0.0 + 0.0j
        for mm in range(max(0, j0 - k0), j0 + 1):
            nn = mm - j0 + k0
            coef = (math.factorial(j0) * math.factorial(k0)
                    / (math.factorial(mm) * math.factorial(nn))
                    * (spec.n_bath * (1.0 - nu ** 2)) ** (j0 - mm)
                    / math.factorial(j0 - mm) * nu ** (mm + nn))
            out += coef * a ** mm * np.conj(a) ** nn
        return out
    if isinstance(spec, BeamSplitter):
        a2 = complex(amps[1])
        b1 = spec.t * a - spec.r * a2
        b2 = spec.r * a + spec.t * a2
        return (b1 ** jj[0] * b2 ** jj[1]
                * np.conj(b1) ** kk[0] * np.conj(b2) ** kk[1])
    if isinstance(spec, GaussianChannel):
        mean = np.empty(2 * m)
        for s, amp in enumerate(amps):
            mean[2 * s] = complex(amp).real
            mean[2 * s + 1] = complex(amp).imag
        state = GaussianState(mean, 0.25 * np.eye(2 * m))
        out = gaussian_apply(spec.triplet, state)
        table = gaussian_moments(out, tuple(max(js, ks)
                                            for js, ks in zip(jj, kk)))
        return table.value(jj, kk)
    raise UnsupportedProcessError(f"unknown process {type(spec).__name__}")


def _normalize_cutoffs(spec: ProcessSpec, cutoffs) -> tuple[Index, Index]:
    m = process_modes(spec)
    if isinstance(cutoffs, (int, np.integer)):
        out_c = in_c = as_index(int(cutoffs), m, "cutoff")
    else:
        out_raw, in_raw = cutoffs
        out_c = as_index(out_raw, m, "cutoff_out")
        in_c = as_index(in_raw, m, "cutoff_in")
    return out_c, in_c


def catalog_tensor(spec: ProcessSpec, cutoffs) -> ProcessTensor:
    """Exact transfer tensor of a catalog process over a dense box.

    Args:
        spec: Catalog process; generic Gaussian channels are rejected.
        cutoffs: Either one per-mode cutoff for both boxes or a
            (cutoff_out, cutoff_in) pair.

    Raises:
        UnsupportedProcessError: For GaussianChannel, which has no closed
            form here; estimate it from probe data instead.
    """
    if isinstance(spec, GaussianChannel):
        raise UnsupportedProcessError(
            "generic gaussian channel has no closed-form tensor; "
            "use estimation")
    out_c, in_c = _normalize_cutoffs(spec, cutoffs)
    m = process_modes(spec)
    entries: dict[tuple[Index, Index, Index, Index], complex] = {}

    def put(j, k, mm, nn, v) -> None:
        if all(x <= c for x, c in zip(mm, in_c)) and \
           all(x <= c for x, c in zip(nn, in_c)):
            v = complex(v)
            if abs(v) < 1e-15:
                v = 0.0 + 0.0j
            if v != 0:
                key = (j, k, mm, nn)
                entries[key] = entries.get(key, 0.0) + v

    for j in iter_box(out_c):
        for k in iter_box(out_c):
            if isinstance(spec, Identity):
                put(j, k, j, k, 1.0)
            elif isinstance(spec, Attenuation):
                put(j, k, j, k, spec.eta ** (j[0] + k[0]))
            elif isinstance(spec, Displacement):
                b = spec.beta
                for mm in range(j[0] + 1):
                    for nn in range(k[0] + 1):
                        put(j, k, (mm,), (nn,),
                            math.comb(j[0], mm) * math.comb(k[0], nn)
                            * b ** (j[0] - mm) * np.conj(b) ** (k[0] - nn))
            elif isinstance(spec, PhotonSub):
                put(j, k, (j[0] + 1,), (k[0] + 1,), 1.0)
            elif isinstance(spec, PhotonAdd):
                put(j, k, (j[0] + 1,), (k[0] + 1,), 1.0)
                put(j, k, j, k, j[0] + k[0] + 1)
                if j[0] >= 1 and k[0] >= 1:
                    put(j, k, (j[0] - 1,), (k[0] - 1,), j[0] * k[0])
            elif isinstance(spec, CatGeneration):
                put(j, k, j, k, _cat_factor(j[0], k[0]))
            elif isinstance(spec, NLA):
                if spec.vacuum_branch and j[0] == 0 and k[0] == 0:
                    put(j, k, (0,), (0,), 1.0)
                else:
                    c = spec.gain ** 2 - 1.0
                    tmax = min(in_c[0] - j[0], in_c[0] - k[0])
                    for t in range(max(0, tmax) + 1):
                        put(j, k, (j[0] + t,), (k[0] + t,),
                            spec.gain ** (j[0] + k[0])
                            * c ** (t - spec.scissors) / math.factorial(t))
            elif isinstance(spec, Decoherence):
                nu = math.exp(-spec.gamma * spec.tau)
                for mm in range(max(0, j[0] - k[0]), j[0] + 1):
                    nn = mm - j[0] + k[0]
                    put(j, k, (mm,), (nn,),
                        math.factorial(j[0]) * math.factorial(k[0])
                        / (math.factorial(mm) * math.factorial(nn))
                        * (spec.n_bath * (1.0 - nu ** 2)) ** (j[0] - mm)
                        / math.factorial(j[0] - mm) * nu ** (mm + nn))
            elif isinstance(spec, BeamSplitter):
                t_, r_ = spec.t, spec.r
                j1, j2 = j
                k1, k2 = k
                for p, q, rr, ss in itertools.product(
                        range(j1 + 1), range(j2 + 1),
                        range(k1 + 1), range(k2 + 1)):
                    coef = (math.comb(j1, p) * math.comb(j2, q)
                            * math.comb(k1, rr) * math.comb(k2, ss)
                            * t_ ** p * (-r_) ** (j1 - p)
                            * r_ ** q * t_ ** (j2 - q)
                            * t_ ** rr * (-r_) ** (k1 - rr)
                            * r_ ** ss * t_ ** (k2 - ss))
                    put(j, k, (p + q, j1 - p + j2 - q),
                        (rr + ss, k1 - rr + k2 - ss), coef)

    dense: dict[tuple[Index, Index, Index, Index], complex] = {}
    for j in iter_box(out_c):
        for k in iter_box(out_c):
            for mm in iter_box(in_c):
                for nn in iter_box(in_c):
                    dense[(j, k, mm, nn)] = complex(entries.get((j, k, mm, nn), 0.0))
    return ProcessTensor(m, out_c, in_c, dense,
                         meta={"source": "catalog", "process": type(spec).__name__})


def gaussian_apply(triplet: GaussianTriplet, state: GaussianState) -> GaussianState:
    """Push a Gaussian state through a Gaussian map."""
    if triplet.modes != state.modes:
        raise DimensionError(
            f"triplet has {triplet.modes} modes, state has {state.modes}")
    return GaussianState(mean=triplet.scale @ state.mean + triplet.shift,
                         cov=triplet.scale @ state.cov @ triplet.scale.T
                         + triplet.noise)


def as_gaussian_triplet(spec: ProcessSpec) -> GaussianTriplet:
    """Triplet form of the Gaussian catalog members.

    Raises:
        UnsupportedProcessError: If the process is not Gaussian.
    """
    eye = np.eye(2)
    zero2 = np.zeros((2, 2))
    if isinstance(spec, Identity):
        return GaussianTriplet(eye, zero2, np.zeros(2))
    if isinstance(spec, Attenuation):
        return GaussianTriplet(spec.eta * eye,
                               (1.0 - spec.eta ** 2) * 0.25 * eye,
                               np.zeros(2))
    if isinstance(spec, Displacement):
        return GaussianTriplet(eye, zero2,
                               np.array([spec.beta.real, spec.beta.imag]))
    if isinstance(spec, Decoherence):
        nu = math.exp(-spec.gamma * spec.tau)
        return GaussianTriplet(
            nu * eye,
            (1.0 - nu ** 2) * (2.0 * spec.n_bath + 1.0) * 0.25 * eye,
            np.zeros(2))
    if isinstance(spec, GaussianChannel):
        return spec.triplet
    raise UnsupportedProcessError(
        f"{type(spec).__name__} is not a Gaussian map")
