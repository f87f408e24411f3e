"""Tensor estimation from coherent-probe responses.

Probes live on circles: for each radius r and angle theta the probe is
alpha = r exp(i theta) per mode.  A DFT over angles splits each output
moment's response into bands of fixed angular frequency d = m - n, and the
band's radial profile divided by r^|d| is a power series in u = r^2 whose
coefficients are the tensor entries.  Each band is then a small weighted
least-squares problem in u.

Bands whose radial profile carries a smooth tail beyond the requested box
(amplifier-like processes) are refit in high-precision arithmetic with the
degree chosen by coefficient stabilization; small residuals alone do not
certify the low-order coefficients of such fits.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import mpmath as mp
import numpy as np

from .errors import (ConfigError, DegenerateProbesError, DimensionError,
                     IllConditionedPlanError, NonFiniteSampleError,
                     TruncationError, UnderDeterminedError)
from .moments import Index, MomentTable, as_index, iter_box
from .processes import GaussianTriplet, ProcessTensor

_EPS = 2.2e-16
_MP_DPS = 60


@dataclass(frozen=True)
class SamplingPlan:
    """Probe layout: radii, angles per circle, and the top moment order.

    Attributes:
        radii: Strictly increasing positive radii, one circle each.
        angular_count: Angles per circle, uniformly spaced.
        max_order: Largest total moment order m + n the plan must resolve.
    """

    radii: tuple[float, ...]
    angular_count: int
    max_order: int

    def __post_init__(self) -> None:
        radii = tuple(float(r) for r in self.radii)
        object.__setattr__(self, "radii", radii)
        if not radii or any(r <= 0 for r in radii):
            raise ConfigError("plan.radii: must be positive")
        if any(b <= a for a, b in zip(radii, radii[1:])):
            raise ConfigError("plan.radii: must be strictly increasing")
        need_r = (self.max_order + 1 + 1) // 2
        if len(radii) < need_r:
            raise ConfigError(
                f"plan.radii: need at least {need_r} radii for "
                f"max_order {self.max_order}, got {len(radii)}")
        if self.angular_count < 2 * self.max_order + 1:
            raise ConfigError(
                f"plan.angular_count: need at least {2 * self.max_order + 1} "
                f"angles for max_order {self.max_order}, got {self.angular_count}")


def default_plan(cutoff_in: int | Sequence[int], modes: int = 1,
                 radius_factor: float = 1.0) -> SamplingPlan:
    """Plan that resolves a given input box.

    Single-mode plans use many radii over a wide geometric span so that
    processes with non-polynomial radial profiles stay identifiable;
    multi-mode plans keep the probe grid small since it scales as a power
    of the per-mode count.
    """
    cin = as_index(cutoff_in, modes, "cutoff_in")
    top = max(cin)
    max_order = 2 * top
    if modes == 1:
        radii = np.geomspace(0.2, 2.5, 24)
    else:
        radii = np.geomspace(0.3, 1.6, 2 * top + 3)
    radii = tuple(float(r) * radius_factor for r in radii)
    return SamplingPlan(radii=radii, angular_count=2 * max_order + 1,
                        max_order=max_order)


def _wlsq(design: np.ndarray, g: np.ndarray, sig: np.ndarray):
    """Weighted least squares; returns coefficients in design units,
    the weighted rms residual, and per-coefficient uncertainties."""
    w = 1.0 / sig
    a = design * w[:, None]
    c, *_ = np.linalg.lstsq(a, g * w, rcond=None)
    res = a @ c - g * w
    wrms = float(np.sqrt(np.mean(np.abs(res) ** 2)))
    pinv = np.linalg.pinv(a)
    csig = np.sqrt((np.abs(pinv) ** 2).sum(axis=1)) * max(1.0, wrms)
    return c, wrms, csig


def _mono_design(t: np.ndarray, degree: int) -> np.ndarray:
    return t[:, None] ** np.arange(degree + 1)[None, :]


def _adaptive_1d(u: np.ndarray, g: np.ndarray, sig: np.ndarray,
                 s_need: int, cap: int):
    """Grow the fit degree until residuals reach the noise level or stall.

    Returns coefficients (unscaled), wrms, uncertainties, and the degree
    at which the walk stopped.
    """
    umax = u.max()
    t = u / umax
    best = None
    prev = None
    for degree in range(s_need, cap + 1):
        c, wrms, csig = _wlsq(_mono_design(t, degree), g, sig)
        scale = umax ** np.arange(degree + 1)
        if best is None or wrms < best[1]:
            best = (c / scale, wrms, csig / scale, degree)
        if wrms <= 3.0:
            break
        if prev is not None and wrms > 0.7 * prev:
            break
        prev = wrms
    return best


class _MpBand:
    """Weighted monomial solver in high-precision arithmetic.

    The design columns are shared across degrees so a degree walk costs
    one normal-equations solve per degree.
    """

    def __init__(self, u: np.ndarray, g: np.ndarray, sig: np.ndarray,
                 cap: int) -> None:
        self.cap = cap
        self.umax = float(u.max())
        with mp.workdps(_MP_DPS):
            t = [mp.mpf(float(x)) / self.umax for x in u]
            self.w = [1.0 / mp.mpf(float(x)) for x in sig]
            self.b = [mp.mpc(complex(v)) * wi for v, wi in zip(g, self.w)]
            self.cols = []
            cur = list(self.w)
            for _ in range(cap + 1):
                self.cols.append(cur)
                cur = [c * ti for c, ti in zip(cur, t)]

    def solve(self, degree: int) -> np.ndarray:
        with mp.workdps(_MP_DPS):
            n = len(self.b)
            a = mp.matrix(n, degree + 1)
            for s in range(degree + 1):
                for i in range(n):
                    a[i, s] = self.cols[s][i]
            gram = a.T * a
            rhs = a.T * mp.matrix([[v] for v in self.b])
            c = mp.lu_solve(gram, rhs)
            cc = np.array([complex(c[s]) for s in range(degree + 1)])
        return cc / (self.umax ** np.arange(degree + 1))

    def stabilized(self, keep: int) -> np.ndarray:
        """Coefficients at the degree where the kept head stops moving."""
        best = None
        prev = None
        since = 0
        for degree in range(keep, self.cap + 1):
            head = self.solve(degree)[: keep + 1]
            if prev is not None:
                delta = float(np.max(np.abs(head - prev)))
                if best is None or delta < best[1]:
                    best = (head, delta)
                    since = 0
                else:
                    since += 1
                    if since >= 4:
                        break
            prev = head
        return best[0] if best is not None else prev


def _fit_band_1d(u: np.ndarray, g: np.ndarray, sig: np.ndarray,
                 s_need: int, noisy_band: bool) -> tuple[np.ndarray, bool]:
    """Estimate series coefficients c_0..c_{s_need} of one radial band."""
    cap = len(u) - 2
    c, wrms, csig, d_stop = _adaptive_1d(u, g, sig, s_need, cap)
    cmax = np.abs(c[: s_need + 1]).max() + 1e-300
    s_min = 0
    for s in range(s_need + 1):
        if abs(c[s]) > max(1e-8 * cmax, 20.0 * csig[s]):
            break
        s_min += 1
    if s_min > s_need:
        return np.zeros(s_need + 1, complex), False
    keep = s_need - s_min
    if s_min > 0:
        g2 = u ** -s_min * g
        sig2 = u ** -s_min * sig
        c2, wrms, csig2, d_stop = _adaptive_1d(u, g2, sig2, keep, cap)
        c = np.concatenate([np.zeros(s_min, complex), c2])
        csig = np.concatenate([np.zeros(s_min), csig2])
        d_stop += s_min
    else:
        g2, sig2 = g, sig
    escalate = not noisy_band and (d_stop > s_need or wrms > 30.0)
    if escalate:
        head = _MpBand(u, g2, sig2, cap).stabilized(keep)
        c = np.concatenate([np.zeros(s_min, complex), head])
    out = c[: s_need + 1].copy()
    top = np.abs(out).max()
    for s in range(s_min, s_need + 1):
        floor = 1e-12 * top if escalate else 20.0 * csig[s]
        if abs(out[s]) < floor:
            out[s] = 0.0
    return out, escalate


def _fit_band_nd(us: np.ndarray, g: np.ndarray, sig: np.ndarray,
                 s_need: Index, caps0: Index,
                 r_count: int) -> dict[Index, complex]:
    """Tensor-product monomial fit for a multi-mode band.

    The initial caps cover the full polynomial content of the response
    (which extends past the requested box); the loop grows them further
    only if residuals stay above the noise level.
    """
    umax = us.max(axis=0)
    t = us / umax
    caps = [min(max(s, c), r_count - 2) for s, c in zip(s_need, caps0)]
    while True:
        grid = list(itertools.product(*(range(c + 1) for c in caps)))
        design = np.stack([np.prod(t ** np.array(sv), axis=1) for sv in grid],
                          axis=1)
        c, wrms, csig = _wlsq(design, g, sig)
        if wrms <= 3.0 or all(cp >= r_count - 2 for cp in caps):
            break
        caps = [min(cp + 1, r_count - 2) for cp in caps]
    out: dict[Index, complex] = {}
    for sv, cv, cs in zip(grid, c, csig):
        scale = float(np.prod(umax ** np.array(sv)))
        cv = cv / scale
        cs = cs / scale
        if all(x <= need for x, need in zip(sv, s_need)) and abs(cv) >= 20.0 * cs:
            out[tuple(sv)] = complex(cv)
    return out


def _normalize_boxes(cutoffs) -> tuple[Index, Index, int]:
    try:
        out_raw, in_raw = cutoffs
    except (TypeError, ValueError):
        raise ConfigError(
            "cutoffs: expected a (cutoff_out, cutoff_in) pair") from None
    if isinstance(out_raw, (int, np.integer)):
        out_c = (int(out_raw),)
    else:
        out_c = tuple(int(v) for v in out_raw)
    modes = len(out_c)
    in_c = as_index(in_raw, modes, "cutoff_in")
    if any(v < 0 for v in out_c):
        raise ConfigError(f"cutoffs: must be nonnegative, got {cutoffs}")
    return out_c, in_c, modes


def estimate_tensor(response: Callable, plan: SamplingPlan,
                    cutoffs) -> ProcessTensor:
    """Estimate a process tensor from probe responses.

    Args:
        response: Callable taking one probe amplitude (complex for one
            mode, a tuple for several) and returning the output MomentTable
            covering the output box.
        plan: Sampling plan, applied per mode.
        cutoffs: (cutoff_out, cutoff_in); ints or per-mode tuples.

    Returns:
        Dense ProcessTensor over the requested boxes.  Metadata records
        the probe count, per-band conditioning, noise scale seen, and how
        many bands needed high-precision refits.

    Raises:
        IllConditionedPlanError: If some band's minimal design exceeds
            condition 1e10.
        NonFiniteSampleError: If a response contains NaN or infinity.
    """
    out_c, in_c, modes = _normalize_boxes(cutoffs)
    if 2 * max(in_c) > plan.max_order:
        raise ConfigError(
            f"plan.max_order: {plan.max_order} cannot resolve input cutoff "
            f"{in_c}; need at least {2 * max(in_c)}")
    radii = np.asarray(plan.radii)
    n_r = len(radii)
    n_t = plan.angular_count
    thetas = 2.0 * np.pi * np.arange(n_t) / n_t
    out_pairs = [(j, k) for j in iter_box(out_c) for k in iter_box(out_c)]
    pair_pos = {p: i for i, p in enumerate(out_pairs)}

    samp = np.zeros((len(out_pairs),) + (n_r,) * modes + (n_t,) * modes,
                    complex)
    for r_multi in itertools.product(range(n_r), repeat=modes):
        for t_multi in itertools.product(range(n_t), repeat=modes):
            amps = tuple(radii[ri] * np.exp(1j * thetas[ti])
                         for ri, ti in zip(r_multi, t_multi))
            probe = amps[0] if modes == 1 else amps
            table = response(probe)
            loc = r_multi + t_multi
            for p, (j, k) in enumerate(out_pairs):
                v = complex(table.entries.get((j, k), 0.0))
                if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                    raise NonFiniteSampleError(
                        f"non-finite response for moment (j={j}, k={k}) "
                        f"at probe {probe}")
                samp[(p,) + loc] = v

    angle_axes = tuple(range(1 + modes, 1 + 2 * modes))
    fhat = np.fft.fftn(samp, axes=angle_axes) / float(n_t) ** modes
    env = np.abs(samp).max(axis=angle_axes)
    gscale = float(env.max()) + 1e-300

    half = (n_t - 1) // 2
    u = radii ** 2
    us = np.array(list(itertools.product(u, repeat=modes)))
    r_flat = np.array(list(itertools.product(radii, repeat=modes)))

    cond_cache: dict[Index, float] = {}

    def plan_condition(s_need: Index) -> float:
        if s_need not in cond_cache:
            t = us / us.max(axis=0)
            grid = itertools.product(*(range(s + 1) for s in s_need))
            design = np.stack([np.prod(t ** np.array(sv), axis=1)
                               for sv in grid], axis=1)
            cond_cache[s_need] = float(np.linalg.cond(design))
        return cond_cache[s_need]

    entries: dict[tuple[Index, Index, Index, Index], complex] = {}
    mp_bands = 0
    noisy_bands = 0
    max_cond = 0.0
    max_eta_rel = 0.0

    content_bound = [in_c[s] if modes == 1 else sum(out_c)
                     for s in range(modes)]
    for p, (j, k) in enumerate(out_pairs):
        block = fhat[p]
        env_p = env[p].reshape(-1)
        idle_sets = []
        for s in range(modes):
            idle_sets.append([b for b in range(n_t)
                              if content_bound[s] < min(b, n_t - b) <= half])
        if all(idle_sets):
            idle_block = block
            for ax, idle in enumerate(idle_sets):
                idle_block = np.take(idle_block, idle, axis=modes + ax)
            eta = np.sqrt(np.mean(np.abs(idle_block) ** 2,
                                  axis=tuple(range(modes, 2 * modes))))
            eta = eta.reshape(-1)
        else:
            eta = np.zeros(n_r ** modes)
        ref = float(np.max(env_p)) + 1e-300
        max_eta_rel = max(max_eta_rel, float(np.max(eta)) / ref)
        noisy_band = bool(np.any(eta > 50.0 * _EPS * (env_p + 1e-300)))
        if noisy_band:
            noisy_bands += 1

        for d_vec in itertools.product(*(range(-c, c + 1) for c in in_c)):
            s_need = tuple(c - abs(d) for c, d in zip(in_c, d_vec))
            cond = plan_condition(s_need)
            max_cond = max(max_cond, cond)
            if cond > 1e10:
                raise IllConditionedPlanError(
                    f"sampling plan cannot resolve band d={d_vec}: "
                    f"condition {cond:.3e} exceeds 1e10")
            sel = tuple(d % n_t for d in d_vec)
            y = block[(slice(None),) * modes + sel].reshape(-1)
            rp = np.prod(r_flat ** np.abs(np.array(d_vec)), axis=1)
            gv = y / rp
            sig = (3e-16 * env_p / rp + 3e-16 * np.abs(gv)
                   + 1e-18 * gscale + 2.0 * eta / rp + 1e-300)
            if np.max(np.abs(gv) / sig) < 4.0:
                continue
            if modes == 1:
                coeffs, used_mp = _fit_band_1d(u, gv, sig, s_need[0],
                                               noisy_band)
                if used_mp:
                    mp_bands += 1
                found = {(s,): coeffs[s] for s in range(s_need[0] + 1)
                         if coeffs[s] != 0}
            else:
                caps0 = tuple(max(s, sum(out_c) - abs(d))
                              for s, d in zip(s_need, d_vec))
                found = _fit_band_nd(us, gv, sig, s_need, caps0, n_r)
            for sv, cv in found.items():
                mm = tuple(s + max(d, 0) for s, d in zip(sv, d_vec))
                nn = tuple(s + max(-d, 0) for s, d in zip(sv, d_vec))
                entries[(j, k, mm, nn)] = cv

    dense: dict[tuple[Index, Index, Index, Index], complex] = {}
    for j in iter_box(out_c):
        for k in iter_box(out_c):
            for mm in iter_box(in_c):
                for nn in iter_box(in_c):
                    dense[(j, k, mm, nn)] = complex(
                        entries.get((j, k, mm, nn), 0.0))
    meta = {
        "source": "estimate",
        "probes": int(n_r ** modes * n_t ** modes),
        "max_band_condition": max_cond,
        "mp_bands": mp_bands,
        "noisy_bands": noisy_bands,
        "noise_to_signal": max_eta_rel,
    }
    return ProcessTensor(modes, out_c, in_c, dense, meta)


def noisy_response(base: Callable, sigma: float, seed: int) -> Callable:
    """Wrap a response with additive complex Gaussian noise.

    Each table entry M gains independent noise of standard deviation
    sigma * (1 + |M|), split evenly between real and imaginary parts.
    Entries are perturbed in sorted index order, so a fixed seed and a
    fixed probe order reproduce the same samples exactly.
    """
    if sigma < 0:
        raise ConfigError(f"noise.sigma: must be >= 0, got {sigma}")
    rng = np.random.default_rng(seed)

    def wrapped(alpha):
        table = base(alpha)
        noisy_entries = {}
        for key in sorted(table.entries):
            v = complex(table.entries[key])
            s = sigma * (1.0 + abs(v)) / math.sqrt(2.0)
            v += complex(rng.normal(0.0, s), rng.normal(0.0, s)) if sigma > 0 else 0.0
            noisy_entries[key] = v
        return MomentTable(table.modes, table.cutoff, noisy_entries,
                           dict(table.meta))

    return wrapped


@dataclass
class ResourceMatrix:
    """Probe-mean design matrix for Gaussian identification.

    Rows are (x_1, p_1, ..., x_m, p_m, 1) per probe; ``cond`` is its
    condition number and ``invertible`` records whether the system is
    usable (enough probes, condition below 1e12).
    """

    matrix: np.ndarray
    cond: float
    invertible: bool


def _probe_means(probes, modes: int) -> np.ndarray:
    """Normalize probes to quadrature-mean rows.

    Accepts 2m-vectors of quadrature means, or complex amplitudes (one
    scalar per mode, also plain numbers for one mode).
    """
    rows = []
    for pr in probes:
        if np.isscalar(pr):
            if modes != 1:
                raise DimensionError(
                    f"scalar probe given for {modes} modes")
            c = complex(pr)
            rows.append(np.array([c.real, c.imag]))
            continue
        arr = np.asarray(pr).reshape(-1)
        if np.iscomplexobj(arr) or arr.shape[0] == modes:
            if arr.shape[0] != modes:
                raise DimensionError(
                    f"probe has {arr.shape[0]} amplitudes, expected {modes}")
            mean = np.empty(2 * modes)
            for s in range(modes):
                mean[2 * s] = complex(arr[s]).real
                mean[2 * s + 1] = complex(arr[s]).imag
        else:
            mean = arr.astype(float)
            if mean.shape[0] != 2 * modes:
                raise DimensionError(
                    f"probe mean length {mean.shape[0]}, expected {2 * modes}")
        rows.append(mean)
    return np.array(rows)


def resource_matrix(probes, modes: int) -> ResourceMatrix:
    """Design matrix of probe means, with conditioning diagnostics."""
    means = _probe_means(probes, modes)
    mat = np.hstack([means, np.ones((means.shape[0], 1))])
    sv = np.linalg.svd(mat, compute_uv=False)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else float("inf")
    invertible = mat.shape[0] >= 2 * modes + 1 and cond <= 1e12
    return ResourceMatrix(mat, cond, invertible)


def default_gaussian_probes(modes: int) -> list[np.ndarray]:
    """Vacuum plus one unit displacement per quadrature: 2m + 1 probes."""
    probes = [np.zeros(2 * modes)]
    for s in range(2 * modes):
        e = np.zeros(2 * modes)
        e[s] = 1.0
        probes.append(e)
    return probes


@dataclass
class IdentificationResult:
    triplet: GaussianTriplet
    cond: float
    residual: float


def identify_gaussian(probe_means_in, probe_means_out,
                      output_cov) -> IdentificationResult:
    """Recover a Gaussian map from probe means and one output covariance.

    The scale and shift solve the affine system built from probe means;
    with exactly 2m + 1 probes the solve is exact, with more it is least
    squares.  The noise matrix follows from one measured output covariance
    of a coherent probe: noise = cov_out - scale scale^T / 4.

    Raises:
        UnderDeterminedError: Fewer than 2m + 1 probes.
        DegenerateProbesError: Collinear probe means (condition > 1e12).
    """
    cov_out = np.asarray(output_cov, dtype=float)
    if cov_out.ndim != 2 or cov_out.shape[0] != cov_out.shape[1] \
            or cov_out.shape[0] % 2:
        raise DimensionError(f"output covariance shape {cov_out.shape} invalid")
    modes = cov_out.shape[0] // 2
    means_in = _probe_means(probe_means_in, modes)
    means_out = _probe_means(probe_means_out, modes)
    if means_out.shape != means_in.shape:
        raise DimensionError(
            f"{means_in.shape[0]} input probes but {means_out.shape[0]} outputs")
    n_probes = means_in.shape[0]
    need = 2 * modes + 1
    if n_probes < need:
        raise UnderDeterminedError(
            f"gaussian identification needs at least {need} probes "
            f"for {modes} mode(s), got {n_probes}")
    res = resource_matrix(means_in, modes)
    if res.cond > 1e12:
        raise DegenerateProbesError(
            f"probe means are collinear: resource matrix condition "
            f"{res.cond:.3e} exceeds 1e12")
    if n_probes == need:
        sol = np.linalg.solve(res.matrix, means_out)
    else:
        sol, *_ = np.linalg.lstsq(res.matrix, means_out, rcond=None)
    scale = sol[: 2 * modes].T
    shift = sol[2 * modes]
    noise = cov_out - scale @ (0.25 * np.eye(2 * modes)) @ scale.T
    noise = 0.5 * (noise + noise.T)
    residual = float(np.max(np.abs(res.matrix @ sol - means_out)))
    return IdentificationResult(
        GaussianTriplet(scale, noise, shift), res.cond, residual)


def _conv_weight(j: int, k: int, ell: int, s: int, m: int, n: int) -> float:
    return ((-1.0) ** s / (math.factorial(s) * math.factorial(ell))
            * math.sqrt(math.factorial(j + ell) * math.factorial(k + ell)
                        / (math.factorial(m - s) * math.factorial(n - s))))


def fock_to_moment(fock: ProcessTensor, cutoffs, tol: float = 1e-9) -> ProcessTensor:
    """Convert a number-basis process tensor to the moment picture.

    ``fock`` holds matrix elements F[(j,k),(m,n)] = <j| E(|m><n|) |k> on a
    shared box.  The conversion sums ladder contributions up to the box
    edge.  The recorded tail estimate is the largest change any interior
    entry would see if the box shrank by one (the last ladder term), and
    must stay below ``tol``; entries touching the box edge follow the
    shared-box truncation convention and carry no estimate.

    Raises:
        TruncationError: If the recorded tail estimate exceeds ``tol``.
        DimensionError: For multi-mode tensors.
    """
    if fock.modes != 1:
        raise DimensionError("number-basis conversion supports a single mode")
    out_c, in_c, modes = _normalize_boxes(cutoffs)
    if modes != 1:
        raise DimensionError("number-basis conversion supports a single mode")
    box = min(fock.cutoff_out[0], fock.cutoff_in[0])
    entries: dict[tuple[Index, Index, Index, Index], complex] = {}
    tail = 0.0
    scale = max((abs(v) for v in fock.entries.values()), default=1.0)
    for j in range(out_c[0] + 1):
        for k in range(out_c[0] + 1):
            ell_max = box - max(j, k)
            for m in range(in_c[0] + 1):
                for n in range(in_c[0] + 1):
                    acc = 0.0 + 0.0j
                    last = 0.0
                    for ell in range(ell_max + 1):
                        term_ell = 0.0 + 0.0j
                        for s in range(min(m, n) + 1):
                            fv = fock.entries.get(
                                ((j + ell,), (k + ell,), (m - s,), (n - s,)),
                                0.0)
                            term_ell += _conv_weight(j, k, ell, s, m, n) * fv
                        acc += term_ell
                        last = abs(term_ell)
                    entries[((j,), (k,), (m,), (n,))] = complex(acc)
                    if ell_max >= 1 and m < box and n < box:
                        tail = max(tail, last)
    tail_rel = tail / (scale + 1e-300)
    if tail_rel > tol:
        raise TruncationError(
            f"number-basis box {box} too small: tail estimate {tail_rel:.3e} "
            f"exceeds tolerance {tol:.1e}")
    return ProcessTensor(1, out_c, in_c, entries,
                         meta={"source": "fock_to_moment",
                               "tail_estimate": tail_rel})


def moment_to_fock(tensor: ProcessTensor, box: int) -> ProcessTensor:
    """Invert the moment-picture conversion back to the number basis.

    Solves the triangular system on the shared box 0..box by back
    substitution, descending in output order and ascending in input order.

    Raises:
        DimensionError: If the tensor box does not cover the target box,
            or for multi-mode tensors.
    """
    if tensor.modes != 1:
        raise DimensionError("number-basis conversion supports a single mode")
    if tensor.cutoff_out[0] < box or tensor.cutoff_in[0] < box:
        raise DimensionError(
            f"moment tensor box (out={tensor.cutoff_out[0]}, "
            f"in={tensor.cutoff_in[0]}) does not cover requested box {box}")
    fock: dict[tuple[Index, Index, Index, Index], complex] = {}

    def fval(j, k, m, n):
        if min(j, k, m, n) < 0 or max(j, k) > box or max(m, n) > box:
            return 0.0 + 0.0j
        return fock.get(((j,), (k,), (m,), (n,)), 0.0 + 0.0j)

    outs = sorted(((j, k) for j in range(box + 1) for k in range(box + 1)),
                  key=lambda p: (-(p[0] + p[1]), p))
    for j, k in outs:
        ins = sorted(((m, n) for m in range(box + 1) for n in range(box + 1)),
                     key=lambda p: (p[0] + p[1], p))
        for m, n in ins:
            acc = complex(tensor.entries.get(((j,), (k,), (m,), (n,)), 0.0))
            ell_max = box - max(j, k)
            for ell in range(ell_max + 1):
                for s in range(min(m, n) + 1):
                    if ell == 0 and s == 0:
                        continue
                    acc -= _conv_weight(j, k, ell, s, m, n) \
                        * fval(j + ell, k + ell, m - s, n - s)
            diag = _conv_weight(j, k, 0, 0, m, n)
            fock[((j,), (k,), (m,), (n,))] = acc / diag
    return ProcessTensor(1, (box,), (box,), fock,
                         meta={"source": "moment_to_fock"})
