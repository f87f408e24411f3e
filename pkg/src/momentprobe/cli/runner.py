"""Experiment orchestration: build, run, compare, report.

Reports serialize deterministically: same config and seed give the same
bytes.  Wall-clock timings are kept on the in-memory report object only,
never in the serialized payload.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionError, UndefinedForVacuumError
from ..moments import MomentTable, iter_box
from ..nonclassicality import diagnose
from ..processes import (GaussianChannel, ProcessTensor, ProcessSpec,
                         as_gaussian_triplet, catalog_tensor, output_moments,
                         process_modes)
from ..serialize import (canonical_json, moment_table_to_csv,
                         process_tensor_to_csv, process_tensor_to_dict,
                         triplet_to_csv, triplet_to_dict)
from ..tomography import (default_gaussian_probes, estimate_tensor,
                          identify_gaussian, noisy_response, resource_matrix)
from .config import ExperimentConfig


@dataclass
class RunReport:
    """Outcome of one experiment.

    ``payload`` is the deterministic, serializable body; ``elapsed_seconds``
    stays in memory so reports are byte-identical across runs.
    """

    experiment: str
    payload: dict
    csv_body: str | None = None
    elapsed_seconds: float = 0.0

    def to_json(self) -> str:
        return canonical_json(self.payload)

    def to_csv(self) -> str:
        if self.csv_body is None:
            raise DimensionError(
                f"experiment {self.experiment} has no CSV form")
        return self.csv_body


def process_to_dict(spec: ProcessSpec) -> dict:
    kind = {
        "Identity": "identity", "Attenuation": "attenuation",
        "Displacement": "displacement", "PhotonAdd": "photon_add",
        "PhotonSub": "photon_sub", "BeamSplitter": "beam_splitter",
        "CatGeneration": "cat", "NLA": "nla", "Decoherence": "decoherence",
        "GaussianChannel": "gaussian",
    }[type(spec).__name__]
    out: dict = {"kind": kind}
    if kind == "attenuation":
        out["eta"] = spec.eta
    elif kind == "displacement":
        out["beta"] = [spec.beta.real, spec.beta.imag]
    elif kind == "beam_splitter":
        out["t"], out["r"] = spec.t, spec.r
    elif kind == "nla":
        out["gain"], out["scissors"] = spec.gain, spec.scissors
        out["vacuum_branch"] = spec.vacuum_branch
    elif kind == "decoherence":
        out["n_bath"], out["gamma"], out["tau"] = (spec.n_bath, spec.gamma,
                                                   spec.tau)
    elif kind == "gaussian":
        out.update(triplet_to_dict(spec.triplet))
    return out


def compare_tensors(a: ProcessTensor, b: ProcessTensor) -> dict:
    """Entrywise comparison over the common index box.

    Returns max-abs and Frobenius errors, the worst index, and the full
    per-entry error table.

    Raises:
        DimensionError: Mode counts differ (no common box).
    """
    if a.modes != b.modes:
        raise DimensionError(
            f"tensors have {a.modes} and {b.modes} modes; no common box")
    out_c = tuple(min(x, y) for x, y in zip(a.cutoff_out, b.cutoff_out))
    in_c = tuple(min(x, y) for x, y in zip(a.cutoff_in, b.cutoff_in))
    max_err = 0.0
    sq = 0.0
    worst = None
    per_entry = []
    count = 0
    for j in iter_box(out_c):
        for k in iter_box(out_c):
            for m in iter_box(in_c):
                for n in iter_box(in_c):
                    va = complex(a.entries.get((j, k, m, n), 0.0))
                    vb = complex(b.entries.get((j, k, m, n), 0.0))
                    err = abs(va - vb)
                    sq += err * err
                    count += 1
                    per_entry.append({"jk": list(j) + list(k),
                                      "mn": list(m) + list(n),
                                      "abs_error": err})
                    if err > max_err:
                        max_err = err
                        worst = {"jk": list(j) + list(k),
                                 "mn": list(m) + list(n)}
    return {
        "max_abs_error": max_err,
        "frobenius_error": math.sqrt(sq),
        "worst_index": worst,
        "entries_compared": count,
        "per_entry": per_entry,
    }


def _base_response(spec: ProcessSpec, cutoff_out):
    modes = process_modes(spec)
    pairs = [(j, k) for j in iter_box(cutoff_out) for k in iter_box(cutoff_out)]

    def base(alpha):
        entries = {}
        for j, k in pairs:
            entries[(j, k)] = output_moments(spec, alpha, (j, k))
        return MomentTable(modes, cutoff_out, entries)

    return base


def _run_tomography(config: ExperimentConfig) -> RunReport:
    spec = config.process
    response = _base_response(spec, config.cutoff_out)
    if config.sigma > 0:
        response = noisy_response(response, config.sigma, config.seed)
    est = estimate_tensor(response, config.plan,
                          (config.cutoff_out, config.cutoff_in))
    payload = {
        "experiment": "tomography",
        "process": process_to_dict(spec),
        "noise": {"sigma": config.sigma, "seed": config.seed},
        "cutoffs": {"out": list(config.cutoff_out),
                    "in": list(config.cutoff_in)},
        "plan": {"radii": list(config.plan.radii),
                 "angular_count": config.plan.angular_count,
                 "max_order": config.plan.max_order},
        "tensor": process_tensor_to_dict(est),
        "conditioning": {
            "max_band_condition": est.meta["max_band_condition"],
            "mp_bands": est.meta["mp_bands"],
            "noisy_bands": est.meta["noisy_bands"],
            "noise_to_signal": est.meta["noise_to_signal"],
        },
    }
    if not isinstance(spec, GaussianChannel):
        truth = catalog_tensor(spec, (config.cutoff_out, config.cutoff_in))
        payload["comparison"] = compare_tensors(est, truth)
    return RunReport("tomography", payload,
                     csv_body=process_tensor_to_csv(est))


def _run_gaussian_id(config: ExperimentConfig) -> RunReport:
    spec = config.process
    truth = as_gaussian_triplet(spec)
    modes = truth.scale.shape[0] // 2
    if config.probes is not None:
        probes = [np.asarray(p, dtype=float) for p in config.probes]
    else:
        probes = default_gaussian_probes(modes)
    means_in = np.array([np.asarray(p, dtype=float).reshape(-1)
                         for p in probes])
    means_out = means_in @ truth.scale.T + truth.shift
    if config.sigma > 0:
        rng = np.random.default_rng(config.seed)
        means_out = means_out + rng.normal(0.0, config.sigma,
                                           size=means_out.shape)
    cov_out = truth.scale @ (0.25 * np.eye(2 * modes)) @ truth.scale.T \
        + truth.noise
    result = identify_gaussian(means_in, means_out, cov_out)
    got = result.triplet
    err = max(float(np.max(np.abs(got.scale - truth.scale))),
              float(np.max(np.abs(got.noise - truth.noise))),
              float(np.max(np.abs(got.shift - truth.shift))))
    payload = {
        "experiment": "gaussian_id",
        "process": process_to_dict(spec),
        "noise": {"sigma": config.sigma, "seed": config.seed},
        "probes": [[float(v) for v in p] for p in means_in],
        "triplet": triplet_to_dict(got, cond=result.cond),
        "comparison": {"max_abs_error": err},
        "conditioning": {"resource_matrix": result.cond,
                         "fit_residual": result.residual},
    }
    return RunReport("gaussian_id", payload, csv_body=triplet_to_csv(got))


def _run_catalog_dump(config: ExperimentConfig) -> RunReport:
    tensor = catalog_tensor(config.process,
                            (config.cutoff_out, config.cutoff_in))
    payload = {
        "experiment": "catalog_dump",
        "process": process_to_dict(config.process),
        "cutoffs": {"out": list(config.cutoff_out),
                    "in": list(config.cutoff_in)},
        "tensor": process_tensor_to_dict(tensor),
    }
    return RunReport("catalog_dump", payload,
                     csv_body=process_tensor_to_csv(tensor))


def _run_diagnostics(config: ExperimentConfig) -> RunReport:
    spec = config.process
    if process_modes(spec) != 1:
        raise DimensionError("diagnostics supports single-mode processes")
    if config.probes:
        alpha = complex(float(config.probes[0][0]), float(config.probes[0][1])) \
            if isinstance(config.probes[0], (list, tuple)) \
            else complex(config.probes[0])
    else:
        alpha = 1.0 + 0.0j
    cutoff = (max(2, config.cutoff_out[0]),)
    table = _base_response(spec, cutoff)(alpha)
    weight = table.value(0, 0)
    if abs(weight) == 0:
        raise UndefinedForVacuumError(
            "output has zero weight at this probe; witnesses undefined")
    if abs(weight - 1.0) > 1e-14:
        table = MomentTable(1, cutoff,
                            {key: v / weight
                             for key, v in table.entries.items()},
                            {"normalized_by": weight.real})
    report = diagnose(table)
    payload = {
        "experiment": "diagnostics",
        "process": process_to_dict(spec),
        "probe": [alpha.real, alpha.imag],
        "diagnostics": report.to_dict(),
    }
    return RunReport("diagnostics", payload,
                     csv_body=moment_table_to_csv(table))


def run(config: ExperimentConfig) -> RunReport:
    """Execute one configured experiment and build its report."""
    start = time.perf_counter()
    if config.experiment == "tomography":
        report = _run_tomography(config)
    elif config.experiment == "gaussian_id":
        report = _run_gaussian_id(config)
    elif config.experiment == "catalog_dump":
        report = _run_catalog_dump(config)
    else:
        report = _run_diagnostics(config)
    report.elapsed_seconds = time.perf_counter() - start
    return report
