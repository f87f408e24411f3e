"""Experiment configuration: loading, overrides, validation.

A config is one TOML or JSON file selected by extension.  Command-line
overrides use dot paths (``--plan.angular_count=33``); values parse as
JSON literals with a plain-string fallback.
"""
from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..errors import ConfigError
from ..processes import (NLA, Attenuation, BeamSplitter, CatGeneration,
                         Decoherence, Displacement, GaussianChannel,
                         GaussianTriplet, Identity, PhotonAdd, PhotonSub,
                         ProcessSpec, process_modes)
from ..tomography import SamplingPlan, default_plan

EXPERIMENTS = ("tomography", "gaussian_id", "catalog_dump", "diagnostics")


@dataclass
class ExperimentConfig:
    """Validated experiment description.

    Attributes:
        experiment: One of tomography, gaussian_id, catalog_dump,
            diagnostics.
        process: Built process, None only when a raw triplet was given.
        plan: Sampling plan (tomography only).
        sigma: Noise level applied to simulated measurements.
        seed: Noise seed.
        cutoff_out: Output index box, per mode.
        cutoff_in: Input index box, per mode.
        probes: Probe means for identification, or the single probe
            amplitude used by diagnostics.
        out_path: Report destination, None for stdout.
        out_format: "json" or "csv".
    """

    experiment: str
    process: ProcessSpec | None
    plan: SamplingPlan | None
    sigma: float
    seed: int
    cutoff_out: tuple[int, ...]
    cutoff_in: tuple[int, ...]
    probes: list | None
    out_path: str | None
    out_format: str
    raw: dict = field(default_factory=dict)


def load_config_file(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {path}")
    suffix = p.suffix.lower()
    try:
        if suffix == ".toml":
            with open(p, "rb") as fh:
                return tomllib.load(fh)
        if suffix == ".json":
            with open(p, "r", encoding="utf-8") as fh:
                return json.load(fh)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    raise ConfigError(f"config extension must be .toml or .json, got {path}")


def apply_overrides(data: dict, overrides: list[str]) -> dict:
    """Apply ``path.to.field=value`` assignments onto a config dict."""
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override must look like a.b=value, got {item!r}")
        dotted, _, raw_val = item.partition("=")
        dotted = dotted.lstrip("-")
        if not dotted:
            raise ConfigError(f"override has empty field path: {item!r}")
        try:
            value = json.loads(raw_val)
        except json.JSONDecodeError:
            value = raw_val
        node = data
        parts = dotted.split(".")
        for part in parts[:-1]:
            nxt = node.get(part)
            if not isinstance(nxt, dict):
                nxt = {}
                node[part] = nxt
            node = nxt
        node[parts[-1]] = value
    return data


def _as_complex(value, where: str) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, str):
        try:
            return complex(value.replace(" ", ""))
        except ValueError:
            raise ConfigError(f"{where}: cannot parse complex {value!r}") from None
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise ConfigError(f"{where}: expected number, [re, im], or string")


def _get_number(node: dict, key: str, where: str, default=None) -> float:
    if key not in node:
        if default is not None:
            return default
        raise ConfigError(f"{where}.{key}: required")
    v = node[key]
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise ConfigError(f"{where}.{key}: expected a number, got {v!r}")
    return float(v)


_PROCESS_KINDS = ("identity", "attenuation", "displacement", "photon_add",
                  "photon_sub", "beam_splitter", "cat", "nla", "decoherence",
                  "gaussian")


def build_process(node: dict) -> ProcessSpec:
    """Construct a process from its config table."""
    if not isinstance(node, dict):
        raise ConfigError("process: expected a table")
    kind = node.get("kind")
    if kind not in _PROCESS_KINDS:
        raise ConfigError(
            f"process.kind: expected one of {', '.join(_PROCESS_KINDS)}, "
            f"got {kind!r}")
    if kind == "identity":
        return Identity()
    if kind == "attenuation":
        return Attenuation(eta=_get_number(node, "eta", "process"))
    if kind == "displacement":
        if "beta" not in node:
            raise ConfigError("process.beta: required")
        return Displacement(beta=_as_complex(node["beta"], "process.beta"))
    if kind == "photon_add":
        return PhotonAdd()
    if kind == "photon_sub":
        return PhotonSub()
    if kind == "beam_splitter":
        return BeamSplitter(t=_get_number(node, "t", "process"),
                            r=_get_number(node, "r", "process"))
    if kind == "cat":
        return CatGeneration()
    if kind == "nla":
        return NLA(gain=_get_number(node, "gain", "process"),
                   scissors=int(_get_number(node, "scissors", "process")),
                   vacuum_branch=bool(node.get("vacuum_branch", True)))
    if kind == "decoherence":
        return Decoherence(n_bath=_get_number(node, "n_bath", "process"),
                           gamma=_get_number(node, "gamma", "process"),
                           tau=_get_number(node, "tau", "process"))
    for key in ("S", "E_noise", "D"):
        if key not in node:
            raise ConfigError(f"process.{key}: required for gaussian")
    try:
        triplet = GaussianTriplet(np.array(node["S"], dtype=float),
                                  np.array(node["E_noise"], dtype=float),
                                  np.array(node["D"], dtype=float))
    except ValueError as exc:
        raise ConfigError(f"process: {exc}") from None
    return GaussianChannel(triplet)


def _build_cutoffs(node, modes: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    default = 2 if modes > 1 else 4

    def one(v, name):
        if isinstance(v, (int, float)):
            return (int(v),) * modes
        if isinstance(v, (list, tuple)) and len(v) == modes:
            return tuple(int(x) for x in v)
        raise ConfigError(
            f"cutoffs.{name}: expected an int or {modes} ints, got {v!r}")

    if node is None:
        return (default,) * modes, (default,) * modes
    if isinstance(node, (int, float)):
        c = one(node, "value")
        return c, c
    if isinstance(node, (list, tuple)) and len(node) == 2:
        return one(node[0], "out"), one(node[1], "in")
    if isinstance(node, dict):
        out = one(node.get("out", default), "out")
        cin = one(node.get("in", default), "in")
        return out, cin
    raise ConfigError(f"cutoffs: expected int, [out, in], or table, got {node!r}")


def _build_plan(node, cutoff_in: tuple[int, ...], modes: int) -> SamplingPlan:
    if node is None:
        node = {}
    if not isinstance(node, dict):
        raise ConfigError("plan: expected a table")
    factor = _get_number(node, "radius_factor", "plan", default=1.0)
    base = default_plan(cutoff_in, modes, radius_factor=factor)
    radii = node.get("radii")
    if radii is not None:
        if not isinstance(radii, (list, tuple)):
            raise ConfigError("plan.radii: expected a list of numbers")
        radii = tuple(float(r) for r in radii)
    else:
        radii = base.radii
    count = int(_get_number(node, "angular_count", "plan",
                            default=base.angular_count))
    order = int(_get_number(node, "max_order", "plan",
                            default=base.max_order))
    return SamplingPlan(radii=radii, angular_count=count, max_order=order)


def validate_config(data: dict) -> ExperimentConfig:
    """Check the raw config dict and build typed pieces.

    Raises ConfigError naming the offending field path.
    """
    if not isinstance(data, dict):
        raise ConfigError("config: expected a table at top level")
    experiment = data.get("experiment")
    if experiment not in EXPERIMENTS:
        raise ConfigError(
            f"experiment: expected one of {', '.join(EXPERIMENTS)}, "
            f"got {experiment!r}")

    noise = data.get("noise", {})
    if not isinstance(noise, dict):
        raise ConfigError("noise: expected a table")
    sigma = _get_number(noise, "sigma", "noise", default=0.0)
    if sigma < 0:
        raise ConfigError(f"noise.sigma: must be >= 0, got {sigma}")
    seed = int(_get_number(noise, "seed", "noise", default=0))

    output = data.get("output", {})
    if not isinstance(output, dict):
        raise ConfigError("output: expected a table")
    out_path = output.get("path")
    out_format = output.get("format", "json")
    if out_format not in ("json", "csv"):
        raise ConfigError(
            f"output.format: expected json or csv, got {out_format!r}")

    process = None
    modes = 1
    if "process" in data:
        process = build_process(data["process"])
        modes = process_modes(process)
    elif experiment != "gaussian_id":
        raise ConfigError(f"process: required for experiment {experiment}")

    if experiment == "gaussian_id" and process is None:
        raise ConfigError("process: required for experiment gaussian_id")

    cutoff_out, cutoff_in = _build_cutoffs(data.get("cutoffs"), modes)

    plan = None
    if experiment == "tomography":
        plan = _build_plan(data.get("plan"), cutoff_in, modes)
        if 2 * max(cutoff_in) > plan.max_order:
            raise ConfigError(
                f"plan.max_order: {plan.max_order} cannot resolve "
                f"cutoff_in {cutoff_in}; need at least {2 * max(cutoff_in)}")

    probes = data.get("probes")
    if probes is not None and not isinstance(probes, (list, tuple)):
        raise ConfigError("probes: expected a list")

    return ExperimentConfig(
        experiment=experiment, process=process, plan=plan, sigma=sigma,
        seed=seed, cutoff_out=cutoff_out, cutoff_in=cutoff_in,
        probes=list(probes) if probes is not None else None,
        out_path=out_path, out_format=out_format, raw=data)
