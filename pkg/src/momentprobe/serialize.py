"""Canonical JSON and CSV forms for tables, tensors, and triplets.

JSON output is deterministic: fields keep insertion order, floats print
with 17 significant digits, entries are sorted by index.  Two structurally
equal objects therefore serialize to identical bytes.
"""
from __future__ import annotations

import io
import math
from typing import Any

import numpy as np

from .errors import ConfigError
from .moments import MomentTable
from .processes import GaussianTriplet, ProcessTensor


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite value {x!r}")
    s = f"{x:.17g}"
    return s


def canonical_json(obj: Any, indent: int = 2) -> str:
    """Serialize nested dicts/lists with fixed ordering and float format."""
    out = io.StringIO()
    _write_json(obj, out, indent, 0)
    out.write("\n")
    return out.getvalue()


def _write_json(obj: Any, out: io.StringIO, indent: int, level: int) -> None:
    pad = " " * (indent * level)
    pad_in = " " * (indent * (level + 1))
    if obj is None:
        out.write("null")
    elif isinstance(obj, bool):
        out.write("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.write(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.write(_fmt_float(float(obj)))
    elif isinstance(obj, str):
        out.write('"' + obj.replace("\\", "\\\\").replace('"', '\\"')
                  .replace("\n", "\\n") + '"')
    elif isinstance(obj, dict):
        if not obj:
            out.write("{}")
            return
        out.write("{\n")
        items = list(obj.items())
        for i, (key, val) in enumerate(items):
            out.write(pad_in + '"' + str(key) + '": ')
            _write_json(val, out, indent, level + 1)
            out.write(",\n" if i + 1 < len(items) else "\n")
        out.write(pad + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            out.write("[]")
            return
        simple = all(isinstance(v, (int, float, np.integer, np.floating))
                     for v in seq)
        if simple:
            out.write("[" + ", ".join(
                str(int(v)) if isinstance(v, (int, np.integer))
                else _fmt_float(float(v)) for v in seq) + "]")
            return
        out.write("[\n")
        for i, val in enumerate(seq):
            out.write(pad_in)
            _write_json(val, out, indent, level + 1)
            out.write(",\n" if i + 1 < len(seq) else "\n")
        out.write(pad + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def _cutoff_field(cutoff: tuple[int, ...]):
    return cutoff[0] if len(cutoff) == 1 else list(cutoff)


def moment_table_to_dict(table: MomentTable,
                         drop_below: float = 1e-15) -> dict:
    entries = []
    for (j, k) in sorted(table.entries):
        v = complex(table.entries[(j, k)])
        if abs(v) < drop_below:
            continue
        entries.append({"j": list(j), "k": list(k),
                        "re": v.real, "im": v.imag})
    return {"modes": table.modes, "cutoff": _cutoff_field(table.cutoff),
            "entries": entries}


def moment_table_from_dict(data: dict) -> MomentTable:
    try:
        modes = int(data["modes"])
        cutoff = data["cutoff"]
        raw = data["entries"]
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"moment table JSON missing field: {exc}") from None
    cutoff = (int(cutoff),) if np.isscalar(cutoff) else tuple(
        int(c) for c in cutoff)
    entries = {}
    for row in raw:
        j = tuple(int(v) for v in row["j"])
        k = tuple(int(v) for v in row["k"])
        entries[(j, k)] = complex(float(row["re"]), float(row["im"]))
    return MomentTable(modes, cutoff, entries)


def process_tensor_to_dict(tensor: ProcessTensor) -> dict:
    entries = []
    for (j, k, m, n) in sorted(tensor.entries):
        v = complex(tensor.entries[(j, k, m, n)])
        entries.append({"jk": list(j) + list(k), "mn": list(m) + list(n),
                        "re": v.real, "im": v.imag})
    return {"modes": tensor.modes,
            "cutoff_in": _cutoff_field(tensor.cutoff_in),
            "cutoff_out": _cutoff_field(tensor.cutoff_out),
            "entries": entries}


def process_tensor_from_dict(data: dict) -> ProcessTensor:
    try:
        modes = int(data["modes"])
        cin = data["cutoff_in"]
        cout = data["cutoff_out"]
        raw = data["entries"]
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"tensor JSON missing field: {exc}") from None
    cin = (int(cin),) if np.isscalar(cin) else tuple(int(c) for c in cin)
    cout = (int(cout),) if np.isscalar(cout) else tuple(int(c) for c in cout)
    entries = {}
    for row in raw:
        jk = [int(v) for v in row["jk"]]
        mn = [int(v) for v in row["mn"]]
        j, k = tuple(jk[:modes]), tuple(jk[modes:])
        m, n = tuple(mn[:modes]), tuple(mn[modes:])
        entries[(j, k, m, n)] = complex(float(row["re"]), float(row["im"]))
    return ProcessTensor(modes, cout, cin, entries)


def triplet_to_dict(triplet: GaussianTriplet, cond: float | None = None) -> dict:
    data = {
        "S": [list(map(float, row)) for row in triplet.scale],
        "E_noise": [list(map(float, row)) for row in triplet.noise],
        "D": [float(v) for v in triplet.shift],
    }
    if cond is not None:
        data["cond"] = float(cond)
    return data


def triplet_from_dict(data: dict) -> GaussianTriplet:
    try:
        return GaussianTriplet(np.array(data["S"], dtype=float),
                               np.array(data["E_noise"], dtype=float),
                               np.array(data["D"], dtype=float))
    except KeyError as exc:
        raise ConfigError(f"triplet JSON missing field: {exc}") from None


def _index_header(prefix: str, modes: int) -> list[str]:
    if modes == 1:
        return [prefix]
    return [f"{prefix}{s + 1}" for s in range(modes)]


def process_tensor_to_csv(tensor: ProcessTensor) -> str:
    m = tensor.modes
    header = (_index_header("j", m) + _index_header("k", m)
              + _index_header("m", m) + _index_header("n", m) + ["re", "im"])
    lines = [",".join(header)]
    for (j, k, mm, nn) in sorted(tensor.entries):
        v = complex(tensor.entries[(j, k, mm, nn)])
        cells = [str(x) for x in (*j, *k, *mm, *nn)]
        cells += [_fmt_float(v.real), _fmt_float(v.imag)]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def moment_table_to_csv(table: MomentTable) -> str:
    m = table.modes
    header = _index_header("j", m) + _index_header("k", m) + ["re", "im"]
    lines = [",".join(header)]
    for (j, k) in sorted(table.entries):
        v = complex(table.entries[(j, k)])
        cells = [str(x) for x in (*j, *k)]
        cells += [_fmt_float(v.real), _fmt_float(v.imag)]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def triplet_to_csv(triplet: GaussianTriplet) -> str:
    lines = ["field,row,col,value"]
    for name, mat in (("S", triplet.scale), ("E_noise", triplet.noise)):
        for i, row in enumerate(mat):
            for jj, v in enumerate(row):
                lines.append(f"{name},{i},{jj},{_fmt_float(float(v))}")
    for i, v in enumerate(triplet.shift):
        lines.append(f"D,{i},,{_fmt_float(float(v))}")
    return "\n".join(lines) + "\n"
