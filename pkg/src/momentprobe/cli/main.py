"""Command-line entry point.

Subcommands map onto experiments; unknown ``--a.b=value`` flags become
dot-path config overrides.  Exit codes: 0 success, 2 bad configuration,
3 numerical failure, 4 verification failure.
"""
from __future__ import annotations

import argparse
import sys

from ..errors import ConfigError, MomentProbeError, NumericalError
from .config import apply_overrides, load_config_file, validate_config
from .runner import run
from .verify import build_report
from ..serialize import canonical_json

_SUBCOMMANDS = {
    "tomography": "tomography",
    "gaussian-id": "gaussian_id",
    "catalog": "catalog_dump",
    "diagnose": "diagnostics",
}


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="momentprobe",
        description="Coherent-probe process tomography toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in (*_SUBCOMMANDS, "verify"):
        p = sub.add_parser(name)
        p.add_argument("--config", help="TOML or JSON experiment file")
        p.add_argument("--out", help="report destination (default stdout)")
        p.add_argument("--format", choices=("json", "csv"))
        p.add_argument("--seed", type=int, help="noise seed override")
    return parser


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _run_verify(args) -> int:
    if args.format == "csv":
        raise ConfigError("output.format: verify reports are json only")
    seed = args.seed if args.seed is not None else 0
    report = build_report(seed)
    checks = report["verify"]["checks"]
    for check in checks:
        flag = "PASS" if check["passed"] else "FAIL"
        print(f"{flag} {check['id']}: {check['description']}",
              file=sys.stderr)
    _emit(canonical_json(report), args.out)
    return 0 if report["verify"]["passed"] else 4


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = _parser()
    args, extra = parser.parse_known_args(argv)
    try:
        bad = [e for e in extra if "=" not in e]
        if bad:
            raise ConfigError(f"unrecognized arguments: {' '.join(bad)}")
        if args.command == "verify":
            if extra:
                raise ConfigError(
                    f"verify takes no overrides, got {' '.join(extra)}")
            return _run_verify(args)

        data = load_config_file(args.config) if args.config else {}
        apply_overrides(data, extra)
        data["experiment"] = _SUBCOMMANDS[args.command]
        if args.seed is not None:
            data.setdefault("noise", {})["seed"] = args.seed
        if args.out is not None:
            data.setdefault("output", {})["path"] = args.out
        if args.format is not None:
            data.setdefault("output", {})["format"] = args.format
        config = validate_config(data)
        report = run(config)
        body = report.to_csv() if config.out_format == "csv" \
            else report.to_json()
        _emit(body, config.out_path)
        summary = report.payload.get("comparison", {})
        err = summary.get("max_abs_error")
        note = f" max_abs_error={err:.3e}" if err is not None else ""
        print(f"ok: {config.experiment}{note} "
              f"({report.elapsed_seconds:.2f} s)", file=sys.stderr)
        return 0
    except ConfigError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return 3
    except MomentProbeError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
