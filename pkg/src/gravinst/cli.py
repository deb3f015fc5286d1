"""Command-line front end: config ingestion, runs, report persistence.

Subcommands:
  verify    run verification checks, write a JSON report
  sample    evaluate metric/curvature at points or a deterministic grid
  fit       asymptotic decay / volume-growth fits with pass bands
  validate  parse-check a run config, report or CSV produced by the tool

Exit codes: 0 all requested work passed, 1 a check or fit failed,
2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from gravinst import ghawking, hitchin, sampling, tensorcalc, verify
from gravinst.errors import GeometryError
from gravinst.sampling import SampleSpec
from gravinst.singularities import (
    CenterConfiguration,
    config_from_json,
    make_akl_config,
)

_RUN_KEYS = {"schema", "singularity", "checks", "sample", "tolerances", "out", "csv"}
_SAMPLE_KEYS = {"count", "seed", "r_min", "r_max", "clearance", "chart_margin"}
SCHEMA_VERSION = "1"


class ConfigError(ValueError):
    """Malformed run configuration (maps to exit code 2)."""


@dataclass
class RunConfig:
    """Validated run request: the singularity data plus run options."""

    singularity: dict
    checks: tuple[str, ...] | None = None
    sample: SampleSpec = field(default_factory=SampleSpec)
    tolerances: dict = field(default_factory=dict)
    out: str | None = None
    csv: str | None = None

    def build(self) -> CenterConfiguration:
        return config_from_json(self.singularity)

    def to_json(self) -> dict:
        out: dict = {"schema": SCHEMA_VERSION, "singularity": self.singularity}
        if self.checks is not None:
            out["checks"] = list(self.checks)
        out["sample"] = {
            "count": self.sample.count,
            "seed": self.sample.seed,
            "r_min": self.sample.r_min,
            "r_max": self.sample.r_max,
            "clearance": self.sample.clearance,
            "chart_margin": self.sample.chart_margin,
        }
        if self.tolerances:
            out["tolerances"] = dict(self.tolerances)
        if self.out:
            out["out"] = self.out
        if self.csv:
            out["csv"] = self.csv
        return out


def parse_run_config(data: dict) -> RunConfig:
    """Strict-schema parse of the run configuration object."""
    if not isinstance(data, dict):
        raise ConfigError("run configuration must be a JSON object")
    unknown = set(data) - _RUN_KEYS
    if unknown:
        raise ConfigError(f"unknown run configuration keys: {sorted(unknown)}")
    if data.get("schema") != SCHEMA_VERSION:
        raise ConfigError(f'run configuration needs "schema": "{SCHEMA_VERSION}"')
    if "singularity" not in data:
        raise ConfigError('missing "singularity" object')
    singularity = data["singularity"]
    if isinstance(singularity, str):
        # indirection: a path to a file holding the singularity object
        try:
            with open(singularity, "r", encoding="utf-8") as fh:
                singularity = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot load singularity file: {exc}") from exc
    if not isinstance(singularity, dict):
        raise ConfigError('"singularity" must be an object or a file path')
    checks = data.get("checks")
    if checks is not None:
        if not isinstance(checks, list) or not all(isinstance(c, str) for c in checks):
            raise ConfigError('"checks" must be a list of check names')
        bad = set(checks) - set(verify.ALL_CHECKS)
        if bad:
            raise ConfigError(f"unknown checks: {sorted(bad)}")
        checks = tuple(checks)
    sample_raw = data.get("sample", {})
    if not isinstance(sample_raw, dict):
        raise ConfigError('"sample" must be an object')
    unknown = set(sample_raw) - _SAMPLE_KEYS
    if unknown:
        raise ConfigError(f"unknown sample keys: {sorted(unknown)}")
    try:
        spec = SampleSpec(**sample_raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad sample spec: {exc}") from exc
    tolerances = data.get("tolerances", {})
    if not isinstance(tolerances, dict) or not all(
        isinstance(k, str) and isinstance(v, (int, float)) and v > 0
        for k, v in tolerances.items()
    ):
        raise ConfigError('"tolerances" must map check names to positive numbers')
    out = data.get("out")
    csv_path = data.get("csv")
    for name, val in (("out", out), ("csv", csv_path)):
        if val is not None and not isinstance(val, str):
            raise ConfigError(f'"{name}" must be a file path string')
    return RunConfig(
        singularity=singularity,
        checks=checks,
        sample=spec,
        tolerances=dict(tolerances),
        out=out,
        csv=csv_path,
    )


def load_run_config(path: str) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read run configuration: {exc}") from exc
    return parse_run_config(data)


def _apply_mode(run: RunConfig, mode_arg: str | None) -> None:
    """--mode ale|alf|akl:J overrides the singularity's mode in place."""
    if mode_arg is None:
        return
    if mode_arg in ("ale", "alf"):
        if isinstance(run.singularity.get("mode"), dict):
            raise ConfigError("cannot override an akl singularity with ale/alf")
        run.singularity["mode"] = mode_arg
        return
    if mode_arg.startswith("akl:"):
        try:
            j_max = int(mode_arg.split(":", 1)[1])
        except ValueError as exc:
            raise ConfigError("akl mode takes an integer level, e.g. akl:12") from exc
        for key in ("d", "radii", "heights"):
            if key in run.singularity:
                raise ConfigError(f"akl mode generates its polygons; remove {key!r}")
        run.singularity["mode"] = {"akl": j_max}
        return
    raise ConfigError(f"unknown mode {mode_arg!r}")


def _apply_tolerances(
    report: verify.VerificationReport, tolerances: dict
) -> verify.VerificationReport:
    """Re-judge checks against overridden tolerances.

    A key applies to the check with that exact name and to every check
    whose name extends it with a dash; a key matching nothing is an
    error, catching typos before they silently pass a run.
    """
    if not tolerances:
        return report
    matched = set()
    new_checks = []
    for check in report.checks:
        tol = None
        for key, value in tolerances.items():
            if check.name == key or check.name.startswith(key + "-"):
                tol = float(value)
                matched.add(key)
        if tol is None:
            new_checks.append(check)
        else:
            new_checks.append(
                verify.CheckRecord(
                    name=check.name,
                    max_residual=check.max_residual,
                    tolerance=tol,
                    passed=check.max_residual < tol,
                    count=check.count,
                    note=check.note,
                )
            )
    unmatched = set(tolerances) - matched
    if unmatched:
        raise ConfigError(f"tolerance overrides matched no check: {sorted(unmatched)}")
    report.checks = new_checks
    return report


def _report_document(report: verify.VerificationReport) -> str:
    doc = {"report": report.payload(), "timing": report.timing}
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


_CSV_HEADER = (
    ["construction", "flag", "x0", "x1", "x2", "x3"]
    + [f"g{i}{j}" for i in range(4) for j in range(i, 4)]
    + ["riem_norm_sq", "ricci_norm"]
)


def _sample_rows(config: CenterConfiguration, mode: str, spec: SampleSpec) -> list:
    """Deterministic per-sample curvature rows for both constructions."""
    rows = []
    constructions = ["gh"] if mode != "ale" else ["gh", "hitchin"]
    for src in constructions:
        if src == "gh":
            pts = [ghawking.chart_point(p) for p in sampling.gh_points(config, spec)]
            fld = ghawking.metric_field(config, mode=mode)
        else:
            pts = [
                hitchin.chart_point(p) for p in sampling.hitchin_points(config, spec)
            ]
            fld = hitchin.metric_field(config)
        for cp in pts:
            rows.append(_evaluate_row(src, config, fld, cp))
    return rows


def _evaluate_row(src: str, config, fld, cp: tensorcalc.ChartPoint) -> list:
    coords = [repr(float(v)) for v in cp.coords]
    try:
        g = fld(cp).g
        step = None
        if src == "hitchin":
            step = hitchin.chart_step(config, hitchin.point_from_chart(cp))
        bundle = tensorcalc.curvature_at(fld, cp, step=step)
    except GeometryError as exc:
        return [src, type(exc).__name__] + coords + [""] * 12
    upper = [repr(float(g[i, j])) for i in range(4) for j in range(i, 4)]
    return (
        [src, "ok"]
        + coords
        + upper
        + [repr(float(bundle.riem_norm_sq)), repr(float(bundle.ricci_norm))]
    )


def _write_csv(path: str | None, rows: list) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_CSV_HEADER)
    writer.writerows(rows)
    if path is None:
        sys.stdout.write(buf.getvalue())
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())


def cmd_verify(args) -> int:
    run = load_run_config(args.config)
    _apply_mode(run, args.mode)
    if args.seed is not None:
        run.sample = SampleSpec(
            count=run.sample.count,
            seed=args.seed,
            r_min=run.sample.r_min,
            r_max=run.sample.r_max,
            clearance=run.sample.clearance,
            chart_margin=run.sample.chart_margin,
        )
    checks = tuple(args.check) if args.check else run.checks
    if checks is not None:
        bad = set(checks) - set(verify.ALL_CHECKS)
        if bad:
            raise ConfigError(f"unknown checks: {sorted(bad)}")
    config = run.build()
    if args.perturb:
        config = verify.perturb_config(config, eps=args.perturb)
    report = verify.full_report(
        config, mode=config.mode, spec=run.sample, checks=checks
    )
    report = _apply_tolerances(report, run.tolerances)
    document = _report_document(report)
    out_path = args.out or run.out
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(document)
    else:
        sys.stdout.write(document)
    csv_path = args.csv or run.csv
    if csv_path:
        _write_csv(csv_path, _sample_rows(config, config.mode, run.sample))
    for check in report.checks:
        status = "PASS" if check.passed else "FAIL"
        line = (
            f"{status} {check.name}: residual {check.max_residual:.3e}"
            f" tolerance {check.tolerance:g}"
        )
        if check.note:
            line += f" ({check.note})"
        print(line, file=sys.stderr)
    return 0 if report.passed else 1


def _parse_point(text: str, construction: str) -> tensorcalc.ChartPoint:
    parts = [p.strip() for p in text.split(",")]
    try:
        vals = [float(p) for p in parts]
    except ValueError as exc:
        raise ConfigError(f"bad point {text!r}: {exc}") from exc
    if construction == "gh":
        if len(vals) == 3:
            vals = [0.0] + vals  # theta defaults to 0
        if len(vals) != 4:
            raise ConfigError("gh points take theta,b,a1,a2 (or b,a1,a2)")
        return tensorcalc.ChartPoint(tuple(vals), ghawking.CHART_ID)
    if len(vals) != 4:
        raise ConfigError("hitchin points take re(z),im(z),re(y),im(y)")
    return tensorcalc.ChartPoint(tuple(vals), hitchin.CHART_ID)


def cmd_sample(args) -> int:
    run = load_run_config(args.config)
    _apply_mode(run, args.mode)
    config = run.build()
    construction = args.construction
    if construction == "hitchin" and config.mode != "ale":
        raise ConfigError("the complex chart applies to ale configurations")
    rows = []
    if args.point:
        if construction == "gh":
            fld = ghawking.metric_field(config, mode=config.mode)
        else:
            fld = hitchin.metric_field(config)
        for text in args.point:
            rows.append(_evaluate_row(construction, config, fld, _parse_point(text, construction)))
    if args.grid:
        spec = SampleSpec(count=args.grid, seed=args.seed or 0)
        if construction == "gh":
            pts = [ghawking.chart_point(p) for p in sampling.gh_points(config, spec)]
            fld = ghawking.metric_field(config, mode=config.mode)
        else:
            pts = [
                hitchin.chart_point(p) for p in sampling.hitchin_points(config, spec)
            ]
            fld = hitchin.metric_field(config)
        for cp in pts:
            rows.append(_evaluate_row(construction, config, fld, cp))
    if not rows:
        raise ConfigError("nothing to sample: give --point and/or --grid")
    _write_csv(args.out, rows)
    return 0


def cmd_fit(args) -> int:
    run = load_run_config(args.config)
    _apply_mode(run, args.mode)
    config = run.build()
    wanted = args.fit or (["decay", "volume"] if config.mode == "ale" else ["volume"])
    ok = True
    for name in wanted:
        if name == "decay":
            if config.mode != "ale":
                raise ConfigError("curvature decay applies to ale configurations")
            fit = hitchin.ale_curvature_decay(config)
            lo, hi = -12.5, -11.5
        elif name == "volume":
            if config.mode == "akl":
                raise ConfigError("no growth band for truncated configurations")
            fit = ghawking.volume_growth_fit(config, mode=config.mode)
            target = 4.0 if config.mode == "ale" else 3.0
            lo, hi = target - 0.1, target + 0.1
        else:
            raise ConfigError(f"unknown fit {name!r}")
        inside = lo < fit.slope < hi
        ok = ok and inside
        print(
            f"{'PASS' if inside else 'FAIL'} {name}: slope {fit.slope:.6g}"
            f" band [{lo:g}, {hi:g}] rms {fit.rms_residual:.3e}"
        )
    return 0 if ok else 1


def _validate_report_file(path: str) -> None:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict) or "report" not in doc:
        raise ConfigError('report file must hold a {"report": ...} object')
    body = doc["report"]
    for key in ("config", "mode", "seed", "checks", "pass"):
        if key not in body:
            raise ConfigError(f"report body missing key {key!r}")
    for check in body["checks"]:
        for key in ("name", "max_residual", "tolerance", "pass"):
            if key not in check:
                raise ConfigError(f"check record missing key {key!r}")


def _validate_csv_file(path: str) -> None:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != _CSV_HEADER:
            raise ConfigError("CSV header does not match the sample layout")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(_CSV_HEADER):
                raise ConfigError(f"CSV row {lineno} has {len(row)} fields")


def cmd_validate(args) -> int:
    if not (args.config or args.report or args.csv):
        raise ConfigError("give at least one of --config, --report, --csv")
    try:
        if args.config:
            run = load_run_config(args.config)
            run.build()
        if args.report:
            _validate_report_file(args.report)
        if args.csv:
            _validate_csv_file(args.csv)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(str(exc)) from exc
    print("valid")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gravinst",
        description="construct and verify multi-center gravitational instanton metrics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser("verify", help="run verification checks")
    p_verify.add_argument("--config", required=True, help="run configuration JSON")
    p_verify.add_argument(
        "--check", action="append", help="run only this check (repeatable)"
    )
    p_verify.add_argument("--seed", type=int, help="sampling seed override")
    p_verify.add_argument("--out", help="report JSON path (default stdout)")
    p_verify.add_argument("--csv", help="per-sample CSV path")
    p_verify.add_argument(
        "--perturb", type=float, help="move one center by this amount first"
    )
    p_verify.add_argument("--mode", help="mode override: ale, alf or akl:J")
    p_verify.set_defaults(func=cmd_verify)

    p_sample = sub.add_parser("sample", help="evaluate metric and curvature")
    p_sample.add_argument("--config", required=True)
    p_sample.add_argument(
        "--construction", choices=("gh", "hitchin"), default="gh"
    )
    p_sample.add_argument(
        "--point", action="append", help="chart point, comma separated (repeatable)"
    )
    p_sample.add_argument("--grid", type=int, help="sample N deterministic points")
    p_sample.add_argument("--seed", type=int, help="grid seed")
    p_sample.add_argument("--out", help="CSV path (default stdout)")
    p_sample.add_argument("--mode", help="mode override: ale, alf or akl:J")
    p_sample.set_defaults(func=cmd_sample)

    p_fit = sub.add_parser("fit", help="asymptotic decay and growth fits")
    p_fit.add_argument("--config", required=True)
    p_fit.add_argument(
        "--fit", action="append", choices=("decay", "volume"), help="which fits"
    )
    p_fit.add_argument("--mode", help="mode override: ale, alf or akl:J")
    p_fit.set_defaults(func=cmd_fit)

    p_val = sub.add_parser("validate", help="parse-check configs and outputs")
    p_val.add_argument("--config", help="run configuration JSON")
    p_val.add_argument("--report", help="report JSON produced by verify")
    p_val.add_argument("--csv", help="CSV produced by verify/sample")
    p_val.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (GeometryError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
