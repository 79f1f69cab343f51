"""Command-line front end.

Exit codes: 0 ok, 1 validation failure, 2 config error, 3 insensitive
working point.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import math
import sys
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

import numpy as np

from iclab import __version__, explore, kernels, spdc, validation
from iclab.elements import ConfigError, InterferometerSpec, parse_config, serialize_spec
from iclab.measurement import (
    InsensitiveWorkingPoint,
    PrecisionLoss,
    detector_from_name,
    sensitivity,
)

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_INSENSITIVE = 0, 1, 2, 3
DETECTOR_CHOICES = ("ia", "ib", "ic", "sum", "sum-bc", "diff-bc")
RECIPES = ("fig3a", "fig3b", "fig4", "spdc-limit")

CONVENTIONS = {
    "transform": "a' = U a + V a^dag",
    "squeezer": "exp(xi^* a_i a_j - xi a_i^dag a_j^dag), xi = r exp(i psi)",
    "beam_splitter": "exp(i theta (a_i^dag a_j + a_i a_j^dag)), theta = pi/4 is 50:50",
    "phase": "a -> exp(i phi) a",
    "photon_budget": "N = |seeds|^2 + 2 sinh^2 r1 + 2 sinh^2 r2",
    "sensitivity": "Var(O) / |d<O>/dphi|^2",
}


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_CONFIG):
        self.code = code
        super().__init__(message)


# -- manifest -----------------------------------------------------------------------


@dataclass
class RunManifest:
    command: str
    parameters: dict
    conventions: dict = field(default_factory=lambda: dict(CONVENTIONS))
    version: str = __version__
    timestamp: str = ""

    def hashed_fields(self) -> dict:
        return {
            "command": self.command,
            "parameters": self.parameters,
            "conventions": self.conventions,
            "version": self.version,
        }

    @property
    def run_hash(self) -> str:
        blob = json.dumps(self.hashed_fields(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def to_json(self) -> str:
        d = self.hashed_fields()
        d["run_hash"] = self.run_hash
        d["kernel_backend"] = kernels.BACKEND
        d["timestamp"] = self.timestamp or datetime.now(timezone.utc).isoformat(timespec="seconds")
        return json.dumps(d, indent=2, sort_keys=True) + "\n"


def _num(x) -> str:
    """Locale-independent, round-trippable number; ``NA`` for missing."""
    if x is None:
        return "NA"
    if isinstance(x, bool):
        return "1" if x else "0"
    x = float(x)
    if math.isnan(x):
        return "NA"
    return repr(x)


def _json_safe(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(x, dict):
        return {k: _json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_safe(v) for v in x]
    if isinstance(x, (np.floating, np.integer)):
        return _json_safe(x.item())
    return x


def _emit(text: str, out: str | None, manifest: RunManifest | None = None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    path.write_text(text, encoding="utf-8", newline="\n")
    if manifest is not None:
        Path(str(path) + ".manifest.json").write_text(manifest.to_json(), encoding="utf-8", newline="\n")


def _csv(manifest: RunManifest, header: list, rows: list) -> str:
    buf = io.StringIO()
    buf.write(f"# manifest-hash {manifest.run_hash}\n")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(v if isinstance(v, str) else _num(v) for v in row) + "\n")
    return buf.getvalue()


# -- argument helpers ----------------------------------------------------------------


def _load_config(path: str) -> tuple[InterferometerSpec, dict, str]:
    p = Path(path)
    if not p.exists() and path in RECIPES:
        text = resources.files("iclab").joinpath(f"recipes/{path}.cfg").read_text(encoding="utf-8")
        return (*parse_config(text), f"recipe:{path}")
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read config {path!r}: {exc.strerror or exc}") from None
    try:
        spec, extras = parse_config(text)
    except ConfigError as exc:
        raise CliError(f"{path}: {exc}") from None
    return spec, extras, str(p)


def parse_axis(text: str) -> explore.Axis:
    try:
        name, rng = text.split("=", 1)
        lo, hi, n = rng.split(":")
        return explore.Axis(name.strip(), float(lo), float(hi), int(n))
    except explore.ParameterError as exc:
        raise CliError(f"bad axis {text!r}: {exc}") from None
    except ValueError:
        raise CliError(f"bad axis {text!r}; expected VAR=lo:hi:n") from None


def parse_optimize(text: str) -> dict:
    out = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            name, rng = part.split("=", 1)
            lo, hi = rng.split(":")
            lo, hi = float(lo), float(hi)
        except ValueError:
            raise CliError(f"bad optimize entry {part!r}; expected VAR=lo:hi") from None
        name = name.strip()
        if name not in explore.VARIABLES:
            raise CliError(f"unknown optimize variable {name!r}; known: {', '.join(explore.VARIABLES)}")
        if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
            raise CliError(f"optimize bounds for {name} must be finite with lo <= hi")
        out[name] = (lo, hi)
    return out


def _apply_seed_flags(spec: InterferometerSpec, args) -> InterferometerSpec:
    beta = getattr(args, "beta", None)
    mode = getattr(args, "seed_mode", None)
    if beta is None and mode is None:
        return spec
    if beta is None:
        beta = math.sqrt(sum(abs(s) ** 2 for s in spec.seeds))
    m = "abc".index(mode or "b")
    if m >= spec.mode_count:
        raise CliError(f"--seed-mode {mode} needs at least {m + 1} modes")
    seeds = [0.0] * spec.mode_count
    seeds[m] = float(beta)
    return replace(spec, seeds=tuple(seeds))


def _detector(name: str | None, spec: InterferometerSpec):
    name = name or spec.detector
    if name is None:
        raise CliError("no detector given (use --detector or 'detector =' in the config)")
    try:
        return name, detector_from_name(name, spec.mode_count)
    except ValueError as exc:
        raise CliError(str(exc)) from None


# -- commands ------------------------------------------------------------------------


def cmd_sensitivity(args) -> int:
    spec, _, source = _load_config(args.config)
    spec = _apply_seed_flags(spec, args)
    name, op = _detector(args.detector, spec)
    try:
        res = sensitivity(spec, op)
    except InsensitiveWorkingPoint as exc:
        raise CliError(f"insensitive working point: {exc}", EXIT_INSENSITIVE) from None
    except PrecisionLoss as exc:
        raise CliError(f"precision loss: {exc}", EXIT_INSENSITIVE) from None
    manifest = RunManifest("sensitivity", {"config": source, "spec": serialize_spec(spec), "detector": name})
    record = {
        "phi_min_sq": res.phi_min_sq,
        "mean": res.mean,
        "variance": res.variance,
        "derivative": res.derivative,
        "working_point": spec.working_point,
        "detector": name,
        "manifest_hash": manifest.run_hash,
    }
    _emit(json.dumps(_json_safe(record), indent=2) + "\n", args.out, manifest)
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec, extras, source = _load_config(args.config)
    spec = _apply_seed_flags(spec, args)
    name, op = _detector(args.detector, spec)
    axis_text = args.axis or extras["axis"]
    if not axis_text:
        raise CliError("no sweep axis (use --axis VAR=lo:hi:n or 'axis =' in the config)")
    axes = [parse_axis(a) for a in axis_text]
    free = {}
    for text in ([args.optimize] if args.optimize else extras["optimize"]):
        free.update(parse_optimize(text))
    try:
        cfg = explore.SweepConfig(spec, axes, op, free)
    except explore.ParameterError as exc:
        raise CliError(str(exc)) from None
    res = explore.sweep(cfg)
    manifest = RunManifest(
        "sweep",
        {
            "config": source,
            "spec": serialize_spec(spec),
            "detector": name,
            "axes": [[a.name, a.lo, a.hi, a.n] for a in axes],
            "optimize": {k: list(v) for k, v in free.items()},
            "optimizer": res.provenance["optimizer"],
        },
    )
    opt_names = list(free)
    if args.format == "json":
        points = [
            {
                "coords": dict(zip((a.name for a in axes), p.coords)),
                "phi_min_sq": p.phi_min_sq,
                "mean": p.mean,
                "variance": p.variance,
                "derivative": p.derivative,
                "optimized": p.optimized,
                "converged": p.converged,
                "error": p.error,
            }
            for p in res.points
        ]
        body = {"manifest_hash": manifest.run_hash, "points": points}
        _emit(json.dumps(_json_safe(body), indent=1) + "\n", args.out, manifest)
    else:
        header = [a.name for a in axes] + ["phi_min_sq", "mean", "variance", "derivative"]
        header += [f"opt_{n}" for n in opt_names] + ["converged"]
        rows = []
        for p in res.points:
            conv = "NA" if p.converged is None else _num(p.converged)
            rows.append(
                [*p.coords, p.phi_min_sq, p.mean, p.variance, p.derivative]
                + [p.optimized.get(n) for n in opt_names]
                + [conv]
            )
        _emit(_csv(manifest, header, rows), args.out, manifest)
    failed = [p for p in res.points if p.error]
    if failed:
        print(f"{len(failed)} of {len(res.points)} points failed; first: {failed[0].error}", file=sys.stderr)
    return EXIT_OK


def cmd_compare(args) -> int:
    beta = args.beta
    lo, hi, n = args.gain_min, args.gain_max, args.gain_steps
    source = None
    if args.config:
        spec, extras, source = _load_config(args.config)
        if beta is None:
            beta = math.sqrt(sum(abs(s) ** 2 for s in spec.seeds))
        for text in extras["axis"]:
            ax = parse_axis(text)
            if ax.name == "r1":
                lo, hi, n = ax.lo, ax.hi, ax.n
    beta = 1000.0 if beta is None else beta
    if not (lo > 0 and hi >= lo and n >= 1):
        raise CliError("gain range must be positive with gain-max >= gain-min")
    gains = np.linspace(lo, hi, n) if n > 1 else np.array([lo])
    rows = explore.compare_curves(gains, beta)
    manifest = RunManifest(
        "compare",
        {
            "config": source,
            "beta": beta,
            "gains": [lo, hi, n],
            "free": {k: list(v) for k, v in explore.COMPARE_FREE.items()},
            "optimizer": {"method": "nelder-mead", "starts": explore.N_STARTS, "tol": explore.SIMPLEX_TOL,
                          "seed": explore.OPT_SEED},
        },
    )
    if args.format == "json":
        body = {
            "manifest_hash": manifest.run_hash,
            "rows": [
                {**{c: getattr(r, c) for c in explore.CompareRow.COLUMNS},
                 "settings_ib": r.settings_ib, "settings_sbc": r.settings_sbc}
                for r in rows
            ],
        }
        _emit(json.dumps(_json_safe(body), indent=1) + "\n", args.out, manifest)
    else:
        header = list(explore.CompareRow.COLUMNS) + ["r2_ib", "r2_sbc"]
        table = [
            [getattr(r, c) for c in explore.CompareRow.COLUMNS]
            + [r.settings_ib.get("r2"), r.settings_sbc.get("r2")]
            for r in rows
        ]
        _emit(_csv(manifest, header, table), args.out, manifest)
    return EXIT_OK


def cmd_spdc(args) -> int:
    beta = args.beta
    source = None
    if args.config:
        spec, _, source = _load_config(args.config)
        if beta is None:
            beta = spec.seeds[1] if spec.mode_count > 1 else spec.seeds[0]
    beta = 1000.0 if beta is None else beta
    dets = spdc.SCAN_DETECTORS
    if args.detector:
        if args.detector not in dets:
            raise CliError(f"single-pair scan supports {sorted(dets)}, got {args.detector!r}")
        dets = {args.detector: dets[args.detector]}
    scan = spdc.spdc_scan(beta, dets)
    if not math.isfinite(scan.value):
        raise CliError("no phase-sensitive working point found", EXIT_INSENSITIVE)
    manifest = RunManifest("spdc", {"config": source, "beta": [complex(beta).real, complex(beta).imag],
                                    "detectors": sorted(dets)})
    record = {
        "beta": _json_safe([complex(beta).real, complex(beta).imag]),
        "phi_min_sq": scan.value,
        "detector": scan.detector,
        "working_point": scan.phi0,
        "per_detector": {k: {"phi_min_sq": v[0], "working_point": v[1]} for k, v in scan.per_detector.items()},
        "manifest_hash": manifest.run_hash,
    }
    if args.format == "csv":
        rows = [[k, v[0], v[1]] for k, v in sorted(scan.per_detector.items())]
        _emit(_csv(manifest, ["detector", "phi_min_sq", "working_point"], rows), args.out, manifest)
    else:
        _emit(json.dumps(_json_safe(record), indent=2) + "\n", args.out, manifest)
    print(f"limit {scan.value!r} via {scan.detector} at phi0 = {scan.phi0!r}", file=sys.stderr)
    return EXIT_OK


def cmd_validate(args) -> int:
    names = args.suite or list(validation.SUITES)
    unknown = set(names) - set(validation.SUITES)
    if unknown:
        raise CliError(f"unknown suite(s) {sorted(unknown)}; known: {', '.join(validation.SUITES)}")
    results = [validation.SUITES[n]() for n in names]
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<12} {r.detail}  [{r.seconds:.2f}s]")
    failed = [r.name for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} suites passed (kernel backend: {kernels.BACKEND})")
    return EXIT_VALIDATION if failed else EXIT_OK


def cmd_seeds(args) -> int:
    rows = explore.seed_study(args.r1, args.r2, args.beta**2)
    manifest = RunManifest("seeds", {"r1": args.r1, "r2": args.r2, "beta": args.beta})
    if args.format == "json":
        body = {"manifest_hash": manifest.run_hash, "rows": [r.__dict__ for r in rows]}
        _emit(json.dumps(_json_safe(body), indent=1) + "\n", args.out, manifest)
    else:
        _emit(_csv(manifest, ["seed_mode", "ib", "diff_bc"], [[r.mode, r.ib, r.sbc] for r in rows]), args.out, manifest)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="iclab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config_required=False):
        sp.add_argument("--config", required=config_required, metavar="PATH",
                        help=f"config file, or a bundled recipe name ({', '.join(RECIPES)})")
        sp.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
        sp.add_argument("--format", choices=("csv", "json"))

    s = sub.add_parser("sensitivity", help="minimum detectable phase at the configured working point")
    common(s, True)
    s.add_argument("--detector", choices=DETECTOR_CHOICES)
    s.add_argument("--beta", type=float, help="replace the seeds by one coherent amplitude")
    s.add_argument("--seed-mode", choices=("a", "b", "c"), help="mode receiving --beta (default b)")
    s.set_defaults(func=cmd_sensitivity, format="json")

    s = sub.add_parser("sweep", help="one- or two-axis parameter sweep")
    common(s, True)
    s.add_argument("--axis", action="append", metavar="VAR=lo:hi:n")
    s.add_argument("--optimize", metavar="VAR=lo:hi[,VAR=lo:hi]")
    s.add_argument("--detector", choices=DETECTOR_CHOICES)
    s.add_argument("--beta", type=float)
    s.add_argument("--seed-mode", choices=("a", "b", "c"))
    s.set_defaults(func=cmd_sweep, format="csv")

    s = sub.add_parser("compare", help="fair comparison table against shot noise and the boosted SU(1,1)")
    common(s)
    s.add_argument("--beta", type=float)
    s.add_argument("--gain-min", type=float, default=0.05)
    s.add_argument("--gain-max", type=float, default=3.0)
    s.add_argument("--gain-steps", type=int, default=25)
    s.set_defaults(func=cmd_compare, format="csv")

    s = sub.add_parser("spdc", help="large-seed limit of the single-pair model")
    common(s)
    s.add_argument("--beta", type=float)
    s.add_argument("--detector", choices=tuple(spdc.SCAN_DETECTORS))
    s.set_defaults(func=cmd_spdc, format="json")

    s = sub.add_parser("seeds", help="same coherent budget placed in mode a, b or c")
    common(s)
    s.add_argument("--r1", type=float, default=1.0)
    s.add_argument("--r2", type=float, default=1.0)
    s.add_argument("--beta", type=float, default=1000.0)
    s.set_defaults(func=cmd_seeds, format="csv")

    s = sub.add_parser("validate", help="run the self-check suites")
    s.add_argument("--suite", action="append", metavar="NAME")
    s.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args)
    except CliError as exc:
        print(f"iclab {args.command}: {exc}", file=sys.stderr)
        return exc.code
    except BrokenPipeError:
        # reader went away (e.g. piped into head); stay quiet
        import os

        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
