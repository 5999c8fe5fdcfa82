"""Command-line front end.

Exit codes: 0 success, 1 a mathematical check failed (the report is still
written), 2 usage error or malformed input, 3 schema violation.
"""

from __future__ import annotations

import argparse
import enum
import io
import json
import os
import sys
import tempfile
from typing import Sequence

import jsonschema
import numpy as np

from . import __version__
from .schemas import SCHEMAS

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_SCHEMA = 0, 1, 2, 3
ENV_TOL = "DIRACKIT_TOL"


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_USAGE):
        super().__init__(message)
        self.code = code


# -- input --------------------------------------------------------------------

def _pointer(path) -> str:
    return "/" + "/".join(str(p) for p in path) if path else "/"


def parse_spec(path: str, subcommand: str) -> dict:
    """Load and validate a JSON spec; raises :class:`CliError` with the right exit code."""
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except FileNotFoundError:
        raise CliError(f"{path}: no such file") from None
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}: malformed JSON: {exc}") from None
    validator = jsonschema.Draft202012Validator(SCHEMAS[subcommand])
    errors = sorted(validator.iter_errors(obj), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        # prefer the deepest concrete location
        deepest = max(errors, key=lambda e: len(e.absolute_path))
        if len(deepest.absolute_path) > len(err.absolute_path):
            err = deepest
        raise CliError(f"schema error at {_pointer(err.absolute_path)}: {err.message}", EXIT_SCHEMA)
    return obj


def default_tol(flag: float | None, fallback: float) -> float:
    if flag is not None:
        return flag
    env = os.environ.get(ENV_TOL)
    if env:
        try:
            return float(env)
        except ValueError:
            raise CliError(f"{ENV_TOL}={env!r} is not a number") from None
    return fallback


# -- output -------------------------------------------------------------------

def jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if v != v or v in (float("inf"), float("-inf")):
            return repr(v)
        return v + 0.0
    return obj


def dumps(report: dict) -> str:
    return json.dumps(jsonable(report), sort_keys=True, indent=2) + "\n"


def write_atomic(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".dirackit-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(report: dict, out: str | None):
    text = dumps(report)
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


# -- commands -----------------------------------------------------------------

def _linear(spec: dict, tol: float):
    from .linear_dirac import construct_from_json, verify_dirac, _with_notes

    ld = construct_from_json(spec)
    if tol != _default_iso():
        fresh = verify_dirac(ld.D, ld.space, iso_tol=tol)
        keep = {k: v for k, v in ld.diagnostics.items() if k not in fresh.diagnostics}
        ld = _with_notes(fresh, keep, ld.notes)
    return ld


def _default_iso() -> float:
    from .linear_dirac import ISOTROPY_TOL

    return ISOTROPY_TOL


def cmd_verify(args) -> int:
    from .linear_dirac import classify, induced_tensors, kernel_report

    spec = parse_spec(args.spec, "verify")
    tol = default_tol(args.tol, _default_iso())
    ld = _linear(spec, tol)
    report = {"command": "verify", "tolerance": tol, **ld.report()}
    report["space"] = ld.space.to_json()
    if ld.certified:
        report["kernel_report"] = kernel_report(ld)
        t = induced_tensors(ld)
        report["induced"] = {"dim_L": t.L.dim, "Omega_L": t.Omega_L + 0.0, "checks": t.checks}
        report["classification"] = classify(ld)
    emit(report, args.out)
    return EXIT_OK if ld.certified else EXIT_CHECK


def cmd_construct(args) -> int:
    spec = parse_spec(args.spec, "construct")
    tol = default_tol(args.tol, _default_iso())
    ld = _linear(spec, tol)
    report = {"command": "construct", "tolerance": tol, "space": ld.space.to_json(), **ld.report()}
    emit(report, args.out)
    return EXIT_OK if ld.certified else EXIT_CHECK


def _algebroid(chart, obj):
    from .calculus import LocalAlgebroid
    from .fields import field_from_json
    from .poly import Poly

    if not obj:
        return None
    anchor = [field_from_json(f, chart) for f in obj["anchor"]]
    structure = {}
    for entry in obj.get("structure", []):
        structure[(entry["a"] - 1, entry["b"] - 1)] = [Poly.from_json(c, chart.nvars) for c in entry["components"]]
    return LocalAlgebroid(chart, anchor, structure)


def _point(text: str | None, dim: int):
    if text is None:
        return None
    try:
        vals = [float(t) for t in text.split(",")]
    except ValueError:
        raise CliError(f"--at expects comma-separated numbers, got {text!r}") from None
    if len(vals) != dim:
        raise CliError(f"--at needs {dim} coordinates, got {len(vals)}")
    return np.array(vals)


def cmd_bracket(args) -> int:
    from . import calculus as calc_mod
    from . import courant
    from .dirac_fields import chart_from_json
    from .fields import PolyField, field_from_json

    spec = parse_spec(args.spec, "bracket")
    chart = chart_from_json(spec["chart"], spec["chart"]["dim"])
    A = _algebroid(chart, spec.get("algebroid"))
    calc = calc_mod.calculus_for(chart, A)
    section_kind = "AlgebroidSection" if A is not None else "Vector"

    def read(arg):
        if "vector" in arg:
            vec = dict(arg["vector"])
            return courant.Pair(field_from_json(vec, chart), field_from_json(arg["form"], chart))
        return field_from_json(arg, chart)

    items = [read(a) for a in spec["args"]]
    op = spec["op"]
    need = {"lie_bracket": 2, "exterior_derivative": 1, "lie_derivative": 2, "courant_bracket": 2,
            "dorfman_bracket": 2, "courant_tensor": 3, "jacobiator": 3}[op]
    if len(items) != need:
        raise CliError(f"{op} takes {need} arguments, got {len(items)}")
    pairs_needed = op in ("courant_bracket", "dorfman_bracket", "courant_tensor", "jacobiator")
    if pairs_needed and not all(isinstance(x, courant.Pair) for x in items):
        raise CliError(f"{op} arguments must be {{'vector', 'form'}} pairs")
    if not pairs_needed and any(isinstance(x, courant.Pair) for x in items):
        raise CliError(f"{op} arguments must be single fields")
    point = _point(args.at, chart.dim)
    report: dict = {"command": "bracket", "op": op}
    status = EXIT_OK

    def value(x):
        return x.at(point) if point is not None else None

    if op == "lie_bracket":
        res = calc.bracket(*items)
        report["result"], report["value"] = res.to_json(), value(res)
    elif op == "exterior_derivative":
        res = calc.d(items[0])
        report["result"], report["value"] = res.to_json(), value(res)
    elif op == "lie_derivative":
        res = calc.lie(items[0], items[1])
        report["result"], report["value"] = res.to_json(), value(res)
    elif op in ("courant_bracket", "dorfman_bracket"):
        fn = courant.courant_bracket if op == "courant_bracket" else courant.dorfman_bracket
        res = fn(items[0], items[1], A)
        report["result"] = res.to_json()
        report["value"] = res.at(point) if point is not None else None
        report["forms_agreement"] = courant.bracket_forms_residual(items[0], items[1], A)
        if report["forms_agreement"]["corrected"] > 1e-10:
            status = EXIT_CHECK
    elif op == "courant_tensor":
        res = courant.courant_tensor(*items, algebroid=A)
        report["result"] = PolyField(chart, "Scalar", {(): res}).to_json()
        report["value"] = chart.evaluate(res, point) if point is not None else None
        if courant.isotropy_residual(items) <= 1e-10:
            lie = courant.courant_tensor_lie_form(*items, algebroid=A)
            report["lie_form_residual"] = (res - lie).max_abs()
            if report["lie_form_residual"] > 1e-10 * max(1.0, res.max_abs()):
                status = EXIT_CHECK
    else:
        rep = courant.jacobiator_check(*items, algebroid=A)
        report["check"] = rep.to_json()
        if not rep.ok:
            status = EXIT_CHECK
    report["section_kind"] = section_kind
    emit(report, args.out)
    return status


def cmd_involutivity(args) -> int:
    from .dirac_fields import dirac_field_from_json, involutivity_check, random_points, INVOLUTIVITY_TOL

    spec = parse_spec(args.spec, "involutivity")
    D = dirac_field_from_json(spec)
    tol = default_tol(args.tol, INVOLUTIVITY_TOL)
    if args.samples < 1:
        raise CliError("--samples must be at least 1")
    rng = np.random.default_rng(args.seed)
    pts = random_points(D.chart, args.samples, rng)
    rep = involutivity_check(D, pts, section_budget=args.budget, seed=args.seed, tol=tol)
    report = {"command": "involutivity", "seed": args.seed, "tolerance": tol, "kind": D.kind.value,
              **rep.to_json()}
    emit(report, args.out)
    return EXIT_OK if rep.involutive else EXIT_CHECK


def cmd_simulate(args) -> int:
    from .mechanics import (MEMBERSHIP_TOL, build_system, diagnostics, disk_initial_state, integrate)

    spec = parse_spec(args.spec, "simulate")
    sys_spec = {k: v for k, v in spec.items() if k not in ("z0", "rates", "h", "T", "check_admissible")}
    sysm = build_system(sys_spec)
    if "z0" in spec:
        z0 = np.asarray(spec["z0"], dtype=float)
    elif sysm.name == "rolling-disk":
        z0 = disk_initial_state(sysm, spec["rates"]["theta_dot"], spec["rates"]["phi_dot"])
    else:
        raise CliError("'rates' is only understood for the rolling disk; give z0")
    if z0.shape != (2 * sysm.dim_Q,):
        raise CliError(f"z0 must have {2 * sysm.dim_Q} entries")
    tol = default_tol(args.tol, MEMBERSHIP_TOL)
    traj = integrate(sysm, z0, float(spec["h"]), float(spec["T"]),
                     check_admissible=spec.get("check_admissible", True))
    diag = diagnostics(traj)
    checks = {
        "energy_drift": diag["energy_drift_max"] <= tol,
        "constraint_residual": diag["constraint_residual_max"] <= tol,
        "membership_residual": diag["membership_residual_max"] <= tol,
    }
    buf = io.StringIO()
    traj.write_csv(buf)
    if args.out:
        write_atomic(args.out, buf.getvalue())
    report = {"command": "simulate", "system": sysm.name, "params": sysm.params, "tolerance": tol,
              "z0": z0, "h": spec["h"], "T": spec["T"], "csv": args.out, "diagnostics": diag, "checks": checks,
              "ok": all(checks.values())}
    if args.report:
        write_atomic(args.report, dumps(report))
    else:
        sys.stdout.write(dumps(report))
    return EXIT_OK if report["ok"] else EXIT_CHECK


def cmd_limits(args) -> int:
    from .sequences import COHERENCE_TOL, ORIENTATION_NOTE, coherence_report, sequence_from_json, validate

    spec = parse_spec(args.spec, "limits")
    seq = sequence_from_json(spec)
    tol = default_tol(args.tol, COHERENCE_TOL)
    validation = validate(seq)
    coherence = coherence_report(seq, strict=False, tol=tol)
    report = {"command": "limits", "tolerance": tol, "validation": validation, "coherence": coherence}
    if seq.kind.value == "projective":
        report["note"] = ORIENTATION_NOTE
    emit(report, args.out)
    return EXIT_OK if validation["valid"] and coherence["coherent"] else EXIT_CHECK


# -- entry point --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dirackit", description="Linear and polynomial Dirac structure toolkit.")
    parser.add_argument("--version", action="version", version=f"dirackit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text, out_required=False):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("spec", help="JSON input file")
        p.add_argument("--tol", type=float, default=None, help=f"tolerance override (also via {ENV_TOL})")
        p.add_argument("--out", required=out_required, default=None, help="output path (written atomically)")
        p.set_defaults(func=fn)
        return p

    add("verify", cmd_verify, "certify a linear Dirac structure")
    add("construct", cmd_construct, "build a linear Dirac structure and write its basis", out_required=True)
    p = add("bracket", cmd_bracket, "polynomial calculus: brackets, derivatives, Courant tensor")
    p.add_argument("--at", default=None, help="evaluate the result at x1,...,xn")
    p = add("involutivity", cmd_involutivity, "sampled Courant-tensor involutivity test")
    p.add_argument("--samples", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=30, help="number of section triples")
    p = add("simulate", cmd_simulate, "integrate a constrained Hamiltonian system; --out is the CSV path")
    p.add_argument("--report", default=None, help="JSON report path (default: stdout)")
    add("limits", cmd_limits, "validate a Dirac sequence and check coherence")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        sys.stderr.write(f"dirackit: {exc}\n")
        return exc.code
    except (ValueError, KeyError, TypeError) as exc:
        sys.stderr.write(f"dirackit: invalid input: {exc}\n")
        return EXIT_USAGE
    except (RuntimeError, AssertionError) as exc:
        sys.stderr.write(f"dirackit: check failed: {exc}\n")
        return EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
