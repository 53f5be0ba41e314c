"""Command-line entry point ``orbit-metrics``."""

from __future__ import annotations

import argparse
import json
import math
import sys
from importlib import resources

import numpy as np
import scipy

from . import __version__
from .errors import HallViolation, InvariantFailure, OrbitMetricsError, SchemaError, ValidationError
from .io import dumps, load_instance
from .k1 import RhoValues, complement_components, mt2_bounds, mt3_interval, rho, trivial_labeling
from .matrix import audit_bounds, construct_unitary
from .metrics import compute_metrics
from .transport import PairRelation, bottleneck, hall_check, refine, verify_plan

COMMANDS = ("metrics", "refine", "unitary", "k1", "bounds", "audit", "selftest")


def _metrics(inst):
    o = inst.options
    report = compute_metrics(inst.x, inst.y, pitch=o["grid_pitch"], tol=o["tol"], exact=o["exact_discs"])
    bad = report.violations()
    if bad:
        raise InvariantFailure("metric inequalities failed", failed=bad)
    return report


def _refine(inst):
    a, b, spec = list(inst.x.classes), list(inst.y.classes), inst.model.group
    if inst.relation is None:
        res = bottleneck(inst.x, inst.y, order="group")
        out = res.to_json()
        R = res.relation
        plan = res.plan
    else:
        R = PairRelation(inst.relation, len(a), len(b))
        cert = hall_check(a, b, R, spec)
        if not cert.feasible:
            raise HallViolation("Hall condition fails on the given relation", **cert.to_json())
        plan = refine(a, b, R, spec)
        out = {"plan": plan.to_json()}
    if plan is not None:
        problems = verify_plan(a, b, R, plan, spec)
        if problems:
            raise InvariantFailure("refinement failed verification", problems=problems)
    return out


def _require_matrices(inst):
    if not inst.matrix_mode:
        raise ValidationError("this command needs matrix inputs")


def _unitary(inst):
    _require_matrices(inst)
    cert = construct_unitary(inst.x_matrix, inst.y_matrix, cluster_tol=inst.options["cluster_tol"])
    if cert.achieved > cert.plan_bottleneck + 1e-8:
        raise InvariantFailure("unitary exceeds the plan bottleneck", achieved=cert.achieved)
    return cert.to_json()


def _rho_block(inst):
    X, Y = inst.x.points, inst.y.points
    if inst.k1 is None:
        return None, None
    cm = complement_components(X, Y, inst.k1["h"])
    lab = inst.labeling() if inst.k1.get("labels") is not None else trivial_labeling(cm)
    return cm, rho(cm, lab, X, Y)


def _k1(inst):
    if inst.k1 is None:
        raise ValidationError("instance has no k1 block")
    cm, r = _rho_block(inst)
    return {"components": cm.to_json(), "rho": r.to_json()}


def _bounds(inst):
    report = _metrics(inst)
    cm, r = _rho_block(inst)
    if r is None:
        r = RhoValues(0.0, 0.0, 0.0, report.hausdorff, 0.0)
    if r.rho_1 > r.rho_x + r.rho_y + 1e-12 or r.rho < report.hausdorff - 1e-12:
        raise InvariantFailure("rho values violate their basic inequalities")
    mt2 = mt2_bounds(report, r.rho_x, r.rho_y)
    interval = mt3_interval(report, r, C=inst.options["C"])
    certs = {"plan": bottleneck(inst.x, inst.y, order="group").to_json()}
    if inst.matrix_mode:
        cert = construct_unitary(inst.x_matrix, inst.y_matrix, cluster_tol=inst.options["cluster_tol"])
        if cert.achieved > report.D_c + 1e-8:
            raise InvariantFailure("unitary exceeds D_c", achieved=cert.achieved)
        certs["unitary"] = {"achieved": cert.achieved, "plan_bottleneck": cert.plan_bottleneck}
    out = {
        "metrics": report.to_json(),
        "certificates": certs,
        "mt2": mt2.to_json(),
        "interval": interval.to_json(),
        "provenance": _provenance(inst, report),
    }
    if cm is not None:
        out["rho"] = r.to_json()
        out["components"] = cm.to_json()
    return out


def _audit(inst):
    _require_matrices(inst)
    o = inst.options
    rho_1 = 0.0
    if inst.k1 is not None:
        rho_1 = _rho_block(inst)[1].rho_1
    out = audit_bounds(inst.x_matrix, inst.y_matrix, rho_1=rho_1, seed=o["seed"], budget=o["budget"],
                       C=o["C"], pitch=o["grid_pitch"], cluster_tol=o["cluster_tol"])
    if not out["passed"]:
        raise InvariantFailure("audit inequalities failed", checks=out["checks"])
    return out


def _provenance(inst, report):
    o = inst.options
    return {
        "versions": {"orbit_metrics": __version__, "numpy": np.__version__, "scipy": scipy.__version__},
        "seed": o["seed"],
        "pitch": o["grid_pitch"],
        "tol": o["tol"],
        "C": o["C"],
        "error_bounds": {"disc_grid": report.disc_error_bound, "rho_grid": 2 * inst.k1["h"] if inst.k1 else 0.0},
    }


_HANDLERS = {
    "metrics": lambda inst: _metrics(inst).to_json(),
    "refine": _refine,
    "unitary": _unitary,
    "k1": _k1,
    "bounds": _bounds,
    "audit": _audit,
}


def run(command: str, instance: dict | None = None, overrides: dict | None = None) -> dict:
    """Execute a subcommand on a parsed instance and return the report."""
    if command == "selftest":
        return selftest(overrides)
    if command not in _HANDLERS:
        raise ValidationError(f"unknown command {command!r}")
    if instance is None:
        raise ValidationError(f"{command} needs an instance")
    return _HANDLERS[command](load_instance(instance, overrides))


# -- selftest --------------------------------------------------------------------


def corpus() -> list[tuple[str, dict]]:
    files = sorted(p for p in resources.files("orbit_metrics").joinpath("corpus").iterdir() if p.name.endswith(".json"))
    return [(p.name, json.loads(p.read_text())) for p in files]


def _lookup(report, path):
    cur = report
    for part in path.split("."):
        cur = cur[int(part)] if isinstance(cur, list) else cur[part]
    return cur


def _as_float(v):
    return math.inf if v == "inf" else float(v)


def check_expectation(report, exp) -> dict:
    got = _lookup(report, exp["path"])
    if "value" in exp:
        want = exp["value"]
        if isinstance(want, (int, float)) and not isinstance(want, bool):
            ok = abs(_as_float(got) - want) <= exp.get("tol", 0.0)
        else:
            ok = got == want
        return {"path": exp["path"], "expected": want, "got": got, "passed": bool(ok)}
    other = _as_float(_lookup(report, exp["greater_than"]))
    return {"path": exp["path"], "greater_than": exp["greater_than"], "got": got, "passed": _as_float(got) > other}


def selftest(overrides=None) -> dict:
    results = []
    for name, obj in corpus():
        entry = {"instance": name, "provenance": obj.get("provenance", []), "checks": []}
        reports = {}
        for exp in obj.get("expected", []):
            cmd = exp["command"]
            try:
                if cmd not in reports:
                    reports[cmd] = run(cmd, obj, overrides)
                if "error" in exp:
                    entry["checks"].append({"command": cmd, "error": None, "passed": False})
                    continue
                entry["checks"].append(dict(check_expectation(reports[cmd], exp), command=cmd))
            except OrbitMetricsError as exc:
                want = exp.get("error")
                entry["checks"].append({"command": cmd, "error": exc.code, "passed": want == exc.code})
        results.append(entry)
    passed = all(c["passed"] for e in results for c in e["checks"])
    return {"passed": passed, "instances": results}


# -- entry point -------------------------------------------------------------------


def _parser():
    p = argparse.ArgumentParser(prog="orbit-metrics", description="Spectral transport metrics and unitary-orbit bounds.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--in", dest="infile", help="instance JSON")
    p.add_argument("--out", dest="outfile", help="report JSON (default: stdout)")
    p.add_argument("--grid-pitch", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--budget", type=int)
    p.add_argument("--cluster-tol", type=float)
    p.add_argument("--exact-discs", action="store_true", default=None)
    return p


def _emit(text, outfile):
    if outfile:
        with open(outfile, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    overrides = {
        "grid_pitch": args.grid_pitch,
        "tol": args.tol,
        "seed": args.seed,
        "budget": args.budget,
        "cluster_tol": args.cluster_tol,
        "exact_discs": args.exact_discs,
    }
    try:
        instance = None
        if args.command != "selftest":
            if not args.infile:
                raise ValidationError("--in is required")
            try:
                with open(args.infile) as fh:
                    instance = json.load(fh)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"not valid JSON: {exc}") from None
            except OSError as exc:
                raise ValidationError(f"cannot read {args.infile}: {exc.strerror}") from None
        report = run(args.command, instance, overrides)
    except OrbitMetricsError as exc:
        sys.stderr.write(dumps({"error": exc.to_dict()}))
        return exc.exit_status
    _emit(dumps(report), args.outfile)
    if args.command == "selftest" and not report["passed"]:
        return InvariantFailure.exit_status
    return 0


if __name__ == "__main__":
    sys.exit(main())
